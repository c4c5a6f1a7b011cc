"""Weighted volume measures dv_alpha on the unit ball, moments and quadrature.

dv_alpha(z) = c_alpha (1 - |z|^2)^alpha dv(z), with dv the volume measure
normalized so the ball has mass one. Every rule built here is normalized
the same way: integrating the constant 1 returns 1.

Coordinates used by the deterministic rules: z = sqrt(s) * zeta, where
s = |z|^2 is Beta(n, alpha + 1) distributed under dv_alpha and zeta is
uniform on the sphere. On the sphere, (|zeta_1|^2, ..., |zeta_n|^2) is
uniform on the simplex and the phases are independent and uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

MAX_DIMENSION = 4


class MeasureError(ValueError):
    pass


def _check_alpha(alpha: float) -> None:
    if not alpha > -1:
        raise MeasureError(f"weight exponent must exceed -1, got alpha={alpha}")


def normalization_constant(n: int, alpha: float) -> float:
    """c_alpha = Gamma(n + alpha + 1) / (n! Gamma(alpha + 1))."""
    _check_alpha(alpha)
    return math.exp(math.lgamma(n + alpha + 1) - math.lgamma(n + 1) - math.lgamma(alpha + 1))


def log_monomial_norm2(m: Sequence[int], alpha: float, n: int | None = None) -> float:
    """log of ||z^m||_{2,alpha}^2 = m! Gamma(n+alpha+1) / Gamma(n+|m|+alpha+1)."""
    n = len(m) if n is None else n
    deg = sum(m)
    return (
        sum(math.lgamma(k + 1) for k in m)
        + math.lgamma(n + alpha + 1)
        - math.lgamma(n + deg + alpha + 1)
    )


def monomial_moment(m: Sequence[int], l: Sequence[int], alpha: float, n: int | None = None) -> float:
    """Exact integral of z^m conj(z)^l against dv_alpha."""
    _check_alpha(alpha)
    if tuple(m) != tuple(l):
        return 0.0
    return math.exp(log_monomial_norm2(m, alpha, n))


def monomial_moments(exponents: np.ndarray, alpha: float) -> np.ndarray:
    """Vectorized ||z^m||_{2,alpha}^2 for rows of an integer array (k, n)."""
    _check_alpha(alpha)
    exponents = np.atleast_2d(np.asarray(exponents))
    n = exponents.shape[1]
    deg = exponents.sum(axis=1)
    logs = (
        special.gammaln(exponents + 1).sum(axis=1)
        + special.gammaln(n + alpha + 1)
        - special.gammaln(n + deg + alpha + 1)
    )
    return np.exp(logs)


# ---------------------------------------------------------------------------
# Holder exponent bookkeeping


@dataclass(frozen=True)
class SpaceParams:
    """Exponent pair (p, alpha) of A^p_alpha on B_n."""

    p: float
    alpha: float
    n: int = 1

    def __post_init__(self):
        if not self.p > 0:
            raise MeasureError(f"p must be positive, got {self.p}")
        _check_alpha(self.alpha)
        if not 1 <= self.n <= MAX_DIMENSION:
            raise MeasureError(f"dimension must be in 1..{MAX_DIMENSION}, got {self.n}")

    @property
    def c_alpha(self) -> float:
        return normalization_constant(self.n, self.alpha)


@dataclass(frozen=True)
class HolderFrame:
    """Exponents tying A^q_beta to the product A^{p1}_{a1} . A^{p2}_{a2}.

    q, beta solve 1/p1 + 1/p2 = 1/q and a1/p1 + a2/p2 = beta/q; q', beta'
    solve 1/q + 1/q' = 1 and beta/q + beta'/q' = pairing_alpha. When q <= 1
    the dual pair is undefined and reported as (inf, nan).
    """

    p1: float
    alpha1: float
    p2: float
    alpha2: float
    pairing_alpha: float
    q: float
    beta: float
    q_prime: float
    beta_prime: float
    conjugate_sum_ok: bool
    weight_sum_ok: bool
    n: int = 1

    @property
    def pa_ineq_holds(self) -> bool:
        return self.conjugate_sum_ok and self.weight_sum_ok

    def violations(self) -> list[str]:
        out = []
        if not self.conjugate_sum_ok:
            out.append(f"1/p1 + 1/p2 < 1 fails: 1/{self.p1} + 1/{self.p2} = {1 / self.p1 + 1 / self.p2:.6g}")
        if not self.weight_sum_ok:
            lhs = (1 + self.alpha1) / self.p1 + (1 + self.alpha2) / self.p2
            out.append(
                f"(1+alpha1)/p1 + (1+alpha2)/p2 < 1+alpha fails: {lhs:.6g} >= {1 + self.pairing_alpha:.6g}"
            )
        return out

    @property
    def space1(self) -> SpaceParams:
        return SpaceParams(self.p1, self.alpha1, self.n)

    @property
    def space2(self) -> SpaceParams:
        return SpaceParams(self.p2, self.alpha2, self.n)

    @property
    def product_space(self) -> SpaceParams:
        return SpaceParams(self.q, self.beta, self.n)

    @property
    def dual_space(self) -> SpaceParams:
        return SpaceParams(self.q_prime, self.beta_prime, self.n)

    def hankel_constant(self) -> float:
        """Constant C with |<fg, b>_alpha| <= C ||b||_{q',beta'} ||f||_{p1,a1} ||g||_{p2,a2}.

        Three-factor Holder with exponents (p1, p2, q') after splitting
        (1-|z|^2)^alpha; the c-factors come from the measure normalizations.
        """
        n = self.n
        return normalization_constant(n, self.pairing_alpha) / (
            normalization_constant(n, self.alpha1) ** (1 / self.p1)
            * normalization_constant(n, self.alpha2) ** (1 / self.p2)
            * normalization_constant(n, self.beta_prime) ** (1 / self.q_prime)
        )

    def product_constant(self) -> float:
        """Constant C with ||fg||_{q,beta} <= C ||f||_{p1,a1} ||g||_{p2,a2}."""
        n = self.n
        return normalization_constant(n, self.beta) ** (1 / self.q) / (
            normalization_constant(n, self.alpha1) ** (1 / self.p1)
            * normalization_constant(n, self.alpha2) ** (1 / self.p2)
        )

    def duality_constant(self) -> float:
        """Constant C with |<h, b>_alpha| <= C ||h||_{q,beta} ||b||_{q',beta'}."""
        n = self.n
        return normalization_constant(n, self.pairing_alpha) / (
            normalization_constant(n, self.beta) ** (1 / self.q)
            * normalization_constant(n, self.beta_prime) ** (1 / self.q_prime)
        )


def holder_frame(p1: float, alpha1: float, p2: float, alpha2: float, pairing_alpha: float, n: int = 1) -> HolderFrame:
    if not (p1 > 0 and p2 > 0):
        raise MeasureError(f"p1, p2 must be positive, got {p1}, {p2}")
    _check_alpha(alpha1)
    _check_alpha(alpha2)
    inv_q = 1 / p1 + 1 / p2
    q = 1 / inv_q
    beta = q * (alpha1 / p1 + alpha2 / p2)
    if q > 1:
        q_prime = q / (q - 1)
        beta_prime = q_prime * (pairing_alpha - beta / q)
    else:
        q_prime, beta_prime = math.inf, math.nan
    weight_lhs = (1 + alpha1) / p1 + (1 + alpha2) / p2
    return HolderFrame(
        p1=p1,
        alpha1=alpha1,
        p2=p2,
        alpha2=alpha2,
        pairing_alpha=pairing_alpha,
        q=q,
        beta=beta,
        q_prime=q_prime,
        beta_prime=beta_prime,
        conjugate_sum_ok=inv_q < 1,
        weight_sum_ok=weight_lhs < 1 + pairing_alpha,
        n=n,
    )


def dual_exponents(q: float, beta: float, pairing_alpha: float) -> tuple[float, float]:
    """(q', beta') with 1/q + 1/q' = 1 and beta/q + beta'/q' = pairing_alpha."""
    if not q > 1:
        raise MeasureError(f"dual exponent needs q > 1, got {q}")
    q_prime = q / (q - 1)
    return q_prime, q_prime * (pairing_alpha - beta / q)


def small_hankel_exponents(p1: float, alpha1: float, p2: float, alpha2: float) -> tuple[float, float]:
    """(q, beta) with 1/q = 1/p2 - 1/p1 and beta/q = alpha2/p2 - alpha1/p1."""
    if not p2 < p1:
        raise MeasureError(f"need p2 < p1, got p1={p1}, p2={p2}")
    q = 1 / (1 / p2 - 1 / p1)
    return q, q * (alpha2 / p2 - alpha1 / p1)


# ---------------------------------------------------------------------------
# Quadrature


def jacobi_rule_01(order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule on [0, 1] for the probability weight ~ t^a (1 - t)^b."""
    x, w = special.roots_jacobi(order, b, a)
    t = 0.5 * (x + 1.0)
    return t, w / w.sum()


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights approximating dv_alpha on B_n.

    ``exactness_degree`` is the largest D such that every z^m conj(z)^l
    with |m| + |l| <= D is integrated exactly; ``None`` for Monte Carlo.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    n: int
    kind: str
    exactness_degree: int | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def integrate(self, values: np.ndarray) -> complex | float:
        values = np.asarray(values)
        return np.sum(self.weights * values)

    def standard_error(self, values: np.ndarray) -> float:
        """Standard error of a Monte Carlo estimate; zero for deterministic rules."""
        if self.kind != "monte-carlo":
            return 0.0
        values = np.asarray(values)
        return float(np.std(values, ddof=1) / math.sqrt(values.size))


def build_rule(
    n: int,
    alpha: float,
    radial_order: int | None = None,
    angular_order: int | None = None,
    sample_count: int | None = None,
    seed: int | None = None,
) -> QuadratureRule:
    """Construct a quadrature rule for dv_alpha on B_n.

    With ``sample_count`` (or with n >= 2 and no orders) the rule is seeded
    Monte Carlo. Otherwise it is a deterministic product rule: Gauss-Jacobi
    in s = |z|^2, Gauss-Jacobi stick-breaking on the simplex of squared
    moduli (n >= 2), and ``angular_order`` equispaced phases per coordinate.
    """
    _check_alpha(alpha)
    if not 1 <= n <= MAX_DIMENSION:
        raise MeasureError(f"dimension must be in 1..{MAX_DIMENSION}, got {n}")
    if sample_count is not None or (n >= 2 and radial_order is None):
        return _monte_carlo_rule(n, alpha, sample_count or 100_000, 0 if seed is None else seed)
    radial_order = radial_order or 40
    angular_order = angular_order or (4 * radial_order)
    if radial_order < 1 or angular_order < 1:
        raise MeasureError("quadrature orders must be >= 1")
    return _product_rule(n, alpha, radial_order, angular_order)


def _sphere_product(n: int, order: int, angular_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule for the uniform measure on the unit sphere of C^n."""
    u = np.ones((1, 1))
    wu = np.ones(1)
    for k in range(n - 1):
        x, wx = jacobi_rule_01(order, 0.0, n - 2 - k)
        rem = u[:, -1:]
        head = u[:, :-1]
        u = np.concatenate(
            [
                np.repeat(head, x.size, axis=0),
                (rem * x[None, :]).reshape(-1, 1),
                (rem * (1 - x)[None, :]).reshape(-1, 1),
            ],
            axis=1,
        )
        wu = np.outer(wu, wx).ravel()
    phases = np.exp(2j * np.pi * np.arange(angular_order) / angular_order)
    grids = np.meshgrid(*([np.arange(angular_order)] * n), indexing="ij")
    phase = phases[np.stack([g.ravel() for g in grids], axis=1)]  # (K^n, n)
    points = (np.sqrt(u)[:, None, :] * phase[None, :, :]).reshape(-1, n)
    weights = np.outer(wu, np.full(phase.shape[0], 1.0 / phase.shape[0])).ravel()
    return points, weights


def _polar_rule(s: np.ndarray, ws: np.ndarray, n: int, sphere_order: int, angular_order: int):
    zeta, wz = _sphere_product(n, sphere_order, angular_order)
    nodes = (np.sqrt(s)[:, None, None] * zeta[None, :, :]).reshape(-1, n)
    weights = np.outer(ws, wz).ravel()
    return nodes, weights


def _product_rule(n: int, alpha: float, radial_order: int, angular_order: int) -> QuadratureRule:
    s, ws = jacobi_rule_01(radial_order, n - 1, alpha)
    nodes, weights = _polar_rule(s, ws, n, radial_order, angular_order)
    return QuadratureRule(
        nodes=nodes,
        weights=weights,
        alpha=alpha,
        n=n,
        kind="exact-polar",
        exactness_degree=min(angular_order - 1, 4 * radial_order - 1),
        meta={"radial_order": radial_order, "angular_order": angular_order},
    )


def graded_rule(
    n: int,
    alpha: float,
    angular_order: int = 64,
    panels: int = 40,
    per_panel: int = 16,
    sphere_order: int | None = None,
) -> QuadratureRule:
    """Polar rule for dv_alpha whose radial nodes accumulate geometrically at |z| = 1.

    Meant for integrands with boundary singularities (log weights, kernels
    centred near the sphere). Weights are renormalized to total mass one.
    """
    _check_alpha(alpha)
    s, w = graded_unit_interval(panels, per_panel)
    log_beta = math.lgamma(n) + math.lgamma(alpha + 1) - math.lgamma(n + alpha + 1)
    ws = w * s ** (n - 1) * (1 - s) ** alpha / math.exp(log_beta)
    ws = ws / ws.sum()
    nodes, weights = _polar_rule(s, ws, n, sphere_order or max(4, angular_order // 4), angular_order)
    return QuadratureRule(
        nodes=nodes,
        weights=weights,
        alpha=alpha,
        n=n,
        kind="graded-polar",
        exactness_degree=None,
        meta={"panels": panels, "per_panel": per_panel, "angular_order": angular_order},
    )


def _monte_carlo_rule(n: int, alpha: float, sample_count: int, seed: int) -> QuadratureRule:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((sample_count, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    s = rng.beta(n, alpha + 1.0, size=sample_count)
    x = g * np.sqrt(s)[:, None]
    nodes = x[:, :n] + 1j * x[:, n:]
    weights = np.full(sample_count, 1.0 / sample_count)
    return QuadratureRule(
        nodes=nodes,
        weights=weights,
        alpha=alpha,
        n=n,
        kind="monte-carlo",
        exactness_degree=None,
        seed=seed,
        meta={"sample_count": sample_count},
    )


def evaluate_on(f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule) -> np.ndarray:
    vals = np.asarray(f(rule.nodes))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise MeasureError(f"non-finite value at quadrature node {i}: z={rule.nodes[i]}")
    return vals


def lp_norm(f, sp: SpaceParams, rule: QuadratureRule) -> float:
    """||f||_{p,alpha} by quadrature; ``f`` maps an (N, n) node array to values."""
    if not math.isclose(rule.alpha, sp.alpha, abs_tol=1e-15):
        raise MeasureError(f"rule weight alpha={rule.alpha} does not match space alpha={sp.alpha}")
    if rule.n != sp.n:
        raise MeasureError(f"rule dimension {rule.n} does not match space dimension {sp.n}")
    vals = evaluate_on(f, rule)
    return lp_norm_values(vals, sp.p, rule.weights)


def lp_norm_values(vals: np.ndarray, p: float, weights: np.ndarray) -> float:
    a = np.abs(vals)
    scale = a.max() if a.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(scale * np.sum(weights * (a / scale) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Boundary-refined radial integration


def graded_unit_interval(panels: int = 40, per_panel: int = 20, ratio: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on panels of [0, 1] shrinking geometrically toward 1.

    Panel breakpoints are 1 - ratio^k, k = 0..panels, then [1 - ratio^panels, 1].
    """
    x, w = special.roots_legendre(per_panel)
    edges = 1.0 - ratio ** np.arange(panels + 1)
    edges = np.append(edges, 1.0)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


def forelli_rudin_integral(n: int, t: float, s: float, radius: float, panels: int = 45, per_panel: int = 24) -> float:
    """I(z) = int (1-|w|^2)^t dv(w) / |1 - <z,w>|^{n+1+t+s} at |z| = radius.

    Rotation invariance reduces I to a one-dimensional integral in
    tau = |w_1|^2 once the transverse coordinates and the phase are
    integrated out:

        I = n! Gamma(t+1)/Gamma(t+n) * int_0^1 (1-tau)^{t+n-1} F(c, c; 1; r^2 tau) dtau

    with c = (n+1+t+s)/2 and F the Gauss hypergeometric function. The
    integrand peaks at tau = 1 when r -> 1, so a graded mesh is used.
    """
    if not t > -1:
        raise MeasureError(f"Forelli-Rudin estimate requires t > -1, got t={t}")
    if not s > 0:
        raise MeasureError(f"Forelli-Rudin estimate requires s > 0, got s={s}")
    if not 0 <= radius < 1:
        raise MeasureError(f"radius must lie in [0, 1), got {radius}")
    c = 0.5 * (n + 1 + t + s)
    tau, w = graded_unit_interval(panels, per_panel)
    vals = (1.0 - tau) ** (t + n - 1) * special.hyp2f1(c, c, 1.0, radius**2 * tau)
    if not np.all(np.isfinite(vals)):
        raise MeasureError(f"Forelli-Rudin quadrature produced non-finite values at radius {radius}")
    pref = math.exp(math.lgamma(n + 1) + math.lgamma(t + 1) - math.lgamma(t + n))
    return float(pref * np.sum(w * vals))


def forelli_rudin_scan(n: int, t: float, s: float, radii: Sequence[float], panels: int = 45, per_panel: int = 24):
    """[(radius, I(z) (1-|z|^2)^s)] for each radius."""
    return [(float(r), forelli_rudin_integral(n, t, s, r, panels, per_panel) * (1 - r * r) ** s) for r in radii]

"""Norm estimation by optimization over polynomial truncations.

Sup-type quantities (operator and form norms) are certified lower bounds:
every value is recomputed from its stored witness. Inf-type quantities
(factorization costs) are certified upper bounds: the returned pairs
reproduce f exactly at the truncation after the correction step.

Gradients are Wirtinger derivatives d/d(conj c); for a real parametrisation
x = (Re c, Im c) the real gradient is 2 (Re g, Im g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .lattice import FactorizationCertificate
from .measure import HolderFrame, QuadratureRule, SpaceParams, build_rule, lp_norm_values, monomial_moments
from .operators import TruncatedOperator, hankel_form_matrix, kernel_symbol, small_hankel_matrix
from .poly import (
    BlochGrid,
    Polynomial,
    bloch_norm,
    graded_basis,
    log_weight_diagnostics,
    monomial_matrix,
    multiply,
)


@dataclass
class OptConfig:
    restarts: int = 8
    max_iter: int = 500
    seed: int = 0
    tol: float = 1e-13
    sweeps: int = 30
    penalties: tuple[float, ...] = (1.0, 10.0, 100.0)


@dataclass
class NormEstimate:
    value: float
    witness: tuple[Polynomial, ...]
    method: str
    degree: int
    restarts: int = 0
    seed: int | None = None
    converged: bool = True
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# L^p norms of coefficient vectors


def norm_rule(n: int, alpha: float, degree: int, p: float) -> QuadratureRule:
    """Polar rule exact for |f|^p when p is an even integer and deg f <= degree."""
    even = float(p).is_integer() and int(p) % 2 == 0
    top = max(degree, 1) * max(int(math.ceil(p)), 2)
    if not even:
        top = 2 * top + 8
    radial = top // 4 + 3
    angular = top + 2
    if n == 1:
        return build_rule(1, alpha, radial, angular)
    return build_rule(n, alpha, max(2, top // 4 + 2), top // 2 + 2)


class CoeffNorm:
    """c -> ||sum c_m z^m||_{p,alpha} via a fixed quadrature rule."""

    def __init__(self, basis: list, sp: SpaceParams, rule: QuadratureRule | None = None):
        self.basis = basis
        self.p = sp.p
        self.rule = rule or norm_rule(sp.n, sp.alpha, max(sum(m) for m in basis), sp.p)
        self.V = monomial_matrix(self.rule.nodes, basis)
        self.w = self.rule.weights

    def value(self, c: np.ndarray) -> float:
        return lp_norm_values(self.V @ c, self.p, self.w)

    def value_grad(self, c: np.ndarray) -> tuple[float, np.ndarray]:
        u = self.V @ c
        return self.values_grad(u)

    def values_grad(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Norm of the node values u and d/d(conj c) through u = V c."""
        val = lp_norm_values(u, self.p, self.w)
        if val == 0:
            return 0.0, np.zeros(self.V.shape[1], dtype=complex)
        a = np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(a > 0, (a / val) ** (self.p - 2), 0.0)
        g = 0.5 * self.V.conj().T @ (self.w * t * u) / val
        return val, g


def _pack(c: np.ndarray) -> np.ndarray:
    return np.concatenate([c.real, c.imag])


def _unpack(x: np.ndarray) -> np.ndarray:
    k = x.size // 2
    return x[:k] + 1j * x[k:]


def _random_start(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


# ---------------------------------------------------------------------------
# Operator norms


def _gram_sqrt(basis: list, alpha: float) -> np.ndarray:
    return np.sqrt(monomial_moments(np.array(basis), alpha))


def _svd_top(A: np.ndarray, din: np.ndarray, dout: np.ndarray) -> tuple[float, np.ndarray]:
    M = dout[:, None] * A / din[None, :]
    u, s, vh = np.linalg.svd(M)
    return float(s[0]), vh[0].conj() / din


def opnorm(T: TruncatedOperator, method: str = "auto", config: OptConfig | None = None, warm_start: Sequence[np.ndarray] = ()) -> NormEstimate:
    """sup ||T g||_codomain / ||g||_domain over the truncated domain.

    ``svd`` needs p = 2 on both sides and is exact. ``projected-ascent``
    maximizes log ||A c|| - log ||c|| with L-BFGS from the Gram-normalized
    singular vector plus ``config.restarts`` random starts; the iterate is
    renormalized to the unit sphere afterwards. For antilinear operators the
    search runs over conj(c), which has the same domain norm.
    """
    config = config or OptConfig()
    A = T.matrix
    dom, cod = T.domain, T.codomain
    if method == "auto":
        method = "svd" if dom.p == 2 and cod.p == 2 else "projected-ascent"
    if method not in ("svd", "projected-ascent"):
        raise ValueError(f"unknown opnorm method {method!r}")
    deg = T.degree_in
    zero = (Polynomial.zero(dom.n),)
    if not np.any(A):
        return NormEstimate(0.0, zero, method, deg, 0, config.seed, True)
    din = _gram_sqrt(T.basis_in, dom.alpha)
    dout = _gram_sqrt(T.basis_out, cod.alpha)
    s0, c0 = _svd_top(A, din, dout)

    def witness(c):
        return Polynomial.from_vector(np.conj(c) if T.antilinear else c, T.basis_in)

    if method == "svd":
        if not (dom.p == 2 and cod.p == 2):
            raise ValueError("svd method needs p = 2 on domain and codomain")
        c = c0 / math.sqrt(np.sum(np.abs(c0 * din) ** 2))
        val = math.sqrt(np.sum(np.abs((A @ c) * dout) ** 2))
        return NormEstimate(val, (witness(c),), "svd", deg, 0, config.seed, True, {"svd_value": s0})

    nin = CoeffNorm(T.basis_in, dom)
    nout = CoeffNorm(T.basis_out, cod)
    VA = nout.V @ A

    def obj_fixed(x):
        c = _unpack(x)
        a, ga = nin.value_grad(c)
        u = VA @ c
        b = lp_norm_values(u, nout.p, nout.w)
        if a == 0 or b == 0:
            return 0.0, np.zeros_like(x)
        ab = np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(ab > 0, (ab / b) ** (nout.p - 2), 0.0)
        gb = 0.5 * VA.conj().T @ (nout.w * t * u) / b
        return math.log(a) - math.log(b), 2 * _pack(ga / a - gb / b)

    rng = np.random.default_rng(config.seed)
    # antilinear: search over d = conj(c); the domain norm is unchanged
    warm = [np.asarray(c, dtype=complex) for c in warm_start]
    if T.antilinear:
        warm = [np.conj(c) for c in warm]
    starts = warm + [c0] + [_random_start(rng, A.shape[1]) for _ in range(config.restarts)]
    best, best_c, converged = -math.inf, None, False
    for c_init in starts:
        res = minimize(obj_fixed, _pack(c_init), jac=True, method="L-BFGS-B", options={"maxiter": config.max_iter, "ftol": config.tol, "gtol": 1e-10})
        c = _unpack(res.x)
        c = c / nin.value(c)
        val = nout.value(A @ c)
        converged |= bool(res.success)
        if val > best:
            best, best_c = val, c
    return NormEstimate(best, (witness(best_c),), "projected-ascent", deg, config.restarts, config.seed, converged, {"svd_l2_value": s0})


def evaluate_opnorm_witness(T: TruncatedOperator, est: NormEstimate) -> float:
    """Recompute ||T w|| / ||w|| at the stored witness."""
    g = est.witness[0]
    if g.is_zero():
        return 0.0
    c = g.to_vector(T.basis_in)
    nin = CoeffNorm(T.basis_in, T.domain)
    nout = CoeffNorm(T.basis_out, T.codomain)
    out = T.matrix @ (np.conj(c) if T.antilinear else c)
    return nout.value(out) / nin.value(c)


# ---------------------------------------------------------------------------
# Bilinear forms


def bilinear_norm(
    B: np.ndarray,
    n1: CoeffNorm,
    n2: CoeffNorm,
    config: OptConfig,
    init: Sequence[tuple[np.ndarray, np.ndarray]] = (),
) -> tuple[float, np.ndarray, np.ndarray, bool]:
    """sup |x^T B y| / (n1(x) n2(y)) by alternating block ascent, then a joint polish."""
    if not np.any(B):
        return 0.0, np.zeros(B.shape[0], complex), np.zeros(B.shape[1], complex), True

    def block(vec_lin, norm, x0):
        # maximize log|u^T x| - log N(x)
        def obj(xr):
            x = _unpack(xr)
            h = vec_lin @ x
            nv, ng = norm.value_grad(x)
            if h == 0 or nv == 0:
                return 0.0, np.zeros_like(xr)
            g = ng / nv - np.conj(vec_lin) / (2 * np.conj(h))
            return math.log(nv) - math.log(abs(h)), 2 * _pack(g)

        res = minimize(obj, _pack(x0), jac=True, method="L-BFGS-B", options={"maxiter": config.max_iter, "ftol": config.tol, "gtol": 1e-11})
        x = _unpack(res.x)
        return x / norm.value(x)

    def joint(x0, y0):
        k = x0.size

        def obj(v):
            c = _unpack(v)
            x, y = c[:k], c[k:]
            h = x @ B @ y
            a, ga = n1.value_grad(x)
            b, gb = n2.value_grad(y)
            if h == 0 or a == 0 or b == 0:
                return 0.0, np.zeros_like(v)
            gx = ga / a - np.conj(B @ y) / (2 * np.conj(h))
            gy = gb / b - np.conj(B.T @ x) / (2 * np.conj(h))
            return math.log(a) + math.log(b) - math.log(abs(h)), 2 * _pack(np.concatenate([gx, gy]))

        res = minimize(obj, _pack(np.concatenate([x0, y0])), jac=True, method="L-BFGS-B", options={"maxiter": 4 * config.max_iter, "ftol": config.tol, "gtol": 1e-12})
        c = _unpack(res.x)
        x, y = c[:k], c[k:]
        return x / n1.value(x), y / n2.value(y), bool(res.success)

    def value(x, y):
        return abs(x @ B @ y) / (n1.value(x) * n2.value(y))

    u, s, vh = np.linalg.svd(B)
    rng = np.random.default_rng(config.seed)
    starts = list(init) + [(np.conj(u[:, 0]), np.conj(vh[0]))]
    starts += [(_random_start(rng, B.shape[0]), _random_start(rng, B.shape[1])) for _ in range(config.restarts)]
    best = (-1.0, None, None)
    converged = False
    for x, y in starts:
        x = x / n1.value(x)
        y = y / n2.value(y)
        prev = value(x, y)
        for _ in range(config.sweeps):
            y = block(x @ B, n2, y)
            x = block(B @ y, n1, x)
            cur = value(x, y)
            if cur <= prev * (1 + 1e-12):
                prev = max(prev, cur)
                break
            prev = cur
        xj, yj, ok = joint(x, y)
        if value(xj, yj) >= value(x, y):
            x, y = xj, yj
        converged |= ok
        v = value(x, y)
        if v > best[0]:
            best = (v, x, y)
    return best[0], best[1], best[2], converged


def _dual_space_gram(basis, alpha):
    return monomial_moments(np.array(basis), alpha)


def hankel_form_norm(
    b: Polynomial,
    frame: HolderFrame,
    degree: int,
    config: OptConfig | None = None,
    warm_start: Sequence[tuple[Polynomial, Polynomial]] = (),
    method: str = "auto",
) -> NormEstimate:
    """sup |<f g, b>_alpha| over unit spheres of the truncated A^{p1}_{a1} x A^{p2}_{a2}.

    ``auto`` uses the SVD when p1 = p2 = 2 and alternating ascent otherwise.
    """
    if method not in ("auto", "svd", "alternating"):
        raise ValueError(f"unknown form-norm method {method!r}")
    config = config or OptConfig()
    n = b.n
    basis = graded_basis(n, degree)
    B = hankel_form_matrix(b, frame.pairing_alpha, basis, basis)
    if not np.any(B):
        return NormEstimate(0.0, (Polynomial.zero(n), Polynomial.zero(n)), "alternating", degree, 0, config.seed, True)
    n1 = CoeffNorm(basis, frame.space1)
    n2 = CoeffNorm(basis, frame.space2)
    init = [(f.to_vector(basis), g.to_vector(basis)) for f, g in warm_start]
    hilbert = frame.p1 == 2 and frame.p2 == 2
    if method == "svd" and not hilbert:
        raise ValueError("svd method needs p1 = p2 = 2")
    if hilbert and method != "alternating":
        d1 = _gram_sqrt(basis, frame.alpha1)
        d2 = _gram_sqrt(basis, frame.alpha2)
        u, s, vh = np.linalg.svd(B / d1[:, None] / d2[None, :])
        x, y = np.conj(u[:, 0]) / d1, np.conj(vh[0]) / d2
        x, y = x / n1.value(x), y / n2.value(y)
        return NormEstimate(abs(x @ B @ y), (Polynomial.from_vector(x, basis), Polynomial.from_vector(y, basis)), "svd", degree, 0, config.seed, True)
    val, x, y, ok = bilinear_norm(B, n1, n2, config, init)
    return NormEstimate(val, (Polynomial.from_vector(x, basis), Polynomial.from_vector(y, basis)), "alternating", degree, config.restarts, config.seed, ok)


def hankel_form_via_small_hankel(
    b: Polynomial, frame: HolderFrame, degree: int, config: OptConfig | None = None
) -> NormEstimate:
    """Same supremum assembled from S_b: T_b(f, g) = <g, S_b f>_alpha.

    The matrix is diag(||z^m||^2) conj(S) with S the small Hankel matrix,
    so this is an independent assembly of the form.
    """
    config = config or OptConfig()
    n = b.n
    basis = graded_basis(n, degree)
    T = small_hankel_matrix(b, frame.pairing_alpha, degree, degree, frame.space1, frame.space2)
    G = monomial_moments(np.array(basis), frame.pairing_alpha)
    Bt = (G[:, None] * np.conj(T.matrix)).T  # rows index f, columns index g
    n1 = CoeffNorm(basis, frame.space1)
    n2 = CoeffNorm(basis, frame.space2)
    val, x, y, ok = bilinear_norm(Bt, n1, n2, config)
    return NormEstimate(val, (Polynomial.from_vector(x, basis), Polynomial.from_vector(y, basis)), "alternating", degree, config.restarts, config.seed, ok, {"route": "small-hankel"})


def evaluate_form_witness(b: Polynomial, frame: HolderFrame, est: NormEstimate) -> float:
    from .operators import hankel_form_value

    f, g = est.witness
    if f.is_zero() or g.is_zero():
        return 0.0
    basis = graded_basis(b.n, est.degree)
    n1 = CoeffNorm(basis, frame.space1)
    n2 = CoeffNorm(basis, frame.space2)
    return abs(hankel_form_value(b, f, g, frame.pairing_alpha)) / (n1.value(f.to_vector(basis)) * n2.value(g.to_vector(basis)))


def dual_norm(f: Polynomial, sp: SpaceParams, pairing_alpha: float, degree: int, config: OptConfig | None = None) -> NormEstimate:
    """sup |<h, f>_alpha| / ||h||_{sp} over polynomials h of degree <= degree."""
    config = config or OptConfig()
    basis = graded_basis(f.n, degree)
    u = np.conj(f.to_vector(basis)) * monomial_moments(np.array(basis), pairing_alpha)
    if not np.any(u):
        return NormEstimate(0.0, (Polynomial.zero(f.n),), "svd", degree, 0, config.seed, True)
    nh = CoeffNorm(basis, sp)
    if sp.p == 2:
        d = monomial_moments(np.array(basis), sp.alpha)
        h = np.conj(u) / d
        h = h / nh.value(h)
        return NormEstimate(abs(u @ h), (Polynomial.from_vector(h, basis),), "svd", degree, 0, config.seed, True)
    one = CoeffNorm([(0,) * f.n], SpaceParams(2, 0.0, f.n))
    val, _, h, ok = bilinear_norm(u[None, :], one, nh, OptConfig(restarts=config.restarts, seed=config.seed, max_iter=config.max_iter, sweeps=2))
    return NormEstimate(val, (Polynomial.from_vector(h, basis),), "projected-ascent", degree, config.restarts, config.seed, ok)


# ---------------------------------------------------------------------------
# Weak-factorization upper bounds


def poly_norm(f: Polynomial, sp: SpaceParams, degree: int | None = None) -> float:
    """||f||_{p,alpha} by a rule exact for even p at the given (or natural) degree."""
    if f.is_zero():
        return 0.0
    d = degree if degree is not None else max(f.degree, 1)
    basis = graded_basis(f.n, d)
    return CoeffNorm(basis, sp).value(f.to_vector(basis))


def _pair_costs(pairs, frame: HolderFrame) -> list[float]:
    if not pairs:
        return []
    n = pairs[0][0].n
    basis = graded_basis(n, max(max(a.degree, b.degree) for a, b in pairs) or 1)
    n1 = CoeffNorm(basis, frame.space1)
    n2 = CoeffNorm(basis, frame.space2)
    return [n1.value(a.to_vector(basis)) * n2.value(b.to_vector(basis)) for a, b in pairs]


def certificate_cost(pairs, frame: HolderFrame) -> float:
    return float(sum(_pair_costs(pairs, frame)))


def oplus_norm_upper(
    f: Polynomial,
    frame: HolderFrame,
    K: int,
    degree: int,
    config: OptConfig | None = None,
    seed_certificate: FactorizationCertificate | None = None,
) -> FactorizationCertificate:
    """Upper bound for the product-space norm of f from K pairs of degree <= degree.

    Minimizes sum ||phi_k|| ||psi_k|| + mu ||f - sum phi_k psi_k||_{q,beta}
    for increasing mu, then absorbs the exact polynomial residual e into a
    pair (e, 1) or (1, e), whichever is cheaper. With a seed certificate the
    K costliest seed pairs start the search and the seed itself is returned
    when it is cheaper.
    """
    config = config or OptConfig()
    if K < 1:
        raise ValueError("K must be >= 1")
    n = f.n
    if f.is_zero():
        return FactorizationCertificate([], 0.0, 0.0, frame, 0.0, {"method": "alternating"})
    basis = graded_basis(n, degree)
    B = len(basis)
    n1 = CoeffNorm(basis, frame.space1)
    n2 = CoeffNorm(basis, frame.space2)
    dq = max(2 * degree, f.degree)
    rq = norm_rule(n, frame.beta, dq, frame.q)
    Vq = monomial_matrix(rq.nodes, basis)
    fq = f(rq.nodes)
    nq_p, wq = frame.q, rq.weights

    rng = np.random.default_rng(config.seed)
    X = np.zeros((K, B), dtype=complex)
    Y = np.zeros((K, B), dtype=complex)
    if seed_certificate is not None and seed_certificate.pairs:
        costs = seed_certificate.meta.get("pair_costs")
        if costs is None or len(costs) != len(seed_certificate.pairs):
            costs = _pair_costs(seed_certificate.pairs, frame)
        order = np.argsort(costs)[::-1][:K]
        for i, j in enumerate(order):
            a, b = seed_certificate.pairs[j]
            X[i] = a.truncate(degree).to_vector(basis)
            Y[i] = b.truncate(degree).to_vector(basis)
    else:
        X[0] = f.truncate(degree).to_vector(basis)
        Y[0, 0] = 1.0
    for i in range(K):
        if not np.any(X[i]):
            X[i] = 1e-3 * _random_start(rng, B)
            Y[i] = 1e-3 * _random_start(rng, B)

    def objective(v, mu):
        c = _unpack(v).reshape(2, K, B)
        xs, ys = c[0], c[1]
        total = 0.0
        gx = np.zeros_like(xs)
        gy = np.zeros_like(ys)
        ux = Vq @ xs.T  # (N, K) node values
        uy = Vq @ ys.T
        for k in range(K):
            a, ga = n1.value_grad(xs[k])
            b, gb = n2.value_grad(ys[k])
            total += a * b
            gx[k] += b * ga
            gy[k] += a * gb
        e = fq - np.sum(ux * uy, axis=1)
        en = lp_norm_values(e, nq_p, wq)
        if en > 0:
            ae = np.abs(e)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(ae > 0, (ae / en) ** (nq_p - 2), 0.0)
            ge = 0.5 * wq * t * e / en  # d en / d conj(e)
            gx -= mu * (Vq.conj().T @ (np.conj(uy) * ge[:, None])).T
            gy -= mu * (Vq.conj().T @ (np.conj(ux) * ge[:, None])).T
        total += mu * en
        return total, 2 * _pack(np.concatenate([gx, gy]).ravel())

    v = _pack(np.concatenate([X, Y]).ravel())
    stagnated = False
    for mu in config.penalties:
        start = objective(v, mu)[0]
        res = minimize(objective, v, args=(mu,), jac=True, method="L-BFGS-B", options={"maxiter": config.max_iter, "ftol": 1e-12})
        if res.fun < start:
            v = res.x
        else:
            stagnated = True
    c = _unpack(v).reshape(2, K, B)
    pairs = [(Polynomial.from_vector(c[0, k], basis), Polynomial.from_vector(c[1, k], basis)) for k in range(K)]
    pairs = [(a, b) for a, b in pairs if not (a.is_zero() or b.is_zero())]

    total = Polynomial.zero(n)
    for a, b in pairs:
        total = total + multiply(a, b)
    e = f - total
    one = Polynomial.constant(n, 1.0)
    if not e.is_zero():
        ca = poly_norm(e, frame.space1)
        cb = poly_norm(e, frame.space2)
        pairs.append((e, one) if ca * poly_norm(one, frame.space2) <= poly_norm(one, frame.space1) * cb else (one, e))
    cost = certificate_cost(pairs, frame)
    total = Polynomial.zero(n)
    for a, b in pairs:
        total = total + multiply(a, b)
    resid = poly_norm(f - total, frame.product_space, max(dq, 1))
    f_norm = poly_norm(f, frame.product_space)
    cert = FactorizationCertificate(pairs, cost, resid, frame, f_norm, {"method": "alternating", "K": K, "degree": degree, "stagnated": stagnated})
    if seed_certificate is not None and seed_certificate.cost < cost:
        meta = dict(seed_certificate.meta)
        meta.update({"method": "seed", "optimized_cost": cost, "stagnated": stagnated})
        return FactorizationCertificate(seed_certificate.pairs, seed_certificate.cost, seed_certificate.residual, frame, seed_certificate.f_norm, meta)
    if seed_certificate is not None:
        cert.meta["seed_cost"] = seed_certificate.cost
    return cert


# ---------------------------------------------------------------------------
# Multiplication operators on the Bloch space


@dataclass(frozen=True)
class BlochNet:
    """Test functions for sup ||f g|| / ||g||_B: truncated log kernels and monomials."""

    functions: tuple[Polynomial, ...]
    bloch_norms: tuple[float, ...]
    labels: tuple[str, ...]


def bloch_net(n: int = 1, radii=(0.0, 0.3, 0.6, 0.8, 0.9, 0.95), phases: int = 4, monomials: int = 8, degree: int = 40, grid: BlochGrid | None = None) -> BlochNet:
    grid = grid or BlochGrid(rays=32, radial=48, golden_iters=40)
    funcs, labels = [], []
    for r in radii:
        for j in range(phases if r > 0 else 1):
            z = np.zeros(n, dtype=complex)
            z[0] = r * np.exp(2j * np.pi * j / phases)
            funcs.append(kernel_symbol(z, 0.0, degree, log_variant=True))
            labels.append(f"log-kernel r={r:g} k={j}")
    for k in range(monomials + 1):
        m = [0] * n
        m[0] = k
        funcs.append(Polynomial.monomial(m))
        labels.append(f"z1^{k}")
    norms = tuple(bloch_norm(g, grid) for g in funcs)
    return BlochNet(tuple(funcs), norms, tuple(labels))


def multiplier_norm(f: Polynomial, p: float, alpha: float, net: BlochNet) -> NormEstimate:
    """max over the net of ||f g||_{p,alpha} / ||g||_B."""
    best, arg = 0.0, 0
    sp = SpaceParams(p, alpha, f.n)
    for i, (g, bn) in enumerate(zip(net.functions, net.bloch_norms)):
        if bn == 0:
            continue
        v = poly_norm(multiply(f, g), sp) / bn
        if v > best:
            best, arg = v, i
    return NormEstimate(best, (net.functions[arg],), "net", max(g.degree for g in net.functions), 0, None, True, {"label": net.labels[arg]})


def h_operator_norm(f: Polynomial, p1: float, alpha: float, degree: int, config: OptConfig | None = None, codomain_p: float = 1.0) -> NormEstimate:
    """||h_{conj f}|| : A^{p1}_alpha -> conj(A^{codomain_p}_alpha) on the truncation."""
    n = f.n
    T = small_hankel_matrix(f, alpha, degree, max(f.degree, 0), SpaceParams(p1, alpha, n), SpaceParams(codomain_p, alpha, n))
    return opnorm(T, "auto", config)


# ---------------------------------------------------------------------------
# Sweeps


@dataclass
class SweepRow:
    symbol: str
    parameter: float
    degree: int
    estimate: float
    reference: float
    ratio: float
    converged: bool


@dataclass
class SweepReport:
    scenario: str
    rows: list[SweepRow]
    violations: int = 0

    @property
    def ratio_spread(self) -> float:
        rs = [r.ratio for r in self.rows if math.isfinite(r.ratio) and r.ratio > 0]
        return max(rs) / min(rs) if rs else math.nan


def ratio_sweep(
    scenario: str,
    family: Sequence[tuple[str, float, Callable[[int], Polynomial]]],
    frame: HolderFrame,
    degrees: Sequence[int],
    config: OptConfig | None = None,
) -> SweepReport:
    """Per symbol and degree: estimated norm, reference norm, ratio.

    ``family`` holds (label, parameter, symbol_at_degree) where the callable
    returns the symbol truncation visible at a given degree.

    hankel: ||T_b|| against ||b||_{q',beta'}; Holder violations counted.
    small-hankel: ||S_f||: A^{p1}_{a1} -> A^{p2}_{a2} against ||f||_{q,beta}
    with 1/q = 1/p2 - 1/p1.
    duality: sup |<h, f>| / ||h||_{q,beta} against ||f||_{q',beta'}.
    """
    from .measure import small_hankel_exponents

    config = config or OptConfig()
    rows: list[SweepRow] = []
    violations = 0
    for label, param, sym in family:
        warm: list = []
        for d in degrees:
            if scenario == "hankel":
                b = sym(2 * d)
                est = hankel_form_norm(b, frame, d, config, warm_start=warm)
                warm = [est.witness] if est.value > 0 else []
                ref = poly_norm(b, frame.dual_space, max(2 * d, 1))
                if est.value > frame.hankel_constant() * ref * (1 + 1e-9):
                    violations += 1
            elif scenario == "small-hankel":
                f = sym(d)
                q, beta = small_hankel_exponents(frame.p1, frame.alpha1, frame.p2, frame.alpha2)
                T = small_hankel_matrix(f, frame.pairing_alpha, d, max(f.degree, 0), frame.space1, frame.space2)
                est = opnorm(T, "auto", config, warm_start=[w.to_vector(T.basis_in) for w in warm])
                warm = list(est.witness) if est.value > 0 else []
                ref = poly_norm(f, SpaceParams(q, beta, f.n))
            elif scenario == "duality":
                f = sym(d)
                est = dual_norm(f, frame.product_space, frame.pairing_alpha, d, config)
                ref = poly_norm(f, frame.dual_space)
                if est.value > frame.duality_constant() * ref * (1 + 1e-9):
                    violations += 1
            else:
                raise ValueError(f"unknown sweep scenario {scenario!r}")
            ratio = est.value / ref if ref > 0 and est.value > 0 else math.nan
            rows.append(SweepRow(label, param, d, est.value, ref, ratio, est.converged))
    return SweepReport(scenario, rows, violations)


def tm4_rows(symbols: Sequence[tuple[str, Polynomial]], p1: float, alpha: float, degree: int, net: BlochNet | None = None, config: OptConfig | None = None):
    """Per symbol: h-norm into conj(A^1_alpha), multiplier-norm estimate, ratio, log-weight diagnostics."""
    net = net or bloch_net(symbols[0][1].n)
    p1p = p1 / (p1 - 1)
    out = []
    for label, f in symbols:
        h = h_operator_norm(f, p1, alpha, degree, config)
        m = multiplier_norm(f, p1p, alpha, net)
        diag = log_weight_diagnostics(f, p1p, alpha)
        ratio = h.value / m.value if m.value > 0 and h.value > 0 else math.nan
        out.append({"symbol": label, "h_norm": h.value, "mult_norm": m.value, "ratio": ratio, "converged": h.converged,
                    "blz": diag.blz_norm, "cor1": diag.cor1_sup, "cor2": diag.cor2_integral, "net_witness": m.meta["label"]})
    return out

"""Polynomials in n complex variables and the analysis built on them.

A :class:`Polynomial` is a finitely supported map from multi-indices to
complex coefficients. Inner products against dv_alpha are computed
exactly from monomial moments; everything that needs pointwise values
(L^p norms with p != 2, Bloch suprema) goes through vectorized
evaluation on arrays of points with shape ``(N, n)``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from . import geometry
from .measure import QuadratureRule, graded_rule, log_monomial_norm2, monomial_moments

MultiIndex = tuple[int, ...]


def graded_basis(n: int, degree: int) -> list[MultiIndex]:
    """Multi-indices of total degree <= ``degree`` in graded lexicographic order.

    Degree ascending; within a degree, z1 outranks z2 outranks ... .
    """
    out: list[MultiIndex] = []
    for d in range(degree + 1):
        block = [m for m in itertools.product(range(d + 1), repeat=n) if sum(m) == d]
        block.sort(reverse=True)
        out.extend(block)
    return out


def _canonical(terms: Mapping[MultiIndex, complex], tol: float = 0.0) -> dict[MultiIndex, complex]:
    return {tuple(int(e) for e in m): complex(c) for m, c in terms.items() if abs(c) > tol}


@dataclass(frozen=True, eq=False)
class Polynomial:
    """sum_m c_m z^m with no stored zero coefficients."""

    n: int
    terms: Mapping[MultiIndex, complex]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        clean = _canonical(self.terms)
        for m in clean:
            if len(m) != self.n or min(m) < 0:
                raise ValueError(f"bad multi-index {m} for n={self.n}")
        object.__setattr__(self, "terms", clean)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, c: complex) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, m: Iterable[int], c: complex = 1.0) -> "Polynomial":
        m = tuple(m)
        return cls(len(m), {m: c})

    @classmethod
    def from_vector(cls, coeffs: np.ndarray, basis: list[MultiIndex]) -> "Polynomial":
        n = len(basis[0])
        return cls(n, {m: c for m, c in zip(basis, np.asarray(coeffs)) if c != 0})

    @classmethod
    def from_univariate(cls, coeffs) -> "Polynomial":
        return cls(1, {(k,): c for k, c in enumerate(np.asarray(coeffs)) if c != 0})

    # -- structure ----------------------------------------------------------
    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, m: MultiIndex) -> complex:
        return self.terms.get(tuple(m), 0j)

    def to_vector(self, basis: list[MultiIndex]) -> np.ndarray:
        return np.array([self.terms.get(m, 0j) for m in basis], dtype=complex)

    @cached_property
    def dense(self) -> np.ndarray:
        """Coefficient array of shape (d+1,)*n indexed by exponents."""
        d = max(self.degree, 0)
        arr = np.zeros((d + 1,) * self.n, dtype=complex)
        for m, c in self.terms.items():
            arr[m] = c
        return arr

    @classmethod
    def from_dense(cls, arr: np.ndarray) -> "Polynomial":
        idx = np.argwhere(arr != 0)
        return cls(arr.ndim, {tuple(int(i) for i in row): arr[tuple(row)] for row in idx})

    def truncate(self, degree: int) -> "Polynomial":
        return Polynomial(self.n, {m: c for m, c in self.terms.items() if sum(m) <= degree})

    def conj_coeffs(self) -> "Polynomial":
        """The polynomial z -> conj(f(conj z))."""
        return Polynomial(self.n, {m: np.conj(c) for m, c in self.terms.items()})

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.n, other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0j) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return multiply(self, other)
        return Polynomial(self.n, {m: c * other for m, c in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.coeff(m) - other.coeff(m)) <= atol for m in keys)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        z = np.atleast_2d(z)
        if z.shape[-1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}, got {z.shape[-1]}")
        out = evaluate_dense(self.dense, z) if self.terms else np.zeros(z.shape[0], dtype=complex)
        return out[0] if single else out

    def __repr__(self):
        return f"Polynomial(n={self.n}, {format_polynomial(self)!r})"


_EINSUM_LETTERS = "abcdefgh"


def evaluate_dense(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate a dense coefficient array at points z of shape (N, n)."""
    n = coeffs.ndim
    d = coeffs.shape[0] - 1
    powers = [z[:, i, None] ** np.arange(d + 1)[None, :] for i in range(n)]
    if n == 1:
        return powers[0] @ coeffs
    letters = _EINSUM_LETTERS[:n]
    spec = ",".join(f"N{c}" for c in letters) + "," + letters + "->N"
    return np.einsum(spec, *powers, coeffs, optimize=True)


def multiply(f: Polynomial, g: Polynomial) -> Polynomial:
    f._check(g)
    if f.is_zero() or g.is_zero():
        return Polynomial.zero(f.n)
    if f.n == 1:
        return Polynomial.from_univariate(np.convolve(f.dense, g.dense))
    out: dict[MultiIndex, complex] = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            key = tuple(a + b for a, b in zip(m1, m2))
            out[key] = out.get(key, 0j) + c1 * c2
    return Polynomial(f.n, out)


# ---------------------------------------------------------------------------
# Inner products and norms


def monomial_norms2(poly: Polynomial, alpha: float) -> tuple[list[MultiIndex], np.ndarray, np.ndarray]:
    keys = list(poly.terms)
    if not keys:
        return keys, np.zeros(0, dtype=complex), np.zeros(0)
    coeffs = np.array([poly.terms[m] for m in keys])
    return keys, coeffs, monomial_moments(np.array(keys), alpha)


def pairing_alpha(f: Polynomial, g: Polynomial, alpha: float) -> complex:
    """<f, g>_alpha = int f conj(g) dv_alpha, exact via monomial orthogonality."""
    f._check(g)
    common = [m for m in f.terms if m in g.terms]
    if not common:
        return 0j
    fc = np.array([f.terms[m] for m in common])
    gc = np.array([g.terms[m] for m in common])
    return complex(np.sum(fc * np.conj(gc) * monomial_moments(np.array(common), alpha)))


def l2_norm(f: Polynomial, alpha: float) -> float:
    return math.sqrt(max(pairing_alpha(f, f, alpha).real, 0.0))


# ---------------------------------------------------------------------------
# Derivatives


def partial(f: Polynomial, i: int) -> Polynomial:
    out = {}
    for m, c in f.terms.items():
        if m[i] > 0:
            mm = list(m)
            mm[i] -= 1
            out[tuple(mm)] = c * m[i]
    return Polynomial(f.n, out)


def radial_derivative(f: Polynomial) -> Polynomial:
    """Rf = sum_k z_k df/dz_k; acts on z^m by the factor |m|."""
    return Polynomial(f.n, {m: c * sum(m) for m, c in f.terms.items()})


def gradient_at(f: Polynomial, z: np.ndarray) -> np.ndarray:
    """Holomorphic gradient (df/dz_1, ..., df/dz_n) at points z of shape (N, n)."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    return np.stack([partial(f, i)(z) for i in range(f.n)], axis=-1)


def invariant_gradient_norm(f: Polynomial, z) -> float | np.ndarray:
    """|grad(f o phi_z)(0)|, by the chain rule through the Mobius Jacobian at 0."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    grads = gradient_at(f, z)
    out = np.empty(z.shape[0])
    for k in range(z.shape[0]):
        jac = geometry.mobius_jacobian_at_zero(z[k])
        out[k] = np.linalg.norm(grads[k] @ jac)
    return float(out[0]) if single else out


def invariant_gradient_norm_fast(f: Polynomial, z: np.ndarray) -> np.ndarray:
    """Vectorized |grad f(z) J_z| using J_z = -(1-|z|^2) P_z - sqrt(1-|z|^2) Q_z."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    g = gradient_at(f, z)
    r2 = np.sum(np.abs(z) ** 2, axis=1)
    # row vector g times P_z is (g . z) conj(z)/|z|^2
    gz = np.sum(g * z, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        gp = np.where(r2[:, None] > 0, (gz / np.where(r2 > 0, r2, 1.0))[:, None] * np.conj(z), 0.0)
    gq = g - gp
    v = -(1 - r2)[:, None] * gp - np.sqrt(1 - r2)[:, None] * gq
    return np.linalg.norm(v, axis=1)


# ---------------------------------------------------------------------------
# Bloch norm


@dataclass(frozen=True)
class BlochGrid:
    """Search grid for suprema of radial profiles over the ball.

    n=1: ``rays`` equispaced directions. n>=2: squared moduli on a simplex
    lattice with ``sphere_moduli`` subdivisions times ``phases`` equispaced
    phases per coordinate. Along each ray, ``radial`` coarse radii are
    scanned and the best bracket is refined by ``golden_iters`` golden-section
    steps; the ``polish`` best rays are then improved by a local Nelder-Mead
    search in the whole ball. :meth:`refined` doubles every resolution and
    keeps the old grid as a subset.
    """

    rays: int = 64
    radial: int = 64
    golden_iters: int = 60
    sphere_moduli: int = 8
    phases: int = 8
    polish: int = 6

    def refined(self) -> "BlochGrid":
        return BlochGrid(2 * self.rays, 2 * self.radial, self.golden_iters, 2 * self.sphere_moduli, 2 * self.phases, self.polish)


def _sphere_directions(n: int, grid: BlochGrid) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * np.arange(grid.rays) / grid.rays)[:, None]
    k = grid.sphere_moduli
    simplex = np.array([m for m in itertools.product(range(k + 1), repeat=n) if sum(m) == k], dtype=float) / k
    th = 2 * np.pi * np.arange(grid.phases) / grid.phases
    phases = np.array(list(itertools.product(th, repeat=n)))
    pts = np.sqrt(simplex)[:, None, :] * np.exp(1j * phases)[None, :, :]
    return pts.reshape(-1, n)


_INVPHI = (math.sqrt(5) - 1) / 2


def _ray_sup(fun, directions: np.ndarray, grid: BlochGrid) -> tuple[float, np.ndarray]:
    """Max over rays of fun(r * zeta), r in [0, 1): coarse scan, then golden section."""
    m = grid.radial
    radii = np.arange(m + 1) / (m + 1)
    pts = radii[None, :, None] * directions[:, None, :]
    vals = fun(pts.reshape(-1, directions.shape[1])).reshape(directions.shape[0], -1)
    best = np.argmax(vals, axis=1)
    lo = radii[np.maximum(best - 1, 0)]
    hi = np.where(best < m, radii[np.minimum(best + 1, m)], 1.0 - 1e-9)

    def at(r):
        return fun(r[:, None] * directions)

    for _ in range(grid.golden_iters):
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        left = at(c) > at(d)
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    r_ref = 0.5 * (lo + hi)
    refined = at(r_ref)
    coarse = vals[np.arange(vals.shape[0]), best]
    use_ref = refined > coarse
    per_ray = np.where(use_ref, refined, coarse)
    r_ray = np.where(use_ref, r_ref, radii[best])
    k = int(np.argmax(per_ray))
    best_val, best_pt = float(per_ray[k]), r_ray[k] * directions[k]
    for j in np.argsort(-per_ray, kind="stable")[: grid.polish]:
        val, pt = _polish(fun, r_ray[j] * directions[j])
        if val > best_val:
            best_val, best_pt = val, pt
    return best_val, best_pt


def _ball_map(x: np.ndarray, n: int) -> np.ndarray:
    # R^{2n} onto the open ball: x -> tanh(|x|) x / |x|
    z = x[:n] + 1j * x[n:]
    t = np.linalg.norm(x)
    return z * (math.tanh(t) / t) if t > 0 else z


def _polish(fun, z0: np.ndarray) -> tuple[float, np.ndarray]:
    from scipy.optimize import minimize

    n = z0.shape[0]
    r = np.linalg.norm(z0)
    x0 = np.concatenate([z0.real, z0.imag]) * (math.atanh(min(r, 1 - 1e-12)) / r if r > 0 else 1.0)
    res = minimize(lambda x: -float(fun(_ball_map(x, n)[None, :])[0]), x0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * n})
    z = _ball_map(res.x, n)
    return float(fun(z[None, :])[0]), z


def bloch_seminorm(f: Polynomial, grid: BlochGrid | None = None) -> tuple[float, np.ndarray]:
    """(sup over the grid of (1-|z|^2)|Rf(z)|, maximizing point)."""
    grid = grid or BlochGrid()
    rf = radial_derivative(f)
    if rf.is_zero():
        return 0.0, np.zeros(f.n, dtype=complex)

    def fun(z):
        r2 = np.sum(np.abs(z) ** 2, axis=1)
        return (1 - r2) * np.abs(rf(z))

    return _ray_sup(fun, _sphere_directions(f.n, grid), grid)


def bloch_norm(f: Polynomial, grid: BlochGrid | None = None) -> float:
    """|f(0)| + sup (1-|z|^2)|Rf(z)|, a lower bound for the true Bloch norm."""
    return abs(f.coeff((0,) * f.n)) + bloch_seminorm(f, grid)[0]


# ---------------------------------------------------------------------------
# Log-weighted diagnostics


@dataclass(frozen=True)
class LogWeightDiagnostics:
    blz_norm: float  # || f log(2/(1-|z|)) ||_{p',alpha}
    cor1_sup: float  # sup (1-|z|^2)^{(n+1+alpha)/p'} |f| log(2/(1-|z|^2))
    cor2_integral: float  # int |f|^{p'} log(2/(1-|z|^2))^{p'/2} dv_alpha


def log_weight_diagnostics(
    f: Polynomial,
    p1_prime: float,
    alpha: float,
    rule: QuadratureRule | None = None,
    grid: BlochGrid | None = None,
) -> LogWeightDiagnostics:
    if not p1_prime > 1:
        raise ValueError(f"p1' must exceed 1, got {p1_prime}")
    n = f.n
    rule = rule or graded_rule(n, alpha, angular_order=64 if n == 1 else 16)
    if rule.alpha != alpha:
        raise ValueError("rule weight does not match alpha")
    if f.is_zero():
        return LogWeightDiagnostics(0.0, 0.0, 0.0)
    z = rule.nodes
    r2 = np.sum(np.abs(z) ** 2, axis=1)
    r = np.sqrt(r2)
    af = np.abs(f(z))
    log1 = np.log(2.0 / (1.0 - r))
    log2 = np.log(2.0 / (1.0 - r2))
    blz = float(np.sum(rule.weights * (af * log1) ** p1_prime) ** (1 / p1_prime))
    cor2 = float(np.sum(rule.weights * af**p1_prime * log2 ** (p1_prime / 2)))
    expo = (n + 1 + alpha) / p1_prime

    def fun(pts):
        s = np.sum(np.abs(pts) ** 2, axis=1)
        return (1 - s) ** expo * np.abs(f(pts)) * np.log(2.0 / (1.0 - s))

    cor1, _ = _ray_sup(fun, _sphere_directions(n, grid or BlochGrid()), grid or BlochGrid())
    return LogWeightDiagnostics(blz, float(cor1), cor2)


@dataclass(frozen=True)
class LBPRatio:
    numerator: float  # int |f - f(a)|^p / |1 - <a,z>|^b dv_sigma
    denominator: float  # int |grad~ f|^p / |1 - <a,z>|^b dv_sigma

    @property
    def ratio(self) -> float:
        return self.numerator / self.denominator if self.denominator > 0 else math.nan


def lbp_ratio(f: Polynomial, a, p: float, sigma: float, b: float, rule: QuadratureRule | None = None) -> LBPRatio:
    """Both sides of the oscillation-versus-invariant-gradient estimate at the point a."""
    n = f.n
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if not b > n + 1 + sigma:
        raise ValueError(f"need b > n + 1 + sigma, got b={b}, n + 1 + sigma={n + 1 + sigma}")
    a = geometry.as_point(a, n)
    rule = rule or graded_rule(n, sigma, angular_order=64 if n == 1 else 12)
    z = rule.nodes
    k = np.abs(1.0 - z @ np.conj(a)) ** (-b)
    fa = f(a[None, :])[0]
    num = float(np.sum(rule.weights * np.abs(f(z) - fa) ** p * k))
    den = float(np.sum(rule.weights * invariant_gradient_norm_fast(f, z) ** p * k))
    return LBPRatio(num, den)


# ---------------------------------------------------------------------------
# Text format:  terms "coeff*z1^a1*...*zn^an" joined by " + ", coeff as "(re+imi)"


def _format_complex(c: complex) -> str:
    return f"({c.real!r}{'+' if c.imag >= 0 or math.isnan(c.imag) else '-'}{abs(c.imag)!r}i)"


def format_polynomial(f: Polynomial) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for m in sorted(f.terms, key=lambda m: (sum(m), tuple(-e for e in m))):
        factors = [f"z{i + 1}^{e}" for i, e in enumerate(m) if e > 0]
        parts.append("*".join([_format_complex(f.terms[m])] + factors))
    return " + ".join(parts)


_NUM = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_COMPLEX_RE = re.compile(rf"^\(?\s*([-+]?\s*(?:{_NUM}|inf|nan))?\s*(?:([-+])\s*({_NUM}|inf|nan)?\s*[ij])?\s*\)?$")


def _parse_coeff(tok: str) -> complex:
    tok = tok.strip()
    if not tok:
        return 1.0 + 0j
    body = tok[1:-1] if tok.startswith("(") and tok.endswith(")") else tok
    body = body.replace(" ", "")
    if body in ("i", "+i", "j", "+j"):
        return 1j
    if body in ("-i", "-j"):
        return -1j
    m = re.fullmatch(rf"([-+]?(?:{_NUM}|inf|nan))?(?:([-+])((?:{_NUM}|inf|nan))?[ij])?", body)
    if m and (m.group(1) or m.group(2)):
        re_part = float(m.group(1)) if m.group(1) else 0.0
        im_part = 0.0
        if m.group(2):
            im_part = float(m.group(3)) if m.group(3) else 1.0
            if m.group(2) == "-":
                im_part = -im_part
        return complex(re_part, im_part)
    m = re.fullmatch(rf"([-+]?(?:{_NUM}|inf|nan))[ij]", body)
    if m:
        return complex(0.0, float(m.group(1)))
    raise ValueError(f"cannot parse coefficient {tok!r}")


def _split_terms(text: str) -> list[str]:
    terms, depth, start = [], 0, 0
    s = text.strip()
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            prev = s[:i].rstrip()
            if prev and prev[-1] not in "*^eE(":
                terms.append(s[start:i])
                start = i
    terms.append(s[start:])
    return [t.strip() for t in terms if t.strip() and t.strip() != "+"]


def parse_polynomial(text: str, n: int | None = None) -> Polynomial:
    """Inverse of :func:`format_polynomial`; also accepts ``z`` for ``z1``."""
    text = text.strip()
    if text in ("", "0"):
        if n is None:
            raise ValueError("dimension needed to parse the zero polynomial")
        return Polynomial.zero(n)
    parsed: list[tuple[complex, dict[int, int]]] = []
    max_var = 0
    for term in _split_terms(text):
        sign = 1.0
        if term[0] in "+-":
            sign = -1.0 if term[0] == "-" else 1.0
            term = term[1:].strip()
        coeff = 1.0 + 0j
        exps: dict[int, int] = {}
        for factor in _split_factors(term):
            fm = re.fullmatch(r"z(\d*)(?:\^(\d+))?", factor.replace(" ", ""))
            if fm:
                var = int(fm.group(1)) if fm.group(1) else 1
                exps[var] = exps.get(var, 0) + (int(fm.group(2)) if fm.group(2) else 1)
                max_var = max(max_var, var)
            else:
                coeff *= _parse_coeff(factor)
        parsed.append((sign * coeff, exps))
    n = n or max(max_var, 1)
    if max_var > n:
        raise ValueError(f"variable z{max_var} exceeds dimension {n}")
    out: dict[MultiIndex, complex] = {}
    for c, exps in parsed:
        m = tuple(exps.get(i + 1, 0) for i in range(n))
        out[m] = out.get(m, 0j) + c
    return Polynomial(n, out)


def _split_factors(term: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in term:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    out.append(cur.strip())
    return [f for f in out if f]


def random_polynomial(rng: np.random.Generator, n: int, degree: int, density: float = 1.0) -> Polynomial:
    """Random complex Gaussian coefficients on the graded basis up to ``degree``."""
    basis = graded_basis(n, degree)
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    if density < 1.0:
        c = c * (rng.random(len(basis)) < density)
    return Polynomial.from_vector(c, basis)


def monomial_l2_norm(m: MultiIndex, alpha: float) -> float:
    return math.exp(0.5 * log_monomial_norm2(m, alpha))


def monomial_matrix(z: np.ndarray, basis: list[MultiIndex]) -> np.ndarray:
    """V[i, j] = z_i^{basis[j]} for points z of shape (N, n)."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    ms = np.array(basis)
    d = int(ms.max()) if ms.size else 0
    out = np.ones((z.shape[0], len(basis)), dtype=complex)
    for i in range(z.shape[1]):
        pw = z[:, i, None] ** np.arange(d + 1)[None, :]
        out *= pw[:, ms[:, i]]
    return out

"""Bergman projections, R^{alpha,s}, Hankel forms and small Hankel operators.

All operators act exactly on (mixed) polynomials: orthogonality of the
monomials in L^2(dv_alpha) forces every action to be a ratio of monomial
norms, evaluated through log-Gamma differences.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import special

from .measure import SpaceParams, log_monomial_norm2
from .poly import MultiIndex, Polynomial, graded_basis

MixedIndex = tuple[MultiIndex, MultiIndex]


@dataclass(frozen=True, eq=False)
class MixedPolynomial:
    """sum c_{m,l} z^m conj(z)^l."""

    n: int
    terms: Mapping[MixedIndex, complex]

    def __post_init__(self):
        clean = {(tuple(m), tuple(l)): complex(c) for (m, l), c in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def product_with_conjugate(cls, f: Polynomial, g: Polynomial) -> "MixedPolynomial":
        """f * conj(g)."""
        f._check(g)
        out: dict[MixedIndex, complex] = {}
        for m, c in f.terms.items():
            for l, d in g.terms.items():
                out[(m, l)] = out.get((m, l), 0j) + c * np.conj(d)
        return cls(f.n, out)

    @classmethod
    def analytic(cls, f: Polynomial) -> "MixedPolynomial":
        zero = (0,) * f.n
        return cls(f.n, {(m, zero): c for m, c in f.terms.items()})

    @classmethod
    def antianalytic(cls, f: Polynomial) -> "MixedPolynomial":
        """conj(f)."""
        zero = (0,) * f.n
        return cls(f.n, {(zero, m): np.conj(c) for m, c in f.terms.items()})

    def conjugate(self) -> "MixedPolynomial":
        return MixedPolynomial(self.n, {(l, m): np.conj(c) for (m, l), c in self.terms.items()})

    def __add__(self, other: "MixedPolynomial") -> "MixedPolynomial":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0j) + c
        return MixedPolynomial(self.n, out)

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        zc = np.conj(z)
        out = np.zeros(z.shape[0], dtype=complex)
        for (m, l), c in self.terms.items():
            out += c * np.prod(z ** np.array(m), axis=1) * np.prod(zc ** np.array(l), axis=1)
        return out

    def analytic_part(self) -> Polynomial:
        """Terms with l = 0, as an analytic polynomial."""
        zero = (0,) * self.n
        return Polynomial(self.n, {m: c for (m, l), c in self.terms.items() if l == zero})

    def antianalytic_part(self) -> Polynomial:
        """g with conj(g) equal to the terms having m = 0."""
        zero = (0,) * self.n
        return Polynomial(self.n, {l: np.conj(c) for (m, l), c in self.terms.items() if m == zero})


def _projection_ratio(m: MultiIndex, l: MultiIndex, alpha: float) -> float | None:
    if any(a < b for a, b in zip(m, l)):
        return None
    k = tuple(a - b for a, b in zip(m, l))
    return math.exp(log_monomial_norm2(m, alpha) - log_monomial_norm2(k, alpha))


def bergman_project(alpha: float, u: MixedPolynomial | Polynomial) -> Polynomial:
    """P_alpha u.  P_alpha(z^m conj(z)^l) = (||z^m||^2/||z^{m-l}||^2) z^{m-l} if m >= l, else 0."""
    if isinstance(u, Polynomial):
        return u
    out: dict[MultiIndex, complex] = {}
    for (m, l), c in u.terms.items():
        ratio = _projection_ratio(m, l, alpha)
        if ratio is not None:
            k = tuple(a - b for a, b in zip(m, l))
            out[k] = out.get(k, 0j) + c * ratio
    return Polynomial(u.n, out)


def conjugate_project(alpha: float, u: MixedPolynomial) -> MixedPolynomial:
    """Q_alpha u = conj(P_alpha conj(u)), returned as a conjugate-analytic mixed polynomial."""
    return MixedPolynomial.antianalytic(bergman_project(alpha, u.conjugate()))


def radial_multipliers(alpha: float, s: float, basis: list[MultiIndex]) -> np.ndarray:
    """Eigenvalues d_m of R^{alpha,s} on z^m.

    d_m = (N)_{|m|}/m! * ||z^m||^2_{2,alpha} with N = n+1+alpha+s, i.e. the
    z^m conj(w)^m coefficient of (1-<z,w>)^{-N} times the monomial moment.
    """
    if not alpha > -1:
        raise ValueError(f"alpha must exceed -1, got {alpha}")
    if not s >= 0:
        raise ValueError(f"s must be nonnegative, got {s}")
    n = len(basis[0])
    big_n = n + 1 + alpha + s
    ms = np.array(basis)
    k = ms.sum(axis=1)
    logd = (
        special.gammaln(big_n + k)
        - special.gammaln(big_n)
        + special.gammaln(n + alpha + 1)
        - special.gammaln(n + k + alpha + 1)
    )
    return np.exp(logd)


def fractional_radial(alpha: float, s: float, f: Polynomial) -> Polynomial:
    """R^{alpha,s} f, diagonal on monomials."""
    if f.is_zero():
        return f
    keys = list(f.terms)
    d = radial_multipliers(alpha, s, keys)
    return Polynomial(f.n, {m: f.terms[m] * dm for m, dm in zip(keys, d)})


def hankel_form_value(b: Polynomial, f: Polynomial, g: Polynomial, alpha: float) -> complex:
    """T_b^alpha(f, g) = <f g, b>_alpha."""
    from .poly import pairing_alpha

    return pairing_alpha(f * g, b, alpha)


def small_hankel_apply(f_symbol: Polynomial, g: Polynomial, alpha: float) -> Polynomial:
    """S_f^alpha g = P_alpha(f conj(g)); conjugate-linear in g."""
    return bergman_project(alpha, MixedPolynomial.product_with_conjugate(f_symbol, g))


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Matrix of an operator between graded monomial truncations.

    Column j is the coefficient vector of the operator applied to the j-th
    monomial of ``basis_in``, expanded over ``basis_out``. With
    ``antilinear`` set (small Hankel operators) the image of g is
    ``matrix @ conj(coefficients of g)``.
    """

    matrix: np.ndarray
    basis_in: list[MultiIndex]
    basis_out: list[MultiIndex]
    domain: SpaceParams
    codomain: SpaceParams
    symbol: Polynomial | None = None
    pairing_alpha: float | None = None
    antilinear: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def degree_in(self) -> int:
        return max(sum(m) for m in self.basis_in)

    @property
    def degree_out(self) -> int:
        return max(sum(m) for m in self.basis_out)

    def apply(self, g: Polynomial) -> Polynomial:
        c = g.to_vector(self.basis_in)
        if self.antilinear:
            c = np.conj(c)
        return Polynomial.from_vector(self.matrix @ c, self.basis_out)

    def to_csv(self) -> str:
        """Nonzero entries as ``row,col,re,im`` lines under a header."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        rows, cols = np.nonzero(self.matrix)
        for r, c in zip(rows, cols):
            v = self.matrix[r, c]
            w.writerow([int(r), int(c), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


def small_hankel_matrix(
    f_symbol: Polynomial,
    alpha: float,
    degree_in: int,
    degree_out: int,
    domain: SpaceParams,
    codomain: SpaceParams,
) -> TruncatedOperator:
    """Matrix of g -> S_f^alpha g from polynomials of degree <= degree_in.

    S_f(z^b) = sum_a f_a (||z^a||^2/||z^{a-b}||^2) z^{a-b} over a >= b.
    """
    n = f_symbol.n
    basis_in = graded_basis(n, degree_in)
    basis_out = graded_basis(n, degree_out)
    row_of = {m: i for i, m in enumerate(basis_out)}
    mat = np.zeros((len(basis_out), len(basis_in)), dtype=complex)
    for j, b in enumerate(basis_in):
        for a, fa in f_symbol.terms.items():
            ratio = _projection_ratio(a, b, alpha)
            if ratio is None:
                continue
            k = tuple(x - y for x, y in zip(a, b))
            if k in row_of:
                mat[row_of[k], j] += fa * ratio
    return TruncatedOperator(
        matrix=mat,
        basis_in=basis_in,
        basis_out=basis_out,
        domain=domain,
        codomain=codomain,
        symbol=f_symbol,
        pairing_alpha=alpha,
        antilinear=True,
    )


def hankel_form_matrix(b: Polynomial, alpha: float, basis1: list[MultiIndex], basis2: list[MultiIndex]) -> np.ndarray:
    """B with T_b^alpha(f, g) = c_f^T B c_g; entries conj(b_{m+l}) ||z^{m+l}||^2."""
    from .measure import monomial_moments

    n = b.n
    out = np.zeros((len(basis1), len(basis2)), dtype=complex)
    if b.is_zero():
        return out
    for i, m in enumerate(basis1):
        keys = [tuple(x + y for x, y in zip(m, l)) for l in basis2]
        coeffs = np.array([np.conj(b.coeff(k)) for k in keys])
        nz = coeffs != 0
        if nz.any():
            out[i, nz] = coeffs[nz] * monomial_moments(np.array(keys)[nz].reshape(-1, n), alpha)
    return out


# ---------------------------------------------------------------------------
# Kernel symbols


def _kernel_log_coeffs(w: np.ndarray, exponent: float, basis: list[MultiIndex], log_variant: bool):
    ms = np.array(basis)
    k = ms.sum(axis=1)
    aw = np.abs(w)
    with np.errstate(divide="ignore"):
        logw = np.where(aw > 0, np.log(np.where(aw > 0, aw, 1.0)), -np.inf)
    with np.errstate(invalid="ignore"):
        powlog = np.where(ms > 0, ms * logw[None, :], 0.0).sum(axis=1)
    if log_variant:
        # log(2/(1-x)) = log 2 + sum_{k>=1} x^k / k;  x^k = sum_{|m|=k} k!/m! ...
        lead = special.gammaln(np.maximum(k, 1))  # (k-1)!
    else:
        lead = special.gammaln(exponent + k) - special.gammaln(exponent)
    logc = lead - special.gammaln(ms + 1).sum(axis=1) + powlog
    phase = np.prod(np.where(aw > 0, np.conj(w) / np.where(aw > 0, aw, 1.0), 1.0)[None, :] ** ms, axis=1)
    return logc, phase, k


def kernel_symbol(w, exponent: float, truncation_degree: int, log_variant: bool = False) -> Polynomial:
    """Taylor truncation of z -> (1 - <z, w>)^{-exponent}.

    With ``log_variant`` the function is z -> log(2 / (1 - <z, w>)) instead.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if np.sum(np.abs(w) ** 2) >= 1:
        raise ValueError(f"kernel centre must lie in the open ball, |w| = {np.linalg.norm(w):.6g}")
    if not log_variant and not exponent > 0:
        raise ValueError(f"kernel exponent must be positive, got {exponent}")
    n = w.size
    basis = graded_basis(n, truncation_degree)
    logc, phase, k = _kernel_log_coeffs(w, exponent, basis, log_variant)
    coeffs = np.exp(logc) * phase
    if log_variant:
        coeffs = np.where(k == 0, math.log(2.0), coeffs)
    return Polynomial.from_vector(coeffs, basis)


def kernel_tail_bound(w, exponent: float, truncation_degree: int, log_variant: bool = False) -> float:
    """Sup-norm bound on the ball for the discarded Taylor tail.

    The degree-k homogeneous part is bounded by |c_k| |w|^k since
    |<z, w>| <= |w|; the tail sum is taken explicitly over 4000 terms and
    closed with a geometric majorant.
    """
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(w, dtype=complex))))
    if r == 0:
        return 0.0
    k = np.arange(truncation_degree + 1, truncation_degree + 4001, dtype=float)
    if log_variant:
        logt = k * math.log(r) - np.log(k)
        ratio = r
    else:
        logt = special.gammaln(exponent + k) - special.gammaln(exponent) - special.gammaln(k + 1) + k * math.log(r)
        ratio = (exponent + k[-1]) / (k[-1] + 1) * r
    terms = np.exp(logt)
    rest = terms[-1] * ratio / (1 - ratio) if ratio < 1 else math.inf
    return float(terms.sum() + rest)


def kernel_value(z, w, exponent: float, log_variant: bool = False) -> np.ndarray:
    """Pointwise (1 - <z, w>)^{-exponent} (principal branch), or log(2/(1-<z,w>))."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    x = 1.0 - z @ np.conj(w)
    if log_variant:
        return np.log(2.0 / x)
    return x ** (-exponent)

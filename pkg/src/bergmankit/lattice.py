"""Bergman-metric lattices, atoms, atomic decomposition and weak factorization.

Neighbour searches use the fact that the pseudo-hyperbolic ball
{w : rho(z, w) < t} is a Euclidean ellipsoid centred at
z (1 - t^2) / (1 - t^2 |z|^2). Its largest semi-axis bounds a Euclidean ball
that a KD-tree can query, and exact distances are computed on the candidates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import special
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .geometry import BallError, random_ball_points, rho2_numerator
from .measure import (
    HolderFrame,
    QuadratureRule,
    SpaceParams,
    build_rule,
    graded_rule,
    lp_norm_values,
    normalization_constant,
)
from .poly import (
    Polynomial,
    format_polynomial,
    graded_basis,
    monomial_matrix,
    multiply,
    parse_polynomial,
)

MAX_POINTS = 200_000
STRATEGIES = ("radial-shell", "greedy")


class LatticeError(ValueError):
    """Invalid lattice request or infeasible construction."""


class AtomError(ValueError):
    """Atom exponents violating the decomposition hypotheses."""


class AnalysisError(RuntimeError):
    """The analysis iteration diverged."""


# ---------------------------------------------------------------------------
# Neighbour search


def _one_minus_rho2(z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """1 - rho(z, a)^2 for matched rows of z and a."""
    z2 = np.sum(np.abs(z) ** 2, axis=-1)
    a2 = np.sum(np.abs(a) ** 2, axis=-1)
    den = np.abs(1.0 - np.sum(z * np.conj(a), axis=-1)) ** 2
    return (1.0 - z2) * (1.0 - a2) / den


def _rho(z: np.ndarray, a: np.ndarray) -> np.ndarray:
    # the difference form is accurate for nearby points
    num = rho2_numerator(z, a)
    za = np.sum(z * np.conj(a), axis=-1)
    return np.sqrt(np.clip(num / np.abs(1.0 - za) ** 2, 0.0, 1.0 - 1e-16))


def _real_coords(z: np.ndarray) -> np.ndarray:
    return np.hstack([z.real, z.imag])


def _bounding_balls(z: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    z2 = np.sum(np.abs(z) ** 2, axis=-1)
    centre = z * ((1.0 - t * t) / (1.0 - t * t * z2))[:, None]
    if z.shape[1] == 1:
        radius = t * (1.0 - z2) / (1.0 - t * t * z2)
    else:
        radius = t * np.sqrt((1.0 - z2) / (1.0 - t * t * z2))
    return centre, radius


def _candidates(tree: cKDTree, z: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(owner, index) pairs of tree points inside the bounding ball of rho < t."""
    centre, radius = _bounding_balls(z, t)
    lists = tree.query_ball_point(_real_coords(centre), radius * (1 + 1e-9) + 1e-12)
    lens = np.fromiter((len(x) for x in lists), dtype=np.int64, count=len(lists))
    flat = np.fromiter(itertools.chain.from_iterable(lists), dtype=np.int64, count=int(lens.sum()))
    owner = np.repeat(np.arange(len(lists)), lens)
    return owner, flat


def _nearest(points: np.ndarray, tree: cKDTree, z: np.ndarray, r0: float, chunk: int = 20_000):
    """Exact Bergman-nearest point of ``points`` for each row of z."""
    m = z.shape[0]
    idx = np.full(m, -1, dtype=np.int64)
    rho = np.full(m, np.inf)
    todo = np.arange(m)
    radius = r0
    while todo.size and radius < 20.0:
        t = math.tanh(radius)
        still = []
        for s in range(0, todo.size, chunk):
            part = todo[s : s + chunk]
            owner, cand = _candidates(tree, z[part], t)
            if owner.size:
                d = _rho(z[part][owner], points[cand])
                order = np.lexsort((d, owner))
                first = order[np.r_[True, owner[order][1:] != owner[order][:-1]]]
                hit_owner = owner[first]
                ok = d[first] < t
                idx[part[hit_owner[ok]]] = cand[first[ok]]
                rho[part[hit_owner[ok]]] = d[first[ok]]
            done = np.zeros(part.size, dtype=bool)
            done[np.flatnonzero(rho[part] < t)] = True
            still.append(part[~done])
        todo = np.concatenate(still) if still else todo[:0]
        radius *= 2.0
    for i in todo:  # only reached for points absurdly far from the lattice
        d = _rho(np.broadcast_to(z[i], points.shape), points)
        idx[i] = int(np.argmin(d))
        rho[i] = d[idx[i]]
    return idx, np.arctanh(rho)


def _count_within(points: np.ndarray, tree: cKDTree, z: np.ndarray, radius: float, chunk: int = 5_000) -> np.ndarray:
    t = math.tanh(radius)
    if points.shape[1] == 1:
        # in one dimension the bounding disc is exactly the metric ball
        centre, rad = _bounding_balls(z, t)
        return np.asarray(tree.query_ball_point(_real_coords(centre), rad, return_length=True), dtype=np.int64)
    out = np.zeros(z.shape[0], dtype=np.int64)
    # split by candidate-pair count: 4r balls can hold thousands of points
    centre, rad = _bounding_balls(z, t)
    lens = np.asarray(tree.query_ball_point(_real_coords(centre), rad * (1 + 1e-9) + 1e-12, return_length=True))
    cuts = np.searchsorted(np.cumsum(lens), np.arange(1, lens.sum() // 2_000_000 + 1) * 2_000_000)
    bounds = np.unique(np.concatenate([[0], np.minimum(cuts + 1, z.shape[0]), np.arange(0, z.shape[0], chunk), [z.shape[0]]]))
    for s, e in zip(bounds[:-1], bounds[1:]):
        part = z[s:e]
        owner, cand = _candidates(tree, part, t)
        if owner.size:
            inside = _rho(part[owner], points[cand]) < t
            out[s:e] = np.bincount(owner, weights=inside, minlength=part.shape[0]).astype(np.int64)
    return out


# ---------------------------------------------------------------------------
# Lattices


@dataclass(frozen=True, eq=False)
class Lattice:
    """Finite piece of an r-lattice: points a_k covering the Euclidean rmax-ball."""

    points: np.ndarray
    r: float
    rmax: float
    n: int
    strategy: str = "radial-shell"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if pts.shape[1] != self.n:
            raise LatticeError(f"points have dimension {pts.shape[1]}, expected {self.n}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(_real_coords(self.points))

    def nearest(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Index of and Bergman distance to the nearest lattice point."""
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        return _nearest(self.points, self.tree, z, self.r)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "rmax": self.rmax,
            "strategy": self.strategy,
            "points": [[[c.real, c.imag] for c in row] for row in self.points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Lattice":
        pts = np.array([[complex(re, im) for re, im in row] for row in d["points"]], dtype=complex)
        return cls(pts.reshape(-1, d["n"]), float(d["r"]), float(d["rmax"]), int(d["n"]), d.get("strategy", "radial-shell"))


def _angular_step(rho: float, h: float) -> float:
    """Largest angle t with beta(rho, rho e^{it}) <= h on a circle of radius rho."""

    def gap(t):
        e = np.exp(1j * t)
        return math.atanh(abs(rho * (1 - e)) / abs(1 - rho * rho * e)) - h

    if gap(math.pi) <= 0:
        return math.pi
    return brentq(gap, 1e-14, math.pi)


def _disc_shells(h: float, rmax: float) -> np.ndarray:
    big = math.atanh(rmax)
    pts = [np.zeros(1, dtype=complex)]
    j = 1
    while True:
        radius = j * h
        rho = math.tanh(radius)
        m = math.ceil(2 * math.pi / _angular_step(rho, h))
        offset = 0.5 * (j % 2) * 2 * math.pi / m  # stagger alternate shells
        pts.append(rho * np.exp(1j * (offset + 2 * math.pi * np.arange(m) / m)))
        if sum(len(p) for p in pts) > MAX_POINTS:
            raise LatticeError(f"r={h} too small for rmax={rmax}: more than {MAX_POINTS} points")
        if radius >= big:
            break
        j += 1
    return np.concatenate(pts)[:, None]


def _sphere_points(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    g = rng.standard_normal((size, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g[:, :n] + 1j * g[:, n:]


def _farthest_point(pool: np.ndarray, threshold: float, start: int = 0) -> np.ndarray:
    """Greedy farthest-point selection until every pool point is within ``threshold``.

    Distances are only refreshed inside a radius-2*threshold neighbourhood of
    each new point, so farther points read as "far". Coverage and separation
    are unaffected since both only depend on distances below ``threshold``.
    """
    # track s = 1 - rho^2 to the selected set; large s means close
    tree = cKDTree(_real_coords(pool))
    t_upd = math.tanh(2 * threshold)
    s_best = np.zeros(pool.shape[0])
    s_thr = 1.0 - math.tanh(threshold) ** 2
    chosen = []
    k = start
    while True:
        chosen.append(k)
        if len(chosen) > MAX_POINTS:
            raise LatticeError(f"more than {MAX_POINTS} points required")
        _, near = _candidates(tree, pool[k : k + 1], t_upd)
        if near.size:
            np.maximum.at(s_best, near, _one_minus_rho2(pool[near], np.broadcast_to(pool[k], (near.size, pool.shape[1]))))
        k = int(np.argmin(s_best))
        if s_best[k] >= s_thr:
            break
    return pool[chosen]


def _shell_sphere(rng, n: int, rho: float, h: float) -> np.ndarray:
    size = 1024
    while True:
        pool = rho * _sphere_points(rng, n, size)
        chosen = _farthest_point(pool, h)
        if len(chosen) * 8 <= size:
            return chosen
        size = 16 * len(chosen)


def _hyperbolic_pool(rng, n: int, rmax: float, size: int) -> np.ndarray:
    # |z|^2 drawn from s^{n-1} (1-s)^{-(n+1)} on [0, rmax^2], the invariant measure
    s = np.linspace(0.0, rmax * rmax, 4097)
    dens = s ** (n - 1) * (1.0 - s) ** (-(n + 1))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(s))])
    u = rng.random(size) * cdf[-1]
    rad = np.sqrt(np.interp(u, cdf, s))
    pool = rad[:, None] * _sphere_points(rng, n, size)
    pool[0] = 0.0
    return pool


def generate_lattice(
    n: int,
    r: float,
    rmax: float,
    strategy: str = "radial-shell",
    seed: int = 0,
    pool_size: int | None = None,
) -> Lattice:
    """Separated r-lattice whose r-balls cover the Euclidean rmax-ball.

    ``radial-shell`` places shells at Bergman radii j*h. In one dimension the
    angular step is solved exactly and alternate shells are staggered
    (h = r). For n >= 2 each shell is packed greedily with h = 0.7 r.
    ``greedy`` runs farthest-point selection with threshold 0.8 r over a
    fine candidate pool. Separation is at least r/2 in every case.
    """
    if not r > 0:
        raise LatticeError(f"lattice radius must be positive, got {r}")
    if not 0 < rmax < 1:
        raise LatticeError(f"rmax must lie in (0, 1), got {rmax}")
    if strategy not in STRATEGIES:
        raise LatticeError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not 1 <= n <= 4:
        raise LatticeError(f"dimension must be in 1..4, got {n}")
    if math.atanh(rmax) < r:
        return Lattice(np.zeros((1, n), dtype=complex), r, rmax, n, strategy)
    rng = np.random.default_rng(seed)
    if strategy == "radial-shell":
        if n == 1:
            pts = _disc_shells(r, rmax)
        else:
            h = 0.7 * r
            big = math.atanh(rmax)
            shells = [np.zeros((1, n), dtype=complex)]
            j = 1
            while True:
                shells.append(_shell_sphere(rng, n, math.tanh(j * h), h))
                if sum(len(s) for s in shells) > MAX_POINTS:
                    raise LatticeError(f"r={r} too small for rmax={rmax}")
                if j * h >= big:
                    break
                j += 1
            pts = np.concatenate(shells)
    else:
        if n == 1:
            pool = _disc_shells(r / 4, min(math.tanh(math.atanh(rmax) + r / 4), 1 - 1e-12))
        else:
            pool = _hyperbolic_pool(rng, n, math.tanh(math.atanh(rmax) + r / 4), pool_size or 40_000 * n)
        pts = _farthest_point(pool, 0.8 * r)
    return Lattice(pts, r, rmax, n, strategy)


@dataclass(frozen=True)
class LatticeReport:
    covering_gap: float
    uncovered: int
    min_separation: float
    overlap_N: int
    point_count: int
    sample_count: int
    seed: int

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        if not math.isfinite(d["min_separation"]):
            d["min_separation"] = None
        return d


def min_separation(lattice: Lattice) -> float:
    """Exact minimum pairwise Bergman distance (inf for a single point)."""
    pts = lattice.points
    if len(pts) < 2:
        return math.inf
    owner, cand = _candidates(lattice.tree, pts, math.tanh(lattice.r))
    keep = owner != cand
    if np.any(keep):
        d = _rho(pts[owner[keep]], pts[cand[keep]])
        if d.min() < math.tanh(lattice.r):
            return float(np.arctanh(d.min()))
    best = 1.0
    for i in range(len(pts) - 1):
        best = min(best, float(_rho(np.broadcast_to(pts[i], pts[i + 1 :].shape), pts[i + 1 :]).min()))
    return float(np.arctanh(best))


def verify_lattice(lattice: Lattice, sample_count: int = 100_000, seed: int = 0) -> LatticeReport:
    """Monte Carlo covering check over the rmax-ball plus exact separation."""
    if sample_count < 10_000:
        raise LatticeError(f"sample_count must be >= 1e4, got {sample_count}")
    rng = np.random.default_rng(seed)
    z = random_ball_points(rng, lattice.n, sample_count, lattice.rmax)
    _, dist = lattice.nearest(z)
    overlap = _count_within(lattice.points, lattice.tree, z, 4 * lattice.r)
    return LatticeReport(
        covering_gap=float(dist.max()),
        uncovered=int(np.sum(dist >= lattice.r)),
        min_separation=min_separation(lattice),
        overlap_N=int(overlap.max()),
        point_count=len(lattice),
        sample_count=sample_count,
        seed=seed,
    )


def volume_ratio(z, r: float, alpha: float, sample_count: int = 20_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo v_alpha(D(z, r)) / (1 - |z|^2)^{n+1+alpha} and its standard error.

    Pulling back through phi_z turns the metric ball into the Euclidean ball
    of radius tanh r, with density (1-|u|^2)^alpha / |1 - <u, z>|^{2(n+1+alpha)}.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.size
    if np.sum(np.abs(z) ** 2) >= 1:
        raise BallError("centre must lie in the open ball")
    t = math.tanh(r)
    rng = np.random.default_rng(seed)
    u = random_ball_points(rng, n, sample_count, t)
    vals = (1.0 - np.sum(np.abs(u) ** 2, axis=1)) ** alpha / np.abs(1.0 - u @ np.conj(z)) ** (2 * (n + 1 + alpha))
    scale = normalization_constant(n, alpha) * t ** (2 * n)
    return float(scale * vals.mean()), float(scale * vals.std(ddof=1) / math.sqrt(sample_count))


# ---------------------------------------------------------------------------
# Atoms


def min_atom_exponent(n: int, p: float, alpha: float) -> float:
    """Threshold n max(1, 1/p) + (1 + alpha)/p that b must exceed."""
    return n * max(1.0, 1.0 / p) + (1.0 + alpha) / p


@dataclass(frozen=True, eq=False)
class AtomSpec:
    lattice: Lattice
    b: float
    space: SpaceParams

    def __post_init__(self):
        if self.space.n != self.lattice.n:
            raise AtomError(f"space dimension {self.space.n} differs from lattice dimension {self.lattice.n}")
        bound = min_atom_exponent(self.space.n, self.space.p, self.space.alpha)
        if not self.b > bound:
            raise AtomError(
                f"b = {self.b} violates b > n max(1, 1/p) + (1+alpha)/p = {bound:.6g} "
                f"(n={self.space.n}, p={self.space.p}, alpha={self.space.alpha})"
            )

    @property
    def points(self) -> np.ndarray:
        return self.lattice.points

    @property
    def prefactor_exponent(self) -> float:
        sp = self.space
        return self.b - (sp.n + 1 + sp.alpha) / sp.p

    @cached_property
    def prefactors(self) -> np.ndarray:
        return (1.0 - np.sum(np.abs(self.points) ** 2, axis=1)) ** self.prefactor_exponent


def atom_matrix(spec: AtomSpec, z) -> np.ndarray:
    """E[i, k] = atom_k(z_i) for points z of shape (N, n)."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    return (1.0 - z @ np.conj(spec.points).T) ** (-spec.b) * spec.prefactors[None, :]


def atom_evaluate(spec: AtomSpec, k: int, z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    a = spec.points[k]
    return spec.prefactors[k] * (1.0 - z @ np.conj(a)) ** (-spec.b)


def _atom_coefficients(points: np.ndarray, b: float, weights: np.ndarray, degree: int):
    """Taylor coefficients (basis x K) of weights_k (1 - <z, a_k>)^{-b}."""
    n = points.shape[1]
    basis = graded_basis(n, degree)
    ms = np.array(basis)
    k = ms.sum(axis=1)
    lead = special.gammaln(b + k) - special.gammaln(b) - special.gammaln(ms + 1).sum(axis=1)
    powers = monomial_matrix(np.conj(points), basis)  # (K, B)
    return basis, (np.exp(lead)[:, None] * powers.T) * weights[None, :]


def atom_polynomial(spec: AtomSpec, k: int, degree: int) -> Polynomial:
    basis, c = _atom_coefficients(spec.points[k : k + 1], spec.b, spec.prefactors[k : k + 1], degree)
    return Polynomial.from_vector(c[:, 0], basis)


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    values: np.ndarray
    p: float
    meta: dict = field(default_factory=dict)

    @property
    def lp_norm(self) -> float:
        a = np.abs(self.values)
        if a.size == 0 or a.max() == 0:
            return 0.0
        return float(np.sum(a**self.p) ** (1.0 / self.p))

    @property
    def residual_history(self) -> list[float]:
        return list(self.meta.get("residual_history", []))


def synthesize(lam: CoefficientSequence | np.ndarray, spec: AtomSpec, degree: int) -> Polynomial:
    """Degree-truncated sum_k lambda_k atom_k."""
    vals = np.asarray(getattr(lam, "values", lam), dtype=complex)
    if vals.shape != (len(spec.lattice),):
        raise AtomError(f"expected {len(spec.lattice)} coefficients, got shape {vals.shape}")
    if not np.any(vals):
        return Polynomial.zero(spec.lattice.n)
    basis, c = _atom_coefficients(spec.points, spec.b, spec.prefactors * vals, degree)
    return Polynomial.from_vector(c.sum(axis=1), basis)


def synthesize_values(lam, spec: AtomSpec, z, chunk: int = 4096) -> np.ndarray:
    """Pointwise (untruncated) values of sum_k lambda_k atom_k."""
    vals = np.asarray(getattr(lam, "values", lam), dtype=complex)
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape[0], dtype=complex)
    for s in range(0, z.shape[0], chunk):
        out[s : s + chunk] = atom_matrix(spec, z[s : s + chunk]) @ vals
    return out


def synthesis_ratio(lam, spec: AtomSpec, rule: QuadratureRule) -> float:
    """||sum lambda_k atom_k||_{p,alpha} / ||lambda||_{l^p}."""
    seq = lam if isinstance(lam, CoefficientSequence) else CoefficientSequence(np.asarray(lam), spec.space.p)
    denom = seq.lp_norm
    if denom == 0:
        return 0.0
    vals = synthesize_values(seq.values, spec, rule.nodes)
    return lp_norm_values(vals, spec.space.p, rule.weights) / denom


def default_analysis_rule(spec: AtomSpec) -> QuadratureRule:
    n, alpha = spec.space.n, spec.space.alpha
    if n == 1:
        return build_rule(1, alpha, 60, 200)
    return build_rule(n, alpha, sample_count=20_000, seed=0)


def cell_weights(spec: AtomSpec, alpha_cell: float) -> np.ndarray:
    """v_{alpha_cell} mass of each nearest-point (Voronoi) cell of the lattice."""
    n = spec.space.n
    if n == 1:
        rule = graded_rule(1, alpha_cell, angular_order=128, panels=20, per_panel=8)
    else:
        rule = build_rule(n, alpha_cell, sample_count=40_000, seed=1)
    idx, _ = spec.lattice.nearest(rule.nodes)
    return np.bincount(idx, weights=rule.weights, minlength=len(spec.lattice))


def neumann_start(f_at_points: np.ndarray, spec: AtomSpec) -> np.ndarray:
    """Riemann-sum discretization of the reproducing formula with exponent b."""
    alpha_cell = spec.b - spec.space.n - 1
    return cell_weights(spec, alpha_cell) * f_at_points / spec.prefactors


def analyze(
    f: Callable[[np.ndarray], np.ndarray],
    spec: AtomSpec,
    iterations: int = 20,
    tol: float = 1e-10,
    method: str = "cgls",
    rule: QuadratureRule | None = None,
    ridge: float = 1e-12,
    start: str = "zero",
) -> CoefficientSequence:
    """Coefficients lambda with f ~ sum_k lambda_k atom_k on the lattice.

    ``cgls`` runs conjugate-gradient least squares on the quadrature-weighted
    atom system: the Krylov acceleration of the Neumann series
    lambda <- lambda + E^* (f - E lambda). ``neumann`` is the plain residual
    correction at the lattice points, started from the Riemann-sum
    discretization of the reproducing formula (``start="neumann"`` uses that
    start for ``cgls`` too). ``ridge`` solves the regularized least-squares
    problem directly. Residuals are relative L^p(dv_alpha) errors on
    ``rule``: the starting value, then one per iteration.
    """
    if method not in ("cgls", "neumann", "ridge"):
        raise AnalysisError(f"unknown analysis method {method!r}")
    if start not in ("zero", "neumann"):
        raise AnalysisError(f"unknown start {start!r}")
    rule = rule or default_analysis_rule(spec)
    p = spec.space.p
    K = len(spec.lattice)
    fz = np.asarray(f(rule.nodes), dtype=complex).reshape(-1)
    f_norm = lp_norm_values(fz, p, rule.weights)
    meta = {"method": method, "f_norm": f_norm, "residual_history": [], "iterations": 0, "converged": True}
    if f_norm == 0:
        meta["lambda_ratio"] = 0.0
        return CoefficientSequence(np.zeros(K, dtype=complex), p, meta)

    E = atom_matrix(spec, rule.nodes)
    sw = np.sqrt(rule.weights)

    def rel(res_vals):
        return lp_norm_values(res_vals, p, rule.weights) / f_norm

    history = meta["residual_history"]
    rises = 0

    def record(value):
        nonlocal rises
        if history and value > history[-1]:
            rises += 1
            if rises >= 3:
                raise AnalysisError(
                    f"analysis residual increased 3 times in a row (now {value:.3g}); try a smaller lattice radius r"
                )
        else:
            rises = 0
        history.append(float(value))

    if method == "ridge":
        W = E * sw[:, None]
        A = np.vstack([W, math.sqrt(ridge) * np.eye(K)])
        y = np.concatenate([fz * sw, np.zeros(K)])
        lam = np.linalg.lstsq(A, y, rcond=None)[0]
        record(rel(fz - E @ lam))
        meta["iterations"] = 1
    else:
        fa = np.asarray(f(spec.points), dtype=complex).reshape(-1)
        if method == "neumann" or start == "neumann":
            lam = neumann_start(fa, spec)
        else:
            lam = np.zeros(K, dtype=complex)
        record(rel(fz - E @ lam))
        if method == "neumann":
            step = cell_weights(spec, spec.b - spec.space.n - 1) / spec.prefactors
            G = atom_matrix(spec, spec.points)
            for it in range(iterations):
                if history[-1] <= tol:
                    break
                lam = lam + step * (fa - G @ lam)
                record(rel(fz - E @ lam))
                meta["iterations"] = it + 1
        else:
            W = E * sw[:, None]
            WH = np.ascontiguousarray(W.conj().T)
            res = (fz - E @ lam) * sw
            s = WH @ res
            d = s.copy()
            gamma = float(np.vdot(s, s).real)
            for it in range(iterations):
                if history[-1] <= tol or gamma == 0:
                    break
                q = W @ d
                step = gamma / float(np.vdot(q, q).real)
                lam = lam + step * d
                res = res - step * q
                s = WH @ res
                gamma_new = float(np.vdot(s, s).real)
                d = s + (gamma_new / gamma) * d
                gamma = gamma_new
                record(rel(res / sw))
                meta["iterations"] = it + 1
    meta["converged"] = history[-1] <= max(tol, 1e-3)
    seq = CoefficientSequence(lam, p, meta)
    meta["lambda_ratio"] = seq.lp_norm / f_norm
    return seq


# ---------------------------------------------------------------------------
# Weak factorization


@dataclass(frozen=True, eq=False)
class FactorizationCertificate:
    pairs: list[tuple[Polynomial, Polynomial]]
    cost: float
    residual: float
    frame: HolderFrame
    f_norm: float = math.nan
    meta: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.cost / self.f_norm if self.f_norm > 0 else math.nan

    @property
    def upper_bound(self) -> float:
        """cost + C_H * residual: a bound on the product-space norm at the truncation."""
        return self.cost + self.frame.product_constant() * self.residual

    def to_dict(self) -> dict:
        fr = self.frame
        return {
            "cost": self.cost,
            "residual": self.residual,
            "f_norm": self.f_norm,
            "frame": {"p1": fr.p1, "alpha1": fr.alpha1, "p2": fr.p2, "alpha2": fr.alpha2, "pairing_alpha": fr.pairing_alpha, "n": fr.n},
            "pairs": [[format_polynomial(a), format_polynomial(b)] for a, b in self.pairs],
            "meta": {k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool, type(None)))},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FactorizationCertificate":
        from .measure import holder_frame

        fr = d["frame"]
        frame = holder_frame(fr["p1"], fr["alpha1"], fr["p2"], fr["alpha2"], fr["pairing_alpha"], fr.get("n", 1))
        n = frame.n
        pairs = [(parse_polynomial(a, n), parse_polynomial(b, n)) for a, b in d["pairs"]]
        return cls(pairs, d["cost"], d["residual"], frame, d.get("f_norm", math.nan), dict(d.get("meta", {})))


def split_exponents(frame: HolderFrame, b: float) -> tuple[float, float]:
    """Default (b1, b2): b1 = smallest admissible + 0.5, b2 = b - b1, else an even split of the slack."""
    n = frame.n
    m1 = min_atom_exponent(n, frame.p1, frame.alpha1)
    m2 = min_atom_exponent(n, frame.p2, frame.alpha2)
    slack = b - m1 - m2
    if not slack > 0:
        raise AtomError(
            f"b = {b} must exceed the sum of the two atom thresholds {m1:.6g} + {m2:.6g}"
        )
    b1 = m1 + 0.5
    if b - b1 > m2 + 1e-9:
        return b1, b - b1
    return m1 + slack / 2, m2 + slack / 2


def factor_norm_rule(n: int, alpha: float) -> QuadratureRule:
    if n == 1:
        return build_rule(1, alpha, 100, 400)
    return build_rule(n, alpha, sample_count=40_000, seed=2)


def _poly_values(coeffs: np.ndarray, basis, rule: QuadratureRule) -> np.ndarray:
    return monomial_matrix(rule.nodes, basis) @ coeffs


def weak_factorize(
    f: Callable[[np.ndarray], np.ndarray],
    frame: HolderFrame,
    spec_q: AtomSpec,
    b1: float | None = None,
    b2: float | None = None,
    degree: int = 120,
    iterations: int = 20,
) -> FactorizationCertificate:
    """Atom-split certificate f ~ sum_k phi_k psi_k from the decomposition of f in A^q_beta.

    lambda_k = sgn(lambda_k)|lambda_k|^{q/p1} * |lambda_k|^{q/p2}, and the two
    atom prefactors multiply to the A^q_beta prefactor, so phi_k psi_k is
    exactly lambda_k times the b-atom at a_k.
    """
    n = frame.n
    sq = spec_q.space
    if not (math.isclose(sq.p, frame.q, rel_tol=1e-12) and math.isclose(sq.alpha, frame.beta, rel_tol=1e-12, abs_tol=1e-12)):
        raise AtomError(f"atom space ({sq.p}, {sq.alpha}) must be the product space (q, beta) = ({frame.q}, {frame.beta})")
    if b1 is None or b2 is None:
        b1, b2 = split_exponents(frame, spec_q.b)
    if not math.isclose(b1 + b2, spec_q.b, rel_tol=1e-12):
        raise AtomError(f"b1 + b2 = {b1 + b2} must equal b = {spec_q.b}")
    spec1 = AtomSpec(spec_q.lattice, b1, SpaceParams(frame.p1, frame.alpha1, n))
    spec2 = AtomSpec(spec_q.lattice, b2, SpaceParams(frame.p2, frame.alpha2, n))

    lam = analyze(f, spec_q, iterations=iterations)
    vals = lam.values
    keep = np.flatnonzero(np.abs(vals) > 0)
    mag = np.abs(vals[keep])
    w1 = vals[keep] / mag * mag ** (frame.q / frame.p1)
    w2 = mag ** (frame.q / frame.p2)
    pts = spec_q.points[keep]
    basis, c1 = _atom_coefficients(pts, b1, spec1.prefactors[keep] * w1, degree)
    _, c2 = _atom_coefficients(pts, b2, spec2.prefactors[keep] * w2, degree)

    r1 = factor_norm_rule(n, frame.alpha1)
    r2 = factor_norm_rule(n, frame.alpha2)
    rq = factor_norm_rule(n, frame.beta)
    n1 = np.array([lp_norm_values(v, frame.p1, r1.weights) for v in _poly_values(c1, basis, r1).T])
    n2 = np.array([lp_norm_values(v, frame.p2, r2.weights) for v in _poly_values(c2, basis, r2).T])
    cost = float(np.sum(n1 * n2))

    pairs = [(Polynomial.from_vector(c1[:, j], basis), Polynomial.from_vector(c2[:, j], basis)) for j in range(len(keep))]
    if n == 1:
        total = np.zeros(2 * degree + 1, dtype=complex)
        for j in range(len(keep)):
            total += np.convolve(c1[:, j], c2[:, j])
        product = Polynomial.from_univariate(total)
    else:
        product = Polynomial.zero(n)
        for a, b in pairs:
            product = product + multiply(a, b)
    fq = np.asarray(f(rq.nodes), dtype=complex).reshape(-1)
    f_norm = lp_norm_values(fq, frame.q, rq.weights)
    residual = lp_norm_values(fq - product(rq.nodes), frame.q, rq.weights)
    meta = {
        "method": "atom-split",
        "b1": b1,
        "b2": b2,
        "degree": degree,
        "atoms": len(keep),
        "lambda_lp": lam.lp_norm,
        "analysis_residual": lam.residual_history[-1],
        "pair_costs": [float(c) for c in n1 * n2],
    }
    return FactorizationCertificate(pairs, cost, residual, frame, f_norm, meta)

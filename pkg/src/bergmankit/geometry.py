"""Geometry of the unit ball in C^n.

Points are 1-D complex arrays of length n. Most functions also accept a
stack of points with shape ``(..., n)`` in the second argument so that
Monte Carlo sweeps stay vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_DENOM_TOL = 1e-14


class BallError(ValueError):
    """Raised for points outside the ball or mismatched dimensions."""


def as_point(z, n: int | None = None) -> np.ndarray:
    """Coerce ``z`` to a complex point (or stack of points) of dimension n."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if n is not None and arr.shape[-1] != n:
        raise BallError(f"expected dimension {n}, got {arr.shape[-1]}")
    return arr


def _check_dims(z: np.ndarray, w: np.ndarray) -> None:
    if z.shape[-1] != w.shape[-1]:
        raise BallError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")


def _check_interior(z: np.ndarray, name: str) -> None:
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    if np.any(r2 >= 1.0):
        raise BallError(f"{name} must lie in the open unit ball (|{name}|^2 = {np.max(r2):.6g})")


def inner_product(z, w) -> complex | np.ndarray:
    """Hermitian inner product <z, w> = sum z_i conj(w_i)."""
    z = as_point(z)
    w = as_point(w)
    _check_dims(z, w)
    return np.sum(z * np.conj(w), axis=-1)


def norm(z) -> float | np.ndarray:
    z = as_point(z)
    return np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))


def mobius_map(a, z) -> np.ndarray:
    """Involutive automorphism of the ball exchanging 0 and ``a``.

    ``z`` may be a stack of points with shape ``(..., n)``.
    """
    a = as_point(a)
    z = as_point(z)
    _check_dims(a, z)
    _check_interior(a, "a")
    _check_interior(z, "z")
    a2 = float(np.sum(np.abs(a) ** 2))
    if a2 == 0.0:
        return -z
    za = np.sum(z * np.conj(a), axis=-1)  # <z, a>
    denom = 1.0 - za
    if np.any(np.abs(denom) < _DENOM_TOL):
        raise BallError("1 - <z, a> vanishes to machine precision")
    proj = (za / a2)[..., None] * a  # P_a(z)
    s_a = np.sqrt(1.0 - a2)
    return (a - proj - s_a * (z - proj)) / denom[..., None]


def mobius_jacobian_at_zero(a) -> np.ndarray:
    """Complex Jacobian of ``mobius_map(a, .)`` at the origin.

    Equals ``-(1-|a|^2) P_a - sqrt(1-|a|^2) Q_a``.
    """
    a = as_point(a)
    _check_interior(a, "a")
    n = a.shape[-1]
    a2 = float(np.sum(np.abs(a) ** 2))
    if a2 == 0.0:
        return -np.eye(n, dtype=complex)
    proj = np.outer(a, np.conj(a)) / a2
    comp = np.eye(n, dtype=complex) - proj
    return -(1.0 - a2) * proj - np.sqrt(1.0 - a2) * comp


def rho2_numerator(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """|1-<z,w>|^2 - (1-|z|^2)(1-|w|^2) without cancellation near z = w.

    Equals |d|^2 - (|z|^2|w|^2 - |<z,w>|^2) with d = w - z, and the Lagrange
    identity writes the bracket as (1/2) sum |z_i d_j - z_j d_i|^2.
    """
    d = w - z
    out = np.sum(np.abs(d) ** 2, axis=-1)
    n = z.shape[-1]
    for i in range(n):
        for j in range(i + 1, n):
            out = out - np.abs(z[..., i] * d[..., j] - z[..., j] * d[..., i]) ** 2
    return out


def pseudo_hyperbolic_distance(z, w) -> float | np.ndarray:
    """rho(z, w) = |phi_z(w)|, computed via the modulus identity.

    rho^2 = 1 - (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2, with the numerator taken
    from :func:`rho2_numerator`; vectorizes over both arguments.
    """
    z = as_point(z)
    w = as_point(w)
    _check_dims(z, w)
    _check_interior(z, "z")
    _check_interior(w, "w")
    num = rho2_numerator(z, w)
    den = np.abs(1.0 - np.sum(z * np.conj(w), axis=-1)) ** 2
    rho2 = np.clip(num / den, 0.0, None)
    return np.minimum(np.sqrt(rho2), 1.0 - np.finfo(float).eps)


def bergman_distance(z, w) -> float | np.ndarray:
    """beta(z, w) = arctanh rho(z, w)."""
    return np.arctanh(pseudo_hyperbolic_distance(z, w))


@dataclass(frozen=True)
class MetricBall:
    """Bergman-metric ball D(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise BallError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", as_point(self.center))

    def contains(self, z) -> bool | np.ndarray:
        return bergman_distance(self.center, z) < self.radius


def in_metric_ball(ball: MetricBall, z) -> bool | np.ndarray:
    return ball.contains(z)


def random_ball_points(rng: np.random.Generator, n: int, size: int, rmax: float = 1.0) -> np.ndarray:
    """Uniform samples from the Euclidean ball of radius ``rmax`` in C^n."""
    g = rng.standard_normal((size, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rmax * rng.random(size) ** (1.0 / (2 * n))
    x = g * r[:, None]
    return x[:, :n] + 1j * x[:, n:]

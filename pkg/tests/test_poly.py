import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bergmankit import geometry as g
from bergmankit import measure as m
from bergmankit import poly as P
from bergmankit.poly import Polynomial


def z(*e):
    return Polynomial.monomial(e)


@st.composite
def polys(draw, n=None, max_degree=6):
    n = draw(st.sampled_from([1, 2])) if n is None else n
    d = draw(st.integers(0, max_degree))
    seed = draw(st.integers(0, 2**31))
    return P.random_polynomial(np.random.default_rng(seed), n, d, density=0.7)


def test_graded_basis_order():
    assert P.graded_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert len(P.graded_basis(3, 4)) == math.comb(7, 3)


def test_canonical_form_drops_zeros():
    f = Polynomial(1, {(0,): 1.0, (2,): 0.0})
    assert f.terms == {(0,): 1.0} and f.degree == 0
    assert Polynomial.zero(2).is_zero()


def test_multiply_examples():
    one = Polynomial.constant(1, 1.0)
    g_ = z(3) + 2j * z(1)
    assert P.multiply(one, g_) == g_
    assert P.multiply(one + z(1), one - z(1)) == one - z(2)
    assert P.multiply(z(1, 0), z(0, 1)) == z(1, 1)
    with pytest.raises(ValueError):
        P.multiply(z(1), z(1, 0))


@settings(max_examples=60, deadline=None)
@given(polys(n=2), polys(n=2))
def test_multiply_evaluation_homomorphism(f, h):
    pts = g.random_ball_points(np.random.default_rng(0), 2, 20)
    prod = P.multiply(f, h)
    assert np.allclose(prod(pts), f(pts) * h(pts), atol=1e-12 * (1 + np.abs(f(pts) * h(pts)).max()))
    if not (f.is_zero() or h.is_zero()):
        assert prod.degree == f.degree + h.degree


def test_pairing_examples():
    one = Polynomial.constant(1, 1.0)
    assert P.pairing_alpha(one, one, 0.0) == pytest.approx(1)
    assert P.pairing_alpha(z(1), z(1), 0.0) == pytest.approx(0.5)
    assert P.pairing_alpha(z(1), one, 0.0) == 0


@settings(max_examples=60, deadline=None)
@given(polys(), st.integers(0, 2**31), st.floats(-0.5, 3))
def test_pairing_conjugate_symmetric_and_matches_quadrature(f, seed, alpha):
    h = P.random_polynomial(np.random.default_rng(seed), f.n, 5)
    a = P.pairing_alpha(f, h, alpha)
    assert a == pytest.approx(np.conj(P.pairing_alpha(h, f, alpha)), abs=1e-12)
    rule = m.build_rule(f.n, alpha, 8, 14)
    quad = rule.integrate(f(rule.nodes) * np.conj(h(rule.nodes)))
    assert abs(quad - a) <= 1e-9 * (1 + abs(a))


@pytest.mark.parametrize("n", [1, 2])
def test_pairing_degree_12_matches_quadrature(n):
    rng = np.random.default_rng(n)
    f, h = P.random_polynomial(rng, n, 12), P.random_polynomial(rng, n, 12)
    rule = m.build_rule(n, 0.5, 14, 26)
    a = P.pairing_alpha(f, h, 0.5)
    assert abs(rule.integrate(f(rule.nodes) * np.conj(h(rule.nodes))) - a) <= 1e-9 * abs(a)


def test_monomial_orthogonality_by_quadrature():
    rule = m.build_rule(2, 0.0, 6, 12)
    for a, b in [((1, 0), (0, 1)), ((2, 1), (1, 2)), ((3, 0), (1, 0))]:
        assert abs(rule.integrate(z(*a)(rule.nodes) * np.conj(z(*b)(rule.nodes)))) < 1e-11
        assert P.pairing_alpha(z(*a), z(*b), 0.0) == 0


def test_radial_derivative_examples():
    assert P.radial_derivative(Polynomial.constant(1, 2.0)).is_zero()
    assert P.radial_derivative(z(3)) == 3 * z(3)
    assert P.radial_derivative(z(1, 2)) == 3 * z(1, 2)


def test_bloch_examples():
    assert P.bloch_norm(Polynomial.constant(1, 2 - 1j)) == pytest.approx(abs(2 - 1j))
    # f(0) = 0, so only the supremum of (1-r^2) r survives
    assert P.bloch_norm(z(1)) == pytest.approx(2 / (3 * math.sqrt(3)), abs=1e-9)
    for k in (2, 5, 9):
        r2 = k / (k + 2)
        ref = (1 - r2) * k * r2 ** (k / 2)
        assert P.bloch_norm(z(k)) == pytest.approx(ref, abs=1e-4)


def test_bloch_monotone_under_refinement():
    rng = np.random.default_rng(4)
    grid = P.BlochGrid(rays=16, radial=16, golden_iters=30)
    for n in (1, 2):
        f = P.random_polynomial(rng, n, 5)
        coarse = P.bloch_norm(f, grid)
        fine = P.bloch_norm(f, grid.refined())
        finer = P.bloch_norm(f, grid.refined().refined())
        assert coarse <= fine + 1e-12 <= finer + 2e-12
        assert finer - fine <= 1e-3 * finer


def test_invariant_gradient_examples():
    assert P.invariant_gradient_norm(Polynomial.constant(1, 3.0), [0.4]) == 0
    f = z(2, 1) + 3 * z(1, 0) - 2j * z(0, 1)
    assert P.invariant_gradient_norm(f, [0, 0]) == pytest.approx(np.linalg.norm([3, -2j]))
    assert P.invariant_gradient_norm(z(1), [0.5]) == pytest.approx(0.75)


@settings(max_examples=30, deadline=None)
@given(polys(n=2, max_degree=4), st.floats(0, 0.9), st.floats(0, 2 * math.pi))
def test_invariant_gradient_finite_differences(f, r, th):
    a = np.array([r * math.cos(th), 1j * r * math.sin(th) * 0.5])
    h = 1e-6
    grad = []
    for k in range(2):
        e = np.zeros(2, complex)
        e[k] = h
        grad.append((f(g.mobius_map(a, e)[None])[0] - f(g.mobius_map(a, -e)[None])[0]) / (2 * h))
    ref = np.linalg.norm(grad)
    assert P.invariant_gradient_norm(f, a) == pytest.approx(ref, abs=1e-6 * (1 + ref))
    assert P.invariant_gradient_norm_fast(f, a[None])[0] == pytest.approx(P.invariant_gradient_norm(f, a), abs=1e-12 * (1 + ref))


def test_log_weight_examples():
    d = P.log_weight_diagnostics(Polynomial.zero(1), 2, 0.0)
    assert (d.blz_norm, d.cor1_sup, d.cor2_integral) == (0, 0, 0)
    d = P.log_weight_diagnostics(Polynomial.constant(1, 1.0), 2, 0.0)
    ref = integrate.quad(lambda t: math.log(2 / (1 - t)), 0, 1)[0]
    assert d.cor2_integral == pytest.approx(ref, rel=1e-8)
    blz2 = integrate.quad(lambda t: math.log(2 / (1 - math.sqrt(t))) ** 2, 0, 1, limit=200)[0]
    # the sqrt(t) kink at the origin limits the graded rule to about 1e-6 here
    assert d.blz_norm == pytest.approx(math.sqrt(blz2), rel=1e-5)
    with pytest.raises(ValueError):
        P.log_weight_diagnostics(z(1), 1.0, 0.0)


@settings(max_examples=20, deadline=None)
@given(polys(n=1, max_degree=5), st.floats(1.2, 4))
def test_log_weight_ordering(f, pp):
    d = P.log_weight_diagnostics(f, pp, 0.0)
    assert d.blz_norm**pp >= math.log(2) ** (pp / 2) * d.cor2_integral * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(polys())
def test_text_format_round_trip(f):
    assert P.parse_polynomial(P.format_polynomial(f), f.n) == f


def test_text_format_examples():
    f = P.parse_polynomial("(1+2i)*z1^2 + 3*z2", 2)
    assert f == (1 + 2j) * z(2, 0) + 3 * z(0, 1)
    assert P.parse_polynomial("1 - z1^2", 1) == Polynomial.constant(1, 1) - z(2)
    assert P.parse_polynomial("2.5-1i", 1) == Polynomial.constant(1, 2.5 - 1j)
    with pytest.raises(ValueError):
        P.parse_polynomial("z3", 2)


def test_lbp_ratio_oracle_and_scan():
    r = P.lbp_ratio(z(1), [0.0], 2, 0.0, 3.0)
    # int |z|^2 dv = 1/2 and int (1-|z|^2)^2 dv = 1/3
    assert r.numerator == pytest.approx(0.5, rel=1e-9)
    assert r.denominator == pytest.approx(1 / 3, rel=1e-9)
    rng = np.random.default_rng(0)
    for _ in range(3):
        f = P.random_polynomial(rng, 1, 5)
        ratios = [P.lbp_ratio(f, [a], 2, 0.0, 3.0).ratio for a in (0, 0.5, 0.9)]
        assert max(ratios) < 10
    with pytest.raises(ValueError):
        P.lbp_ratio(z(1), [0.0], 2, 0.0, 2.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from bergmankit import measure as m


def test_normalization_constant_examples():
    assert m.normalization_constant(1, 0.0) == pytest.approx(1.0)
    assert m.normalization_constant(1, 1.0) == pytest.approx(2.0)
    assert m.normalization_constant(2, 0.0) == pytest.approx(1.0)
    with pytest.raises(m.MeasureError):
        m.normalization_constant(1, -1.0)


def test_moment_examples():
    assert m.monomial_moment((0,), (0,), 2.5) == pytest.approx(1.0)
    assert m.monomial_moment((1,), (1,), 0.0) == pytest.approx(0.5)
    assert m.monomial_moment((2,), (2,), 0.0) == pytest.approx(1 / 3)
    assert m.monomial_moment((1,), (2,), 0.0) == 0.0


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.5])
def test_moments_against_radial_integral(alpha):
    # n = 1: ||z^k||^2 = (alpha+1) int_0^1 t^k (1-t)^alpha dt
    c = alpha + 1
    for k in (0, 1, 3, 7):
        ref = c * integrate.quad(lambda t: t**k * (1 - t) ** alpha, 0, 1, epsabs=1e-14)[0]
        assert m.monomial_moment((k,), (k,), alpha) == pytest.approx(ref, rel=1e-10)


def test_n2_moment_iterated_beta():
    # ||z1 z2^2||^2 for n=2, alpha=1: m! Gamma(n+alpha+1)/Gamma(n+|m|+alpha+1)
    ref = 1 * 2 * special.gamma(4) / special.gamma(7)
    assert m.monomial_moment((1, 2), (1, 2), 1.0) == pytest.approx(ref, rel=1e-13)


def test_holder_frame_examples():
    fr = m.holder_frame(4, 0, 4, 0, 0)
    assert (fr.q, fr.beta, fr.q_prime, fr.beta_prime) == pytest.approx((2, 0, 2, 0))
    assert fr.pa_ineq_holds
    fr = m.holder_frame(3, 0.7, 6, 0.7, 0.7)
    assert fr.q == pytest.approx(2) and fr.beta == pytest.approx(0.7)
    fr = m.holder_frame(2, 0, 2, 0, 0)
    assert fr.q == pytest.approx(1)
    assert not fr.conjugate_sum_ok
    assert any("1/p1 + 1/p2 < 1" in v for v in fr.violations())


@settings(max_examples=200, deadline=None)
@given(
    st.floats(1.1, 20), st.floats(-0.9, 5), st.floats(1.1, 20), st.floats(-0.9, 5), st.floats(-0.9, 5)
)
def test_holder_frame_equations(p1, a1, p2, a2, a):
    fr = m.holder_frame(p1, a1, p2, a2, a)
    assert 1 / p1 + 1 / p2 == pytest.approx(1 / fr.q, abs=1e-12)
    assert a1 / p1 + a2 / p2 == pytest.approx(fr.beta / fr.q, abs=1e-12)
    # adding the two equations
    assert (1 + a1) / p1 + (1 + a2) / p2 == pytest.approx((1 + fr.beta) / fr.q, abs=1e-12)
    assert fr.beta > -1
    if fr.q > 1:
        assert 1 / fr.q + 1 / fr.q_prime == pytest.approx(1, abs=1e-12)
        assert fr.beta / fr.q + fr.beta_prime / fr.q_prime == pytest.approx(a, abs=1e-10)
        # round trip through the dual pair
        qq, bb = m.dual_exponents(fr.q_prime, fr.beta_prime, a)
        assert (qq, bb) == pytest.approx((fr.q, fr.beta), abs=1e-9)
        assert (fr.beta_prime > -1) == fr.weight_sum_ok


def test_rule_examples():
    r = m.build_rule(1, 0.0, 11, 41)
    assert r.exactness_degree >= 40
    assert r.integrate(np.ones(len(r.weights))) == pytest.approx(1, abs=1e-12)
    assert r.integrate(np.abs(r.nodes[:, 0]) ** 2) == pytest.approx(0.5, abs=1e-12)
    assert np.all(r.weights > 0)


def test_n2_monte_carlo_within_three_se():
    r = m.build_rule(2, 0.0, sample_count=200_000, seed=3)
    v = np.abs(r.nodes[:, 0]) ** 2
    assert abs(r.integrate(v) - 1 / 3) < 3 * r.standard_error(v)
    assert r.seed == 3 and r.kind == "monte-carlo"


@pytest.mark.parametrize("n,alpha", [(1, 0.0), (1, 2.5), (2, 0.5), (3, 1.0)])
def test_normalization_every_rule(n, alpha):
    for rule in (m.build_rule(n, alpha, 6, 13), m.graded_rule(n, alpha, angular_order=8)):
        assert rule.weights.sum() == pytest.approx(1, abs=1e-10)


def test_dimension_bound():
    with pytest.raises(m.MeasureError):
        m.build_rule(5, 0.0, 3, 3)


def test_lp_norm_examples():
    r = m.build_rule(1, 0.0, 12, 40)
    sp2, sp4 = m.SpaceParams(2, 0.0), m.SpaceParams(4, 0.0)
    z = lambda x: x[:, 0]
    assert m.lp_norm(lambda x: np.ones(len(x)), m.SpaceParams(3.3, 0.0), r) == pytest.approx(1)
    assert m.lp_norm(z, sp2, r) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert m.lp_norm(z, sp4, r) == pytest.approx((1 / 3) ** 0.25, abs=1e-12)
    assert m.lp_norm(lambda x: (2 - 1j) * x[:, 0], sp4, r) == pytest.approx(abs(2 - 1j) * (1 / 3) ** 0.25, rel=1e-12)
    with pytest.raises(m.MeasureError, match="node"):
        m.lp_norm(lambda x: np.where(np.arange(len(x)) == 3, np.nan, 1.0), sp2, r)
    with pytest.raises(m.MeasureError):
        m.lp_norm(z, m.SpaceParams(2, 1.0), r)


def test_exact_polar_reproduces_moments():
    for alpha in (0.0, 0.5, 1.0, 2.5):
        r = m.build_rule(1, alpha, 11, 42)
        z = r.nodes[:, 0]
        for k in range(21):
            assert r.integrate(np.abs(z) ** (2 * k)) == pytest.approx(m.monomial_moment((k,), (k,), alpha), abs=1e-11)
        assert abs(r.integrate(z**3 * np.conj(z))) < 1e-12


def test_forelli_rudin():
    assert m.forelli_rudin_scan(1, 0, 1, [0.0])[0][1] == pytest.approx(1.0, abs=1e-10)
    vals = [v for _, v in m.forelli_rudin_scan(1, 0, 1, [0.9, 0.99, 0.999])]
    assert max(vals) / min(vals) <= 3
    with pytest.raises(m.MeasureError):
        m.forelli_rudin_scan(1, 0, 0.0, [0.5])


def test_forelli_rudin_against_direct_quadrature():
    # n=1, t=0, s=1, |z|=0.5: integrate 1/|1 - z w|^3 over the disc directly
    z = 0.5
    def radial(rr):
        f = lambda th: 1 / abs(1 - z * rr * np.exp(1j * th)) ** 3
        return integrate.quad(f, 0, 2 * np.pi, epsabs=1e-13)[0] * rr / np.pi
    ref = integrate.quad(radial, 0, 1, epsabs=1e-12)[0]
    assert m.forelli_rudin_integral(1, 0, 1, z) == pytest.approx(ref, rel=1e-9)


def test_graded_rule_handles_log_weight():
    r = m.graded_rule(1, 0.0)
    z = r.nodes[:, 0]
    val = r.integrate(np.log(2 / (1 - np.abs(z) ** 2)))
    ref = integrate.quad(lambda t: np.log(2 / (1 - t)), 0, 1)[0]
    assert val == pytest.approx(ref, rel=1e-9)

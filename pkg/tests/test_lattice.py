import json
import math

import numpy as np
import pytest
from scipy import special
from hypothesis import given, settings
from hypothesis import strategies as st

from bergmankit import lattice as L
from bergmankit import poly as P
from bergmankit.measure import SpaceParams, build_rule, holder_frame, lp_norm
from bergmankit.poly import Polynomial

L2 = SpaceParams(2, 0.0, 1)


@pytest.fixture(scope="module")
def coarse():
    return L.generate_lattice(1, 0.6, 0.7)


@pytest.fixture(scope="module")
def fine():
    return L.generate_lattice(1, 0.2, 0.9)


def test_large_radius_gives_single_point():
    lat = L.generate_lattice(1, 2.0, 0.5)
    assert len(lat) == 1 and lat.points[0, 0] == 0
    rep = L.verify_lattice(lat, 10_000)
    assert rep.overlap_N == 1 and rep.uncovered == 0 and math.isinf(rep.min_separation)


def test_rejects_bad_parameters():
    with pytest.raises(L.LatticeError, match="rmax"):
        L.generate_lattice(1, 0.3, 1.0)
    with pytest.raises(L.LatticeError, match="positive"):
        L.generate_lattice(1, 0.0, 0.5)
    with pytest.raises(L.LatticeError, match="strategy"):
        L.generate_lattice(1, 0.3, 0.5, strategy="hex")
    with pytest.raises(L.LatticeError, match="sample_count"):
        L.verify_lattice(L.generate_lattice(1, 0.3, 0.5), 100)


def test_point_count_r03():
    # frozen count for the deterministic radial-shell strategy
    assert len(L.generate_lattice(1, 0.3, 0.99)) == 2519


@pytest.mark.parametrize("strategy", L.STRATEGIES)
def test_count_grows_like_inverse_distance_to_boundary(strategy):
    scaled = [len(L.generate_lattice(1, 0.3, rm, strategy)) * (1 - rm) for rm in (0.9, 0.98, 0.995)]
    assert max(scaled) / min(scaled) < 1.5


@pytest.mark.parametrize("strategy", L.STRATEGIES)
@pytest.mark.parametrize("r", [0.3, 0.5])
def test_lattice_invariants_disc(strategy, r):
    lat = L.generate_lattice(1, r, 0.95, strategy)
    rep = L.verify_lattice(lat, 20_000, seed=3)
    assert rep.uncovered == 0 and rep.covering_gap < r
    assert rep.min_separation >= r / 2
    assert rep.overlap_N >= 1


@pytest.mark.parametrize("strategy", L.STRATEGIES)
def test_lattice_invariants_ball(strategy):
    lat = L.generate_lattice(2, 0.5, 0.6, strategy)
    rep = L.verify_lattice(lat, 10_000)
    assert rep.uncovered == 0 and rep.min_separation >= 0.25


def test_min_separation_matches_pairwise_scan(coarse):
    pts = coarse.points[:, 0]
    d = np.abs(pts[:, None] - pts[None, :]) / np.abs(1 - pts[:, None] * np.conj(pts[None, :]))
    np.fill_diagonal(d, 0)
    assert L.min_separation(coarse) == pytest.approx(np.arctanh(d[d > 0].min()), rel=1e-12)


def test_nearest_is_exact(coarse):
    z = np.random.default_rng(0).uniform(-0.5, 0.5, (200, 2)) @ np.array([1, 1j])
    idx, dist = coarse.nearest(z[:, None])
    pts = coarse.points[:, 0]
    d = np.arctanh(np.abs(z[:, None] - pts) / np.abs(1 - z[:, None] * np.conj(pts)))
    assert np.array_equal(idx, d.argmin(axis=1))
    assert np.allclose(dist, d.min(axis=1), atol=1e-12)


def test_lattice_json_roundtrip(coarse):
    back = L.Lattice.from_dict(json.loads(json.dumps(coarse.to_dict())))
    assert np.array_equal(back.points, coarse.points) and back.r == coarse.r


@pytest.mark.parametrize("a", [0.0, 0.5, 0.9])
def test_volume_ratio_disc_closed_form(a):
    # D(z, r) is a Euclidean disc of radius t(1-|z|^2)/(1-t^2|z|^2)
    t = math.tanh(0.5)
    val, se = L.volume_ratio(np.array([a]), 0.5, 0.0, 40_000)
    assert abs(val - t**2 / (1 - t**2 * a**2) ** 2) <= 4 * se + 1e-12


def test_volume_ratio_bounded_ball():
    vals = [L.volume_ratio(np.array([s, 0.0]), 0.4, 1.0, 10_000)[0] for s in (0.0, 0.5, 0.9, 0.95)]
    assert max(vals) / min(vals) < 5


def test_atom_examples(coarse):
    spec = L.AtomSpec(L.generate_lattice(1, 2.0, 0.5), 3.0, L2)
    assert L.atom_polynomial(spec, 0, 5).allclose(Polynomial.constant(1, 1.0))
    lat = L.Lattice(np.array([[0.5]]), 0.3, 0.5, 1)
    spec = L.AtomSpec(lat, 3.0, L2)
    assert spec.prefactors[0] == pytest.approx(0.5625)
    z = np.array([[0.3j]])
    assert L.atom_evaluate(spec, 0, z)[0] == pytest.approx(0.5625 * (1 - 0.15j) ** -3)
    assert L.atom_polynomial(spec, 0, 80)(z)[0] == pytest.approx(L.atom_evaluate(spec, 0, z)[0], abs=1e-14)


def test_atom_spec_names_inequality(coarse):
    with pytest.raises(L.AtomError, match=r"b > n max\(1, 1/p\) \+ \(1\+alpha\)/p"):
        L.AtomSpec(coarse, 1.5, L2)


def atom_norm_series(a, b):
    # ||(1 - a z)^{-b}||^2 in A^2 = sum_k ((b)_k / k!)^2 a^{2k} / (k + 1)
    k = np.arange(4000)
    logc = special.gammaln(b + k) - special.gammaln(b) - special.gammaln(k + 1.0)
    terms = np.exp(2 * logc + 2 * k * np.log(a)) if a else (k == 0).astype(float)
    return math.sqrt(np.sum(terms / (k + 1)))


def test_atom_norms_in_fixed_interval():
    radii = [0.0, 0.3, 0.6, 0.8, 0.9, 0.95]
    lat = L.Lattice(np.array(radii)[:, None], 0.3, 0.95, 1)
    spec = L.AtomSpec(lat, 3.0, L2)
    rule = build_rule(1, 0.0, 60, 400)
    norms = []
    for k, a in enumerate(radii):
        got = lp_norm(lambda z, k=k: L.atom_evaluate(spec, k, z), L2, rule)
        exact = (1 - a * a) ** 2 * atom_norm_series(a, 3.0)
        assert got == pytest.approx(exact, rel=1e-6)
        norms.append(exact)
    assert 1 <= min(norms) and max(norms) < 1.5


def test_synthesize_examples(fine):
    spec = L.AtomSpec(fine, 3.5, L2)
    assert L.synthesize(np.zeros(len(fine)), spec, 10).is_zero()
    e = np.zeros(len(fine))
    e[7] = 1
    assert L.synthesize(e, spec, 30).allclose(L.atom_polynomial(spec, 7, 30), 1e-13)
    with pytest.raises(L.AtomError):
        L.synthesize(np.zeros(3), spec, 5)


def test_synthesis_ratio_stable_across_seeds(fine):
    spec = L.AtomSpec(fine, 3.5, L2)
    rule = build_rule(1, 0.0, 60, 200)
    ratios = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        lam = np.zeros(len(fine), complex)
        idx = rng.choice(len(fine), 50, replace=False)
        lam[idx] = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        ratios.append(L.synthesis_ratio(lam, spec, rule))
    assert max(ratios) / min(ratios) < 1.25 ** 2


@pytest.mark.parametrize("k", [0, 1, 2])
def test_analyze_recovers_single_atom(coarse, k):
    spec = L.AtomSpec(coarse, 3.5, L2)
    lam = L.analyze(lambda z: L.atom_evaluate(spec, k, z), spec, iterations=40)
    e = np.zeros(len(coarse))
    e[k] = 1
    assert lam.residual_history[-1] < 1e-6
    assert np.abs(lam.values - e).max() < 1e-6


def test_analyze_zero(fine):
    spec = L.AtomSpec(fine, 3.5, L2)
    lam = L.analyze(lambda z: np.zeros(z.shape[0]), spec)
    assert lam.lp_norm == 0 and not np.any(lam.values)


def test_analyze_monotone_kernel(fine):
    spec = L.AtomSpec(fine, 3.5, L2)
    lam = L.analyze(lambda z: (1 - 0.6 * z[:, 0]) ** -3.0, spec, iterations=20)
    h = lam.residual_history
    assert h[-1] <= 1e-3 and len(h) <= 21
    assert all(b <= a * (1 + 1e-9) for a, b in zip(h, h[1:]))


def test_analyze_methods_agree_roughly(fine):
    spec = L.AtomSpec(fine, 3.5, L2)
    f = lambda z: (1 - 0.3 * z[:, 0]) ** -2.0
    a = L.analyze(f, spec, iterations=40)
    b = L.analyze(f, spec, method="ridge")
    assert a.residual_history[-1] < 1e-3 and b.residual_history[-1] < 1e-3
    with pytest.raises(L.AnalysisError, match="unknown"):
        L.analyze(f, spec, method="magic")


def test_divergence_is_reported():
    # plain Neumann steps overshoot on a coarse lattice
    spec = L.AtomSpec(L.generate_lattice(1, 0.8, 0.9), 3.5, L2)
    with pytest.raises(L.AnalysisError, match="smaller lattice radius"):
        L.analyze(lambda z: (1 - 0.6 * z[:, 0]) ** -3.0, spec, iterations=40, method="neumann")


def test_coefficient_split_example():
    lam, q, p1, p2 = 4.0, 2.0, 4.0, 4.0
    w1, w2 = lam ** (q / p1), lam ** (q / p2)
    assert (w1, w2, w1 * w2) == (2.0, 2.0, 4.0)


def test_split_exponents_default():
    fr = holder_frame(4, 0, 4, 0, 0)
    assert L.split_exponents(fr, 3.5) == (1.75, 1.75)
    b1, b2 = L.split_exponents(holder_frame(3, 0, 6, 0, 0), 4.0)
    assert b1 + b2 == pytest.approx(4.0)
    with pytest.raises(L.AtomError, match="thresholds"):
        L.split_exponents(fr, 2.0)


def test_weak_factorize_single_atom():
    fr = holder_frame(4, 0, 4, 0, 0)
    spec = L.AtomSpec(L.generate_lattice(1, 2.0, 0.5), 3.5, SpaceParams(fr.q, fr.beta, 1))
    cert = L.weak_factorize(lambda z: np.ones(z.shape[0]), fr, spec, degree=20)
    assert len(cert.pairs) == 1
    assert cert.residual < 1e-12
    assert cert.cost == pytest.approx(1.0, abs=1e-12)
    back = L.FactorizationCertificate.from_dict(json.loads(json.dumps(cert.to_dict())))
    assert back.cost == cert.cost and back.pairs[0][0].allclose(cert.pairs[0][0])


def test_weak_factorize_rejects_mismatched_space(fine):
    fr = holder_frame(4, 0, 4, 0, 0)
    with pytest.raises(L.AtomError, match="product space"):
        L.weak_factorize(lambda z: z[:, 0], fr, L.AtomSpec(fine, 3.5, SpaceParams(3, 0.0, 1)))
    with pytest.raises(L.AtomError, match="must equal"):
        L.weak_factorize(lambda z: z[:, 0], fr, L.AtomSpec(fine, 3.5, SpaceParams(2, 0.0, 1)), b1=1.7, b2=1.7)


def test_weak_factorize_kernel_easy_direction(fine):
    fr = holder_frame(4, 0, 4, 0, 0)
    spec = L.AtomSpec(fine, 3.5, SpaceParams(fr.q, fr.beta, 1))
    cert = L.weak_factorize(lambda z: (1 - 0.3 * z[:, 0]) ** -2.0, fr, spec, degree=60)
    assert cert.residual / cert.f_norm < 1e-2
    assert cert.f_norm <= fr.product_constant() * cert.cost + cert.residual
    assert cert.meta["atoms"] == len(cert.pairs) == len(cert.meta["pair_costs"])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([(4, 4), (3, 6), (6, 3)]), st.floats(0, 1.5), st.integers(1, 4))
def test_product_norm_bounded_by_cost(seed, ps, a, terms):
    fr = holder_frame(ps[0], a, ps[1], a, a)
    rng = np.random.default_rng(seed)
    pairs = [(P.random_polynomial(rng, 1, 4), P.random_polynomial(rng, 1, 4)) for _ in range(terms)]
    r1, r2, rq = (build_rule(1, al, 30, 120) for al in (fr.alpha1, fr.alpha2, fr.beta))
    cost = sum(lp_norm(f, fr.space1, r1) * lp_norm(g, fr.space2, r2) for f, g in pairs)
    total = Polynomial.zero(1)
    for f, g in pairs:
        total = total + P.multiply(f, g)
    assert lp_norm(total, fr.product_space, rq) <= fr.product_constant() * cost * (1 + 1e-9)

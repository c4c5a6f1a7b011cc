"""The twelve acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed again in the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy import special

from bergmankit import geometry as g
from bergmankit import lattice as L
from bergmankit import measure as m
from bergmankit import normlab as N
from bergmankit import operators as O
from bergmankit import poly as P
from bergmankit import scenarios as S
from bergmankit.operators import MixedPolynomial, kernel_symbol


@pytest.fixture(scope="module")
def default_suite():
    """Every scenario at its defaults: reports, CSV text and total wall clock."""
    t0 = time.perf_counter()
    reports = {s: S.run(S.default_config(s)) for s in S.SCENARIOS}
    return reports, {s: S.report_csv(r) for s, r in reports.items()}, time.perf_counter() - t0


def _dot(z, w):
    return np.sum(z * np.conj(w), axis=-1)


def test_criterion_01_geometry(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in (1, 2, 3):
        a_all, z_all, w_all = (g.random_ball_points(rng, n, 10_000, 0.95) for _ in range(3))
        for a, z, w in zip(a_all, z_all, w_all):
            pz, pw = g.mobius_map(a, z), g.mobius_map(a, w)
            a2 = np.sum(np.abs(a) ** 2)
            errs = (
                np.abs(g.mobius_map(a, pz) - z).max(),
                abs(1 - np.sum(np.abs(pz) ** 2) - (1 - a2) * (1 - np.sum(np.abs(z) ** 2)) / abs(1 - _dot(z, a)) ** 2),
                abs(1 - _dot(pz, pw) - (1 - a2) * (1 - _dot(z, w)) / ((1 - _dot(z, a)) * (1 - _dot(a, w)))),
                abs(g.pseudo_hyperbolic_distance(pz, pw) - g.pseudo_hyperbolic_distance(z, w)),
            )
            worst = max(worst, *errs)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    criterion(1, ok, f"max identity error {worst:.2e} over 3x1e4 tuples, {elapsed:.1f} s")
    assert ok


def test_criterion_02_moments(criterion):
    worst = 0.0
    for alpha in (0.0, 0.5, 1.0, 2.5):
        rule = m.build_rule(1, alpha, 11, 42)
        zz = rule.nodes[:, 0]
        for k in range(21):
            exact = math.exp(special.gammaln(k + 1) + special.gammaln(alpha + 2) - special.gammaln(k + alpha + 2))
            worst = max(worst, abs(m.monomial_moment((k,), (k,), alpha) - exact), abs(rule.integrate(np.abs(zz) ** (2 * k)) - exact))
    rule = m.build_rule(2, 1.0, sample_count=200_000, seed=5)
    zsq = np.abs(rule.nodes) ** 2
    zscores = []
    for mi in [(1, 0), (1, 1), (2, 1), (0, 3)]:
        # iterated Beta: m! Gamma(n+1+alpha) / Gamma(n+|m|+1+alpha)
        oracle = math.prod(math.factorial(x) for x in mi) * math.gamma(4.0) / math.gamma(4.0 + sum(mi))
        v = zsq[:, 0] ** mi[0] * zsq[:, 1] ** mi[1]
        zscores.append(abs(rule.integrate(v) - oracle) / rule.standard_error(v))
    ok = worst <= 1e-11 and max(zscores) < 3
    criterion(2, ok, f"n=1 moment error {worst:.1e}; n=2 Monte Carlo max |z-score| {max(zscores):.2f}")
    assert ok


def test_criterion_03_operator_algebra(criterion):
    rng = np.random.default_rng(3)
    proj = 0.0
    for n in (1, 2):
        for alpha in (0.0, 0.5, 2.0):
            f = P.random_polynomial(rng, n, 6)
            proj = max(proj, np.abs((O.bergman_project(alpha, MixedPolynomial.analytic(f)) - f).to_vector(P.graded_basis(n, 6))).max())
    fub = 0.0
    for i in range(1000):
        n = 1 + i % 2
        alpha = float(rng.uniform(-0.5, 2.0))
        f, gg, h = (P.random_polynomial(rng, n, int(rng.integers(0, 9))) for _ in range(3))
        lhs = O.hankel_form_value(f, gg, h, alpha)
        rhs = P.pairing_alpha(h, O.small_hankel_apply(f, gg, alpha), alpha)
        fub = max(fub, abs(lhs - rhs) / (1 + abs(lhs)))
    rule = m.build_rule(1, 0.5, 40, 120)
    pts = np.array([[0.3], [0.45j], [-0.2 + 0.2j], [0.6]])
    kern = (1.0 - pts @ np.conj(rule.nodes).T) ** -2.5
    quad = 0.0
    for seed in range(5):
        f, gg = P.random_polynomial(rng, 1, 8), P.random_polynomial(rng, 1, 8)
        u = f(rule.nodes) * np.conj(gg(rule.nodes))
        quad = max(quad, np.abs(kern @ (rule.weights * u) - O.small_hankel_apply(f, gg, 0.5)(pts)).max())
    ok = proj <= 1e-13 and fub <= 1e-10 and quad <= 1e-8
    criterion(3, ok, f"projection {proj:.1e}, Fubini {fub:.1e} on 1e3 triples, small Hankel vs quadrature {quad:.1e}")
    assert ok


def _holder_instances(fr, count, rng):
    """Counts of violations of the two Holder-direction inequalities over random instances."""
    r1, r2, rq, rd = (m.build_rule(1, a, 30, 120) for a in (fr.alpha1, fr.alpha2, fr.beta, fr.beta_prime))
    ch, cp = fr.hankel_constant(), fr.product_constant()
    bad_form = bad_prod = 0
    for _ in range(count):
        b = P.random_polynomial(rng, 1, int(rng.integers(0, 9)))
        f = P.random_polynomial(rng, 1, int(rng.integers(0, 5)))
        h = P.random_polynomial(rng, 1, int(rng.integers(0, 5)))
        lhs = abs(O.hankel_form_value(b, f, h, fr.pairing_alpha))
        rhs = ch * m.lp_norm(b, fr.dual_space, rd) * m.lp_norm(f, fr.space1, r1) * m.lp_norm(h, fr.space2, r2)
        bad_form += lhs > rhs * (1 + 1e-9)
        pairs = [(P.random_polynomial(rng, 1, 4), P.random_polynomial(rng, 1, 4)) for _ in range(int(rng.integers(1, 4)))]
        total = P.Polynomial.zero(1)
        cost = 0.0
        for u, v in pairs:
            total = total + P.multiply(u, v)
            cost += m.lp_norm(u, fr.space1, r1) * m.lp_norm(v, fr.space2, r2)
        bad_prod += m.lp_norm(total, fr.product_space, rq) > cp * cost * (1 + 1e-9)
    return bad_form, bad_prod


def test_criterion_04_holder_direction(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    frames = []
    for p1, p2 in ((4, 4), (3, 6), (6, 3)):
        for a1, a2, a in ((0, 0, 0), (0.5, 0.5, 0.5), (1, 0, 0.5), (0, 1, 1)):
            fr = m.holder_frame(p1, a1, p2, a2, a)
            if fr.pa_ineq_holds:
                frames.append(fr)
    form = prod = 0
    for fr in frames:
        bf, bp = _holder_instances(fr, 1000, rng)
        form, prod = form + bf, prod + bp
    elapsed = time.perf_counter() - t0
    ok = form == 0 and prod == 0 and elapsed < 120
    criterion(4, ok, f"{len(frames)} frames x 1e3 instances: {form} form and {prod} product violations, {elapsed:.0f} s")
    assert ok


def test_criterion_05_lemma_la(criterion):
    t0 = time.perf_counter()
    radii = [0.9, 0.95, 0.99, 0.995, 0.999]
    spreads = {}
    for n, t, s in ((1, 0, 1), (1, 1, 0.5), (2, 0, 1)):
        vals = [v for _, v in m.forelli_rudin_scan(n, t, s, radii)]
        spreads[(n, t, s)] = max(vals) / min(vals)
    elapsed = time.perf_counter() - t0
    ok = max(spreads.values()) <= 3 and elapsed < 60
    criterion(5, ok, "max/min " + ", ".join(f"{k}: {v:.3f}" for k, v in spreads.items()) + f"; {elapsed:.1f} s")
    assert ok


def test_criterion_06_lattices(criterion):
    details, ok = [], True
    for strategy in L.STRATEGIES:
        for r in (0.2, 0.3, 0.5):
            lat = L.generate_lattice(1, r, 0.99, strategy)
            reps = [L.verify_lattice(lat, 100_000, seed=s) for s in (0, 1, 2)]
            ov = [rep.overlap_N for rep in reps]
            good = all(rep.uncovered == 0 for rep in reps) and reps[0].min_separation >= r / 2 and max(ov) - min(ov) <= 1
            ok &= good
            details.append(f"{strategy} r={r}: {len(lat)} pts, N={ov[0]}..{max(ov)}")
    criterion(6, ok, "; ".join(details))
    assert ok


def test_criterion_07_atomic_roundtrip(default_suite, criterion):
    rep = default_suite[0]["atomic-roundtrip"]
    cfg = rep.config
    assert (cfg["n"], cfg["p"], cfg["alpha"], cfg["r"], cfg["b"]) == (1, 2.0, 0.0, 0.2, 3.5)
    c = rep.columns
    res = [row[c.index("residual")] for row in rep.rows]
    its = [row[c.index("iterations")] for row in rep.rows]
    ratios = np.array([row[c.index("synthesis_ratio")] for row in rep.rows])
    med = float(np.median(ratios))
    ok = max(res) <= 1e-3 and max(its) <= 20 and np.all(np.abs(ratios / med - 1) <= 0.25)
    criterion(7, ok, f"{len(res)} functions: max residual {max(res):.1e} in <= {max(its)} iterations; synthesis ratio {ratios.min():.3f}..{ratios.max():.3f}")
    assert ok


def test_criterion_08_hankel_sweep(default_suite, criterion):
    rep = default_suite[0]["hankel-form-ratio"]
    spread, change = rep.summary["ratio_spread"], rep.summary["degree_change"]
    # Hilbert case: ascent against the exact SVD value at degree 12
    gap = 0.0
    fr = m.holder_frame(2, 0, 2, 0, 0)
    sp = m.SpaceParams(2, 0.0)
    for w in (0.0, 0.3, 0.6, 0.9):
        b = kernel_symbol(np.array([w + 0j]), 2.0, 24)
        T = O.small_hankel_matrix(b, 0.0, 12, 12, sp, sp)
        gap = max(gap, abs(N.opnorm(T, "projected-ascent", N.OptConfig(restarts=2)).value - N.opnorm(T, "svd").value))
        s = N.hankel_form_norm(b, fr, 12).value
        a = N.hankel_form_norm(b, fr, 12, N.OptConfig(restarts=2), method="alternating").value
        gap = max(gap, abs(a - s))
    ok = spread <= 5 and change <= 0.05 and gap <= 1e-6 and rep.violations == 0
    criterion(8, ok, f"ratio max/min {spread:.3f}, degree 10->12 change {100 * change:.2f}%, Hilbert ascent-SVD gap {gap:.1e}")
    assert ok


def test_criterion_09_weak_factorization(default_suite, criterion):
    rep = default_suite[0]["weak-factor"]
    c = rep.columns
    rows = [r for r in rep.rows if r[c.index("parameter")] <= 0.6]
    rel = [r[c.index("seed_residual")] / r[c.index("f_norm")] for r in rows]
    ratios = [r[c.index("seed_ratio")] for r in rows]
    never_worse = all(r[c.index("opt_cost")] <= r[c.index("seed_cost")] for r in rows)
    spread = max(ratios) / min(ratios)
    ok = max(rel) <= 1e-2 and spread <= 1.5 and never_worse and rep.violations == 0
    criterion(9, ok, f"relative residual <= {max(rel):.1e}; C = cost/||f|| in {min(ratios):.3f}..{max(ratios):.3f}; optimizer <= seed: {never_worse}")
    assert ok


def test_criterion_10_tm4(default_suite, criterion):
    rep = default_suite[0]["tm4-equivalence"]
    c = rep.columns
    labels = [r[0] for r in rep.rows]
    assert {f"z1^{k}" for k in range(7)} <= set(labels) and any(x.startswith("kernel") for x in labels)
    diag_ok = all(all(math.isfinite(r[c.index(k)]) for k in ("blz", "cor1", "cor2")) for r in rep.rows)
    spread = rep.summary["ratio_spread"]
    ok = spread <= 10 and diag_ok
    criterion(10, ok, f"{len(labels)} symbols, ratio max/min {spread:.3f}, diagnostics emitted: {diag_ok}")
    assert ok


def test_criterion_11_determinism(default_suite, criterion):
    first = default_suite[1]
    differ = [s for s in S.SCENARIOS if S.report_csv(S.run(S.default_config(s))) != first[s]]
    ok = not differ
    criterion(11, ok, f"{len(S.SCENARIOS) - len(differ)}/{len(S.SCENARIOS)} scenarios byte-identical on re-run")
    assert ok


def test_criterion_12_runtime(default_suite, criterion):
    reports, _, total = default_suite
    ok = total <= 600 and all(r.passed for r in reports.values())
    criterion(12, ok, f"default suite {total:.0f} s; all scenarios pass: {all(r.passed for r in reports.values())}")
    assert ok

"""Acceptance suite: each test covers one criterion at its stated tolerance."""

import math
import time

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from qcspectral.fem import solve_spectrum
from qcspectral.mesh import UnitDisc, triangulate
from qcspectral.qc_core import (
    dilatation_from_matrix,
    identity_field,
    matrix_entries_from_dilatation,
    matrix_from_dilatation,
)
from qcspectral.qc_maps import (
    ellipse_map,
    example_a_matrix_polar,
    example_b_matrix,
    example_c_matrix_polar,
    petal_map,
    radial_power_map,
    spiral_map,
    weight_field,
)
from qcspectral.sharp_constants import log_nu, mk_constant, nu_root, poincare_sobolev_constant
from qcspectral.specfun import bessel_zero, disc_spectrum
from qcspectral.stability import bound_lemma31, c_tilde, verify_isospectral, verify_stability

pytestmark = pytest.mark.acceptance

SQRT2 = math.sqrt(2.0)


def report(label, values):
    print(f"[{label}] " + ", ".join(f"{v:.3e}" for v in np.atleast_1d(values)))


@pytest.mark.criterion("AC1", "disc reference spectrum (6 modes, 1%, <= 2 min)")
def test_ac1_disc_reference_spectrum():
    t0 = time.perf_counter()
    res = solve_spectrum(UnitDisc(), identity_field(), None, 6, refinements=3, target_h=0.15)
    elapsed = time.perf_counter() - t0
    ref = disc_spectrum(6).eigenvalues
    pairs = [(0, 1), (1, 1), (1, 1), (2, 1), (2, 1), (0, 2)]
    assert np.allclose(ref, [bessel_zero(m, n) ** 2 for m, n in pairs], rtol=0, atol=0)
    assert ref == pytest.approx([5.7832, 14.6820, 14.6820, 26.3746, 26.3746, 30.4713], abs=1e-4)
    rel = np.abs(res.best / ref - 1)
    report("AC1 rel errors", rel)
    assert res.extrapolated is not None
    assert np.all(rel <= 0.01)
    assert elapsed <= 120.0


@pytest.mark.criterion("AC2", "ellipse a=0.5 isospectral to the disc (n<=5, 1%)")
def test_ac2_ellipse_isospectral():
    rep = verify_isospectral("isospectral-b", 5, refinements=3, target_h=0.15, tol=0.01, a=0.5)
    report("AC2 rel errors", rep.rel_errors)
    assert rep.passed and max(rep.rel_errors) <= 0.01


@pytest.mark.criterion("AC3", "spiral matrix on the disc isospectral (n<=3, 1.5%)")
def test_ac3_spiral_isospectral():
    rep = verify_isospectral("isospectral-a", 3, refinements=3, target_h=0.15, tol=0.015)
    report("AC3 rel errors", rep.rel_errors)
    assert rep.passed and max(rep.rel_errors) <= 0.015


@pytest.mark.criterion("AC4", "petal isospectral to the disc (n<=3, 2%, no extrapolation)")
def test_ac4_petal_isospectral():
    rep = verify_isospectral("isospectral-c", 3, refinements=3, target_h=0.15, tol=0.02)
    report("AC4 rel errors", rep.rel_errors)
    assert not rep.extrapolated
    assert rep.passed and max(rep.rel_errors) <= 0.02


@pytest.mark.criterion("AC5", "dilatation/matrix round trips and printed matrices")
def test_ac5_algebra_round_trips():
    rng = np.random.default_rng(2024)
    r = 0.99 * np.sqrt(rng.random(1000))
    mus = r * np.exp(2j * np.pi * rng.random(1000))
    worst_rt = worst_det = 0.0
    for mu in mus:
        A = matrix_from_dilatation(mu)
        worst_det = max(worst_det, abs(A.det - 1.0))
        worst_rt = max(worst_rt, abs(dilatation_from_matrix(A) - mu))
    report("AC5 round trip / det", [worst_rt, worst_det])
    assert worst_rt <= 1e-12 and worst_det <= 1e-12

    th = np.linspace(-math.pi + 1e-3, math.pi - 1e-3, 257)
    mu_a = np.full(th.shape, (1 + 1j) / 2) * np.exp(2j * th)  # (1+i)/2 * w / conj(w)
    assert np.max(np.abs(spiral_map().dilatation(0.5 * np.exp(1j * th)) - mu_a)) <= 1e-14
    err_a = np.max(np.abs(matrix_entries_from_dilatation(mu_a) - example_a_matrix_polar(th)))
    err_b = max(np.max(np.abs(matrix_entries_from_dilatation(ellipse_map(a).dilatation(np.array([0.3 + 0.1j])))
                              - example_b_matrix(a))) for a in (0.0, 0.5, 1.0, 2.0))
    thc = th / 4.1
    mu_c = -np.exp(2j * thc) / 3
    assert np.max(np.abs(petal_map().dilatation(0.7 * np.exp(1j * thc)) - mu_c)) <= 1e-14
    err_c = np.max(np.abs(matrix_entries_from_dilatation(mu_c) - example_c_matrix_polar(thc)))
    report("AC5 printed matrices", [err_a, err_b, err_c])
    assert max(err_a, err_b, err_c) <= 1e-10


@pytest.mark.criterion("AC6", "weighted and divergence-form radial spectra agree (2x disc. error)")
@pytest.mark.parametrize("t", [0.1, 0.5])
def test_ac6_eigenvalue_equivalence(t):
    m = radial_power_map(t)
    base = triangulate(UnitDisc(), 0.15)
    weighted = solve_spectrum(base, None, weight_field(m), 5, refinements=3)
    divergence = solve_spectrum(base, m.matrix_field(), None, 5, refinements=3)
    diff = np.abs(weighted.best - divergence.best)
    allowed = 2.0 * (weighted.last_change + divergence.last_change)
    report(f"AC6 t={t} diff/allowed", diff / allowed)
    assert np.all(diff <= allowed)


def _radial_oracles(t, beta):
    s = 2 * beta / (beta + 1)
    h = lambda r: (1 + t) * r ** (2 * t)  # noqa: E731
    r0 = (1 / (1 + t)) ** (1 / (2 * t))

    def integral(f):
        return 2 * math.pi * quad(lambda r: f(r) * r, 0, 1, points=[r0], limit=400, epsrel=1e-12)[0]

    ds = integral(lambda r: abs(1 - h(r)) ** s) ** (1 / s)
    second = math.sqrt(integral(lambda r: (1 - math.sqrt(h(r))) ** 2))
    hb = integral(lambda r: h(r) ** beta) ** (1 / (2 * beta))
    upper = (math.pi ** ((2 - s) / (2 * s)) + hb) * second  # q = s/(2 - s) = beta
    qc = (math.pi ** (1 / (2 * beta)) + hb) * second
    return ds, upper, qc


STABILITY_CASES = [(t, b) for t in (0.1, 0.2, 0.5) for b in (1.5, 2.0)]


@pytest.fixture(scope="module")
def stability_reports():
    return {case: verify_stability(case[0], case[1], 5, refinements=3, target_h=0.15) for case in STABILITY_CASES}


@pytest.mark.criterion("AC7", "stability inequality suite with radial quadrature oracles")
@pytest.mark.parametrize("t,beta", STABILITY_CASES)
def test_ac7_stability_inequalities(stability_reports, t, beta):
    reps = stability_reports[(t, beta)]
    ds, upper, qc = _radial_oracles(t, beta)
    x = reps[0].extras
    assert reps[0].d_s == pytest.approx(ds, rel=1e-4)
    assert x["ds_upper_bound"] == pytest.approx(upper, rel=1e-4)
    assert x["ds_qc_bound"] == pytest.approx(qc, rel=1e-4)
    assert reps[0].d_s <= x["ds_upper_bound"] + 1e-8
    for rep in reps:
        assert rep.actual_diff <= rep.bound_thm34
        assert rep.actual_diff <= rep.bound_thm52
        assert rep.classification in ("bound holds", "bound holds within noise")
    report(f"AC7 t={t} beta={beta} diff/thm34", [r.actual_diff / r.bound_thm34 for r in reps])


@pytest.mark.criterion("AC8", "Poincare grid scan, finite M(1.1), nu root")
def test_ac8_constants():
    mpmath.mp.dps = 50

    def mp_talenti(p):
        p = mpmath.mpf(p)
        return ((p - 1) / (2 - p)) ** ((p - 1) / p) / (
            mpmath.sqrt(mpmath.pi) * 2 ** (1 / p) * mpmath.sqrt(mpmath.gamma(2 / p) * mpmath.gamma(3 - 2 / p)))

    for r in (2.0, 4.0, 8.0):
        ev = poincare_sobolev_constant(r, math.pi)
        lo, hi = ev.bracket
        w = hi - lo
        grid = np.linspace(lo + 1e-9 * w, hi - 1e-9 * w, 10**4)
        gv = min(float(mp_talenti(p)) for p in grid) * math.pi ** (1 / r)
        report(f"AC8 poincare r={r} rel diff", abs(ev.value / gv - 1))
        assert abs(ev.value / gv - 1) <= 1e-8

    mk = mk_constant(1.1)
    assert not mk.infinite and math.isfinite(mk.log10_value)
    assert mk.details["min_one_minus_nu"] > 0 and mk.details["min_c_beta"] > 0
    report("AC8 log10 M(1.1)", mk.log10_value)

    K = 1.1
    root = nu_root(K)

    def mp_log_nu(eps):
        b = 1 + eps
        return mpmath.log(mpmath.mpf(10) ** (8 * b) * (2 * b - 2) / (2 * b - 1)
                          * (24 * mpmath.pi**2 * mpmath.mpf(K) ** 2) ** (2 * b))

    s0 = mpmath.log(root.epsilon_tilde)
    eps_oracle = float(mpmath.exp(mpmath.findroot(lambda s: mp_log_nu(mpmath.exp(s)), (s0 - 1, s0 + 1),
                                                  solver="anderson")))
    assert abs(root.beta_tilde - (1 + eps_oracle)) <= 1e-12
    assert abs(root.epsilon_tilde - eps_oracle) <= 1e-12 * eps_oracle
    eps = np.logspace(-40, 0, 4001)
    vals = np.array([log_nu(1.0, K, epsilon=e) for e in eps])
    assert np.all(np.diff(vals) > 0)
    assert int(np.count_nonzero(np.diff(np.sign(vals)))) == 1


@pytest.mark.criterion("AC9", "two-weight bound strictly below B*c and below the product bound")
def test_ac9_two_weight_bound_form(stability_reports):
    for B in np.logspace(-10, 6, 80):
        for pair in [(1.0, 2.0), (5.7832, 5.9), (30.47, 31.2), (100.0, 90.0)]:
            assert bound_lemma31(B, pair) < B * c_tilde(pair)
    for reps in stability_reports.values():
        for rep in reps:
            assert rep.bound_lemma31 < rep.B * rep.c_tilde_n
            assert rep.bound_lemma31 <= rep.bound_thm34

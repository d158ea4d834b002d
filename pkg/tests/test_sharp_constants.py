import math

import mpmath
import numpy as np
import pytest

from qcspectral.errors import DomainError
from qcspectral.sharp_constants import (
    c_beta,
    golden_section,
    jacobian_lbeta_bound,
    jacobian_lbeta_bound_log10,
    log_c_beta,
    log_nu,
    mk_beta_constant,
    mk_constant,
    nu_function,
    nu_root,
    poincare_sobolev_constant,
    qc_exponent,
    talenti_constant,
)

mpmath.mp.dps = 50


def mp_talenti(p):
    p = mpmath.mpf(p)
    return ((p - 1) / (2 - p)) ** ((p - 1) / p) / (
        mpmath.sqrt(mpmath.pi) * 2 ** (1 / p) * mpmath.sqrt(mpmath.gamma(2 / p) * mpmath.gamma(3 - 2 / p)))


def mp_log_nu(eps, K):
    b = 1 + mpmath.mpf(eps)
    return mpmath.log(mpmath.mpf(10) ** (8 * b) * (2 * b - 2) / (2 * b - 1)
                      * (24 * mpmath.pi**2 * mpmath.mpf(K) ** 2) ** (2 * b))


def grid_min(f, lo, hi, n=10**4):
    w = hi - lo
    g = np.linspace(lo + 1e-9 * w, hi - 1e-9 * w, n)
    v = np.array([f(x) for x in g])
    i = int(np.argmin(v))
    return g[i], v[i]


def test_golden_section_quadratic():
    x, fx = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-9)
    x, _ = golden_section(lambda x: x, 0.0, 1.0)
    assert x == 0.0


def test_talenti_four_thirds():
    p = 4.0 / 3.0
    closed = (1 / (math.sqrt(math.pi) * 2**0.75)) * 0.5**0.25 / (math.sqrt(math.pi) / 2)
    assert talenti_constant(p) == pytest.approx(closed, rel=1e-14)
    assert talenti_constant(p) == pytest.approx(float(mp_talenti(mpmath.mpf(4) / 3)), rel=1e-14)


def test_talenti_grid_against_mpmath():
    for p in np.linspace(1.01, 1.99, 50):
        assert talenti_constant(p) == pytest.approx(float(mp_talenti(p)), rel=1e-12)


def test_talenti_limits():
    assert talenti_constant(1 + 1e-8) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-6)
    assert talenti_constant(1.999) > talenti_constant(1.99) > talenti_constant(1.9)
    for p in (1.0, 2.0, 0.5):
        with pytest.raises(DomainError):
            talenti_constant(p)


def test_poincare_area_scaling():
    for r in (2.0, 4.0, 8.0):
        a = poincare_sobolev_constant(r, 1.7)
        b = poincare_sobolev_constant(r, 3.4)
        assert b.value / a.value == pytest.approx(2 ** (1 / r), rel=1e-14)
        assert a.minimizer_p == b.minimizer_p


@pytest.mark.parametrize("r", [2.0, 2.05, 2.2, 4.0, 8.0, 20.0])
def test_poincare_matches_grid_scan(r):
    ev = poincare_sobolev_constant(r, math.pi)
    lo, hi = ev.bracket

    def f(p):
        return float(mp_talenti(p)) * math.pi ** (1 / r)

    _, gv = grid_min(f, lo, hi)
    assert abs(ev.value / gv - 1) <= 1e-8
    assert ev.value <= gv * (1 + 1e-12)
    assert lo < ev.minimizer_p < hi


def test_poincare_interval_for_beta_two():
    ev = poincare_sobolev_constant(8.0, math.pi)
    assert ev.bracket == pytest.approx((1.6, 2.0))
    assert 1.6 < ev.minimizer_p < 2.0


def test_poincare_minimizer_location():
    # the unconstrained minimiser of the Talenti factor is near p = 1.072;
    # once the admissible interval starts to its right the infimum is at the left endpoint
    free = poincare_sobolev_constant(2.0, math.pi)
    assert free.minimizer_p == pytest.approx(1.07201, abs=1e-4)
    left = poincare_sobolev_constant(4.0, math.pi)
    assert left.minimizer_p - 4 / 3 <= 1e-8


def test_poincare_rejects_bad_input():
    with pytest.raises(DomainError):
        poincare_sobolev_constant(1.5, 1.0)
    with pytest.raises(DomainError):
        poincare_sobolev_constant(4.0, 0.0)


def test_nu_against_mpmath():
    for beta in (1.0001, 1.2, 1.5, 2.5):
        for K in (1.0, 1.1, 2.0):
            assert log_nu(beta, K) == pytest.approx(float(mp_log_nu(beta - 1, K)), rel=1e-12)


def test_nu_limit_and_monotone():
    assert nu_function(1.0, 1.1, epsilon=1e-300) < 1e-250
    grid = np.linspace(1.0001, 1.5, 200)
    vals = [log_nu(b, 1.1) for b in grid]
    assert np.all(np.diff(vals) > 0)


def test_nu_root_against_mpmath():
    for K in (1.05, 1.1, 1.2, 2.0):
        root = nu_root(K)
        s0 = mpmath.log(root.epsilon_tilde)
        oracle = mpmath.exp(mpmath.findroot(lambda s: mp_log_nu(mpmath.exp(s), K), (s0 - 1, s0 + 1),
                                            solver="anderson"))
        assert abs(root.epsilon_tilde - float(oracle)) <= 1e-12 * float(oracle)
        assert abs(root.beta_tilde - (1 + float(oracle))) <= 1e-12


def test_nu_root_unique_on_log_grid():
    K = 1.1
    eps_tilde = nu_root(K).epsilon_tilde
    assert eps_tilde == pytest.approx(6.0866e-14, rel=1e-4)
    eps = np.logspace(-30, 0, 2000)
    vals = np.array([log_nu(1.0, K, epsilon=e) for e in eps])
    assert np.all(np.diff(vals) > 0)
    assert int(np.sum(np.diff(np.sign(vals)) != 0)) == 1
    assert log_nu(1.0, K, epsilon=eps_tilde * 0.999) < 0 < log_nu(1.0, K, epsilon=eps_tilde * 1.001)


def test_c_beta_formula():
    K, eps = 1.1, 2e-14
    b = 1 + mpmath.mpf(eps)
    nu = mpmath.exp(mp_log_nu(eps, K))
    oracle = mpmath.mpf(10) ** 6 / ((2 * b - 1) * (1 - nu)) ** (1 / (2 * b))
    assert c_beta(1.0, K, epsilon=eps) == pytest.approx(float(oracle), rel=1e-12)
    assert log_c_beta(1.0, K, epsilon=nu_root(K).epsilon_tilde * 1.01) == math.inf


def test_qc_exponent_value():
    assert qc_exponent(1.1) == pytest.approx(1.1**2 * math.pi**2 * (2 + math.pi**2) ** 2 / (4 * math.log(3)))
    assert qc_exponent(1.1) > 100


@pytest.fixture(scope="module")
def mk11():
    return mk_constant(1.1)


def mp_log_mk(eps, delta, K, area=math.pi):
    eps, delta = mpmath.mpf(eps), mpmath.mpf(delta)
    b = 1 + eps
    p = 2 - delta
    r = 4 * b / (b - 1)
    A2 = (mp_talenti(p) * mpmath.pi ** (1 / r)) ** 2
    nu = mpmath.exp(mp_log_nu(eps, K))
    C = mpmath.mpf(10) ** 6 / ((2 * b - 1) * (1 - nu)) ** (1 / (2 * b))
    X = mpmath.mpf(K) ** 2 * mpmath.pi**2 * (2 + mpmath.pi**2) ** 2 / (4 * mpmath.log(3))
    bracket = C * K * mpmath.pi ** ((1 - b) / (2 * b)) / 2 * mpmath.exp(X) * mpmath.sqrt(area) \
        + mpmath.pi ** (1 / (2 * b))
    return mpmath.log10(A2 * bracket)


def test_mk_finite_with_positive_factors(mk11):
    d = mk11.details
    assert not mk11.infinite
    assert math.isfinite(mk11.log10_value) and mk11.log10_value > 0
    assert d["min_one_minus_nu"] > 0
    assert d["min_c_beta"] > 0
    assert 0 < mk11.minimizer_beta_offset < d["beta_star_offset"]
    assert d["beta_star_offset"] == d["beta_tilde_offset"]  # 1/(K-1) = 10 is far larger


def test_mk_regression_value(mk11):
    assert mk11.log10_value == pytest.approx(185.10, abs=0.01)


def test_mk_against_high_precision_formula(mk11):
    oracle = mp_log_mk(mk11.minimizer_beta_offset, mk11.details["minimizer_delta"], 1.1)
    assert mk11.log10_value == pytest.approx(float(oracle), rel=1e-9)


def test_mk_outer_minimum_against_grid(mk11):
    eps_star = mk11.details["beta_star_offset"]
    grid = np.linspace(0.01, 0.99, 99) * eps_star
    vals = [mk_beta_constant(1.1, epsilon=e).log10_value for e in grid]
    assert mk11.log10_value <= min(vals) + 1e-9


def test_mk_monotone_in_K():
    vals = [mk_constant(K).log10_value for K in (1.05, 1.1, 1.2)]
    assert vals[0] <= vals[1] <= vals[2]


def test_mk_deterministic():
    assert mk_constant(1.2).log10_value == mk_constant(1.2).log10_value


def test_mk_rejects_K_one():
    with pytest.raises(DomainError):
        mk_constant(1.0)


def test_mk_beta_admissibility():
    with pytest.raises(DomainError):
        mk_beta_constant(1.1, 1.5)


def test_jacobian_bound_properties():
    K = 1.1
    e = nu_root(K).epsilon_tilde
    one = jacobian_lbeta_bound_log10(K, domain_area=math.pi, epsilon=e / 2)
    two = jacobian_lbeta_bound_log10(K, domain_area=2 * math.pi, epsilon=e / 2)
    assert two - one == pytest.approx(math.log10(2), abs=1e-12)
    # dominates the L^beta norm of J = 1 on the disc, pi^{1/beta}
    assert one > math.log10(math.pi)
    grid = [jacobian_lbeta_bound_log10(K, epsilon=f * e) for f in np.linspace(0.05, 0.95, 19)]
    assert np.all(np.diff(grid) > 0)
    assert one == pytest.approx(344.84, abs=0.01)
    assert jacobian_lbeta_bound(K, epsilon=e / 2) == math.inf  # exceeds double range
    with pytest.raises(DomainError):
        jacobian_lbeta_bound_log10(K, 1.5)


def test_log_space_stays_finite():
    for K in (1.01, 1.5, 2.0, 3.0):
        root = nu_root(K)
        e = root.epsilon_tilde
        for f in (0.1, 0.5, 0.9):
            assert math.isfinite(log_c_beta(1.0, K, epsilon=f * e))
            assert math.isfinite(jacobian_lbeta_bound_log10(K, epsilon=f * e))
        assert math.isfinite(mk_constant(K).log10_value)

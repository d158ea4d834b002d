import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcspectral.errors import DomainError
from qcspectral.qc_core import (
    SymMatrix2,
    check_uniform_ellipticity,
    constant_field,
    dilatation_from_matrix,
    ellipticity_bound,
    field_from_dilatation,
    identity_field,
    matrix_from_dilatation,
    sym2_eigenvalues,
)

SQRT2 = math.sqrt(2.0)


def random_mu(n, rmax=0.99, seed=1):
    rng = np.random.default_rng(seed)
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def test_zero_dilatation_gives_identity():
    A = matrix_from_dilatation(0)
    assert (A.a11, A.a12, A.a22) == (1.0, 0.0, 1.0)


def test_spiral_dilatation_matrix():
    A = matrix_from_dilatation((1 + 1j) / 2)
    assert A.as_array() == pytest.approx(np.array([[1.0, -2.0], [-2.0, 5.0]]), abs=1e-14)


def test_ellipse_dilatation_matrix():
    A = matrix_from_dilatation(-1 / SQRT2)
    assert A.a11 == pytest.approx((SQRT2 + 1) ** 2, rel=1e-14)
    assert A.a22 == pytest.approx((SQRT2 - 1) ** 2, rel=1e-13)
    assert A.a12 == 0.0


@pytest.mark.parametrize("mu", [1.0, 1j, 0.8 + 0.8j])
def test_mu_outside_unit_disc_rejected(mu):
    with pytest.raises(DomainError):
        matrix_from_dilatation(mu)
    with pytest.raises(DomainError):
        ellipticity_bound(mu)


def test_dilatation_from_identity():
    assert dilatation_from_matrix(SymMatrix2(1.0, 0.0, 1.0)) == 0


def test_dilatation_from_ellipse_matrix():
    a = 0.5
    s = math.hypot(a, 1)
    mu = dilatation_from_matrix(SymMatrix2((s + a) ** 2, 0.0, (s - a) ** 2))
    assert mu.real == pytest.approx(-0.5 / math.sqrt(1.25), abs=1e-14)
    assert mu.imag == 0.0


def test_dilatation_from_spiral_matrix():
    mu = dilatation_from_matrix(SymMatrix2(1.0, -2.0, 5.0))
    assert abs(mu - (0.5 + 0.5j)) < 1e-15


def test_dilatation_rejects_bad_matrices():
    with pytest.raises(DomainError):
        dilatation_from_matrix(SymMatrix2(2.0, 0.0, 2.0))  # det 4
    with pytest.raises(DomainError):
        dilatation_from_matrix(SymMatrix2(-1.0, 0.0, -1.0))
    with pytest.raises(DomainError):
        dilatation_from_matrix(SymMatrix2(1.0, 0.0, 1.0 + 1e-6))


def test_det_tolerance_boundary():
    # 1e-9 off is accepted, not renormalised
    mu = dilatation_from_matrix(SymMatrix2(1.0, 0.0, 1.0 + 1e-9))
    assert abs(mu) < 1e-9


def test_ellipticity_bound_values():
    assert ellipticity_bound(0) == 1.0
    assert ellipticity_bound(1 / 3) == pytest.approx(2.0, rel=1e-15)
    assert ellipticity_bound(-1j / 3) == pytest.approx(2.0, rel=1e-15)
    assert ellipticity_bound(1 / SQRT2) == pytest.approx(3 + 2 * SQRT2, rel=1e-14)
    assert ellipticity_bound(1 / SQRT2) == pytest.approx(5.8284, abs=1e-4)


def test_check_uniform_ellipticity_examples():
    assert check_uniform_ellipticity(SymMatrix2(1.0, 0.0, 1.0), 1.0)
    assert check_uniform_ellipticity(SymMatrix2(1.0, -2.0, 5.0), 3 + 2 * SQRT2)
    assert check_uniform_ellipticity(SymMatrix2(1.0, -2.0, 5.0), 5.8284 + 1e-4)
    assert not check_uniform_ellipticity(SymMatrix2(4.0, 0.0, 0.25), 2.0)
    with pytest.raises(DomainError):
        check_uniform_ellipticity(SymMatrix2(1.0, 0.0, 1.0), 0.5)


def test_closed_form_eigenvalues():
    lo, hi = SymMatrix2(1.0, -2.0, 5.0).eigenvalues()
    assert lo == pytest.approx(3 - 2 * SQRT2, rel=1e-14)
    assert hi == pytest.approx(3 + 2 * SQRT2, rel=1e-15)
    rng = np.random.default_rng(3)
    e = rng.normal(size=(200, 3))
    lo, hi = sym2_eigenvalues(e[:, 0], e[:, 1], e[:, 2])
    ref = np.linalg.eigvalsh(np.stack([[e[:, 0], e[:, 1]], [e[:, 1], e[:, 2]]]).transpose(2, 0, 1))
    assert np.allclose(np.stack([lo, hi], 1), ref, atol=1e-12)


def test_round_trip_and_determinant_1000():
    for mu in random_mu(1000):
        A = matrix_from_dilatation(mu)
        assert abs(A.det - 1.0) <= 1e-12
        exact = Fraction(A.a11) * Fraction(A.a22) - Fraction(A.a12) ** 2
        assert abs(float(exact - 1)) <= 1e-12
        assert abs(dilatation_from_matrix(A) - mu) <= 1e-12


def test_entries_close_to_exact_values():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    for mu in random_mu(200, seed=5):
        m = mpmath.mpc(mu.real, mu.imag)
        d = 1 - abs(m) ** 2
        ref = [abs(1 - m) ** 2 / d, -2 * m.imag / d, abs(1 + m) ** 2 / d]
        A = matrix_from_dilatation(mu)
        for got, want in zip((A.a11, A.a12, A.a22), ref):
            assert abs(float((got - want) / want)) <= 4e-15


def test_eigenvalues_are_K_and_inverse():
    for mu in random_mu(1000, seed=7):
        K = ellipticity_bound(mu)
        A = matrix_from_dilatation(mu)
        lo, hi = A.eigenvalues()
        assert check_uniform_ellipticity(A, K)
        assert hi == pytest.approx(K, abs=1e-10 * max(1.0, K))
        assert lo == pytest.approx(1 / K, abs=1e-10)


@settings(max_examples=300, deadline=None)
@given(r=st.floats(0.0, 0.99), t=st.floats(-math.pi, math.pi))
def test_round_trip_property(r, t):
    mu = r * complex(math.cos(t), math.sin(t))
    A = matrix_from_dilatation(mu)
    assert abs(dilatation_from_matrix(A) - mu) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(k=st.floats(1.0, 50.0), phi=st.floats(0, math.pi))
def test_ovce_consistency(k, phi):
    # rotate diag(k, 1/k): eigenvalues within [1/K, K] with K = k
    c, s = math.cos(phi), math.sin(phi)
    A = SymMatrix2(k * c * c + s * s / k, (k - 1 / k) * c * s, k * s * s + c * c / k)
    if abs(A.det - 1.0) > 1e-8:
        return
    assert check_uniform_ellipticity(A, k, tol=1e-9)
    assert abs(dilatation_from_matrix(A)) <= (k - 1) / (k + 1) + 1e-12


def test_matrix_field_validation():
    f = identity_field()
    w = np.array([0.1 + 0.2j, -0.3j])
    f.validate(w)
    assert f(w).shape == (2, 3)
    g = field_from_dilatation(lambda w: np.full(np.shape(w), 0.5 + 0.5j), 1 / SQRT2, "spiral-like")
    g.validate(w)
    assert g.at(0.1, 0.1).as_array() == pytest.approx(np.array([[1, -2], [-2, 5]]))
    bad = field_from_dilatation(lambda w: np.full(np.shape(w), 0.5 + 0.5j), 0.1, "too small K")
    with pytest.raises(DomainError):
        bad.validate(w)


def test_constant_field_K():
    f = constant_field(SymMatrix2(4.0, 0.0, 0.25))
    assert f.ellipticity_K == pytest.approx(4.0)
    with pytest.raises(DomainError):
        constant_field(SymMatrix2(2.0, 0.0, 2.0))

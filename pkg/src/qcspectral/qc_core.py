"""Pointwise algebra between ellipticity matrices and complex dilatations.

A symmetric matrix ``A`` with ``det A = 1`` and the complex number ``mu``
with ``|mu| < 1`` carry the same information::

    mu = (a22 - a11 - 2i a12) / det(I + A)

    A  = [[|1 - mu|^2, -2 Im mu], [-2 Im mu, |1 + mu|^2]] / (1 - |mu|^2)

Dilatations are plain Python/NumPy complex numbers.  Matrix fields are
evaluated on complex arrays of points ``w = u + iv`` and return an array of
shape ``(..., 3)`` holding ``(a11, a12, a22)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

DET_TOL = 1e-8
ELLIPTICITY_TOL = 1e-10

__all__ = [
    "SymMatrix2",
    "MatrixField",
    "matrix_from_dilatation",
    "dilatation_from_matrix",
    "ellipticity_bound",
    "check_uniform_ellipticity",
    "matrix_entries_from_dilatation",
    "dilatation_from_entries",
    "sym2_eigenvalues",
    "identity_field",
    "constant_field",
    "field_from_dilatation",
]


@dataclass(frozen=True)
class SymMatrix2:
    """Symmetric 2x2 matrix stored by its three independent entries."""

    a11: float
    a12: float
    a22: float

    @property
    def det(self) -> float:
        """``a11*a22 - a12^2`` with error-free products (no cancellation loss)."""
        return float(_det_compensated(self.a11, self.a12, self.a22))

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    def eigenvalues(self) -> tuple[float, float]:
        """Ascending eigenvalues by the closed-form quadratic formula."""
        lo, hi = sym2_eigenvalues(self.a11, self.a12, self.a22)
        return float(lo), float(hi)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @classmethod
    def from_entries(cls, entries) -> "SymMatrix2":
        a11, a12, a22 = (float(x) for x in entries)
        return cls(a11, a12, a22)


def sym2_eigenvalues(a11, a12, a22):
    """Eigenvalues (lo, hi) of symmetric 2x2 matrices, vectorised.

    Uses ``mean -/+ sqrt(half_diff^2 + a12^2)``; the small root is recovered
    from ``det / hi`` to avoid cancellation when the matrix is far from
    isotropic.
    """
    a11 = np.asarray(a11, dtype=float)
    a12 = np.asarray(a12, dtype=float)
    a22 = np.asarray(a22, dtype=float)
    mean = 0.5 * (a11 + a22)
    rad = np.hypot(0.5 * (a11 - a22), a12)
    hi = mean + rad
    det = a11 * a22 - a12 * a12
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(mean > 0, det / hi, mean - rad)
    return lo, hi


def _check_mu(mu: complex) -> complex:
    mu = complex(mu)
    if not abs(mu) < 1.0:
        raise DomainError(f"|mu| = {abs(mu):.17g} >= 1: uniform ellipticity violated")
    return mu


def _split(a):
    c = 134217729.0 * a  # 2**27 + 1
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _one_minus_abs2(re, im):
    # 1 - re^2 - im^2 without the cancellation that costs ~eps/(1 - |mu|^2)
    p1, e1 = _two_prod(re, re)
    p2, e2 = _two_prod(im, im)
    s, f1 = _two_sum(1.0, -p1)
    s, f2 = _two_sum(s, -p2)
    return s + ((f1 + f2) - e1 - e2)


def _det_compensated(a11, a12, a22):
    p, e = _two_prod(a11, a22)
    q, f = _two_prod(a12, a12)
    s, g = _two_sum(p, -q)
    return s + ((g + e) - f)


def matrix_entries_from_dilatation(mu) -> np.ndarray:
    """Vectorised ``mu -> (a11, a12, a22)``; array of shape ``mu.shape + (3,)``."""
    mu = np.asarray(mu, dtype=complex)
    re, im = mu.real, mu.imag
    if np.any(re * re + im * im >= 1.0):
        raise DomainError("dilatation with |mu| >= 1 encountered")
    denom = _one_minus_abs2(re, im)
    if np.any(denom <= 0.0):
        raise DomainError("dilatation with |mu| >= 1 encountered")
    out = np.empty(mu.shape + (3,))
    out[..., 0] = ((1.0 - re) ** 2 + im * im) / denom
    out[..., 1] = -2.0 * im / denom
    out[..., 2] = ((1.0 + re) ** 2 + im * im) / denom
    return out


def _snap_to_unit_det(a11: float, a12: float, a22: float, target: float = 2.5e-13):
    """Nudge the rounded entries by at most two ulps each toward ``det = 1``.

    Rounding the entries to binary64 alone moves the determinant by up to
    ``~K ulp(K)``, which exceeds 1e-12 once ``K`` is near 200.
    """
    r0 = _det_compensated(a11, a12, a22) - 1.0
    if abs(r0) <= target:
        return a11, a12, a22
    best = (abs(r0), a11, a12, a22)
    steps = (-2, -1, 0, 1, 2)
    for i in steps:
        b11 = a11 + i * np.spacing(a11)
        for j in steps:
            b12 = a12 + j * np.spacing(abs(a12)) if a12 else a12
            for k in steps:
                b22 = a22 + k * np.spacing(a22)
                r = abs(_det_compensated(b11, b12, b22) - 1.0)
                if r < best[0]:
                    best = (r, b11, b12, b22)
    return float(best[1]), float(best[2]), float(best[3])


def dilatation_from_entries(entries) -> np.ndarray:
    """Vectorised ``(a11, a12, a22) -> mu``."""
    entries = np.asarray(entries, dtype=float)
    a11, a12, a22 = entries[..., 0], entries[..., 1], entries[..., 2]
    det_ipa = 1.0 + a11 + a22 + _det_compensated(a11, a12, a22)
    return (a22 - a11 - 2j * a12) / det_ipa


def matrix_from_dilatation(mu: complex) -> SymMatrix2:
    """Ellipticity matrix induced by the dilatation ``mu`` (det = 1)."""
    mu = _check_mu(mu)
    a11, a12, a22 = (float(x) for x in matrix_entries_from_dilatation(mu))
    return SymMatrix2(*_snap_to_unit_det(a11, a12, a22))


def dilatation_from_matrix(A: SymMatrix2) -> complex:
    """Complex dilatation agreed with ``A``.

    Raises DomainError unless ``a11 > 0`` and ``|det A - 1| <= 1e-8``; the
    matrix is never renormalised.
    """
    if not A.a11 > 0:
        raise DomainError(f"a11 = {A.a11!r} must be positive")
    if abs(A.det - 1.0) > DET_TOL:
        raise DomainError(f"det A = {A.det:.17g} differs from 1 by more than {DET_TOL}")
    det_ipa = 1.0 + A.trace + A.det
    if det_ipa == 0.0:
        raise DomainError("det(I + A) = 0: degenerate matrix")
    return complex(A.a22 - A.a11, -2.0 * A.a12) / det_ipa


def ellipticity_bound(mu: complex) -> float:
    """Quasiconformality coefficient ``K = (1 + |mu|) / (1 - |mu|)``."""
    m = abs(_check_mu(mu))
    return (1.0 + m) / (1.0 - m)


def check_uniform_ellipticity(A: SymMatrix2, K: float, tol: float = ELLIPTICITY_TOL) -> bool:
    """True iff both eigenvalues of ``A`` lie in ``[1/K - tol, K + tol]``."""
    if K < 1.0:
        raise DomainError(f"K = {K!r} must be >= 1")
    lo, hi = A.eigenvalues()
    return (1.0 / K - tol) <= lo and hi <= (K + tol)


Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MatrixField:
    """Coefficient field ``w -> A(w)`` together with its ellipticity constant.

    ``evaluator`` maps a complex array of points to an array of entries with
    trailing dimension 3.
    """

    evaluator: Evaluator
    ellipticity_K: float
    name: str = "custom"
    is_identity: bool = field(default=False, compare=False)

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return np.asarray(self.evaluator(w), dtype=float).reshape(w.shape + (3,))

    def at(self, u: float, v: float) -> SymMatrix2:
        return SymMatrix2.from_entries(self(np.array([complex(u, v)]))[0])

    def validate(self, w, tol: float = ELLIPTICITY_TOL) -> None:
        """Check det = 1 and eigenvalues in [1/K, K] at the sample points."""
        ent = self(w)
        det = ent[..., 0] * ent[..., 2] - ent[..., 1] ** 2
        bad = np.abs(det - 1.0) > 1e-10
        if np.any(bad):
            i = int(np.flatnonzero(bad.ravel())[0])
            raise DomainError(f"{self.name}: det A = {det.ravel()[i]:.17g} at w = {np.ravel(w)[i]}")
        lo, hi = sym2_eigenvalues(ent[..., 0], ent[..., 1], ent[..., 2])
        K = self.ellipticity_K
        bad = (lo < 1.0 / K - tol) | (hi > K + tol)
        if np.any(bad):
            i = int(np.flatnonzero(bad.ravel())[0])
            raise DomainError(
                f"{self.name}: eigenvalues ({lo.ravel()[i]:.6g}, {hi.ravel()[i]:.6g}) "
                f"outside [1/K, K] with K = {K:.6g}"
            )


def identity_field() -> MatrixField:
    def _identity(w):
        out = np.zeros(np.shape(w) + (3,))
        out[..., 0] = 1.0
        out[..., 2] = 1.0
        return out

    return MatrixField(_identity, 1.0, name="identity", is_identity=True)


def constant_field(A: SymMatrix2, name: str = "constant") -> MatrixField:
    if abs(A.det - 1.0) > DET_TOL:
        raise DomainError(f"det A = {A.det:.17g} differs from 1")
    entries = np.array([A.a11, A.a12, A.a22])
    lo, hi = A.eigenvalues()
    K = max(hi, 1.0 / lo)

    def _const(w):
        return np.broadcast_to(entries, np.shape(w) + (3,)).copy()

    return MatrixField(_const, K, name=name)


def field_from_dilatation(mu_of_w: Callable[[np.ndarray], np.ndarray], mu_sup: float,
                          name: str = "dilatation") -> MatrixField:
    """Matrix field induced pointwise by a dilatation function with ``sup|mu| = mu_sup``."""
    K = (1.0 + mu_sup) / (1.0 - mu_sup)

    def _eval(w):
        return matrix_entries_from_dilatation(mu_of_w(w))

    return MatrixField(_eval, K, name=name)


def _unit_phase(w) -> np.ndarray:
    """``w / conj(w)`` with the value 1 at the origin (a measure-zero convention)."""
    w = np.asarray(w, dtype=complex)
    out = np.ones_like(w)
    nz = w != 0
    out[nz] = w[nz] / np.conj(w[nz])
    return out


def quasiconformality_from_sup(mu_sup: float) -> float:
    if not 0.0 <= mu_sup < 1.0:
        raise DomainError(f"sup |mu| = {mu_sup!r} must lie in [0, 1)")
    return (1.0 + mu_sup) / (1.0 - mu_sup)


"""Gamma, Bessel J_m, Bessel zeros and the Dirichlet spectrum of the unit disc.

``gamma`` wraps ``math.gamma`` and ``bessel_j`` wraps ``scipy.special.jv``;
both are restricted to the ranges needed here.  Zeros are located by a
sign-change scan, seeded with McMahon's asymptotic expansion and polished
by safeguarded Newton steps using ``J_m' = (J_{m-1} - J_{m+1}) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, SolverError

MAX_ORDER = 20
MAX_ZERO_INDEX = 20
MAX_X = 200.0
MAX_SPECTRUM = 100

__all__ = ["gamma", "bessel_j", "bessel_jp", "bessel_zero", "mcmahon_guess", "disc_spectrum",
           "DiscSpectrum", "DiscMode"]


def gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma: x = {x!r} must be > 0")
    return math.gamma(x)


def _check_bessel_args(m: int, x) -> None:
    if int(m) != m or not 0 <= m <= MAX_ORDER:
        raise DomainError(f"bessel order m = {m!r} outside 0..{MAX_ORDER}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > MAX_X) or np.any(~np.isfinite(xa)):
        raise DomainError(f"bessel argument outside [0, {MAX_X:g}]")


def bessel_j(m: int, x):
    """First-kind Bessel function ``J_m(x)`` for ``0 <= m <= 20``, ``0 <= x <= 200``."""
    _check_bessel_args(m, x)
    out = special.jv(int(m), x)
    return float(out) if np.ndim(out) == 0 else out


def bessel_jp(m: int, x):
    """Derivative ``J_m'(x)``."""
    _check_bessel_args(m, x)
    if m == 0:
        out = -special.jv(1, x)
    else:
        out = 0.5 * (special.jv(m - 1, x) - special.jv(m + 1, x))
    return float(out) if np.ndim(out) == 0 else out


def mcmahon_guess(m: int, n: int) -> float:
    """McMahon's large-``n`` expansion of ``j_{m,n}`` (three correction terms)."""
    mu = 4.0 * m * m
    b = (n + 0.5 * m - 0.25) * math.pi
    x = 1.0 / (8.0 * b)
    return b - (mu - 1) * x * (1 + 4 * (7 * mu - 31) * x * x / 3
                               + 32 * (83 * mu * mu - 982 * mu + 3779) * x**4 / 15)


@lru_cache(maxsize=None)
def _zeros(m: int, count: int) -> tuple[float, ...]:
    step = 0.25
    x = max(step, 0.5 * m)  # J_m has no zero below m
    f_prev = special.jv(m, x)
    found: list[float] = []
    while len(found) < count:
        x_next = x + step
        if x_next > MAX_X:
            raise SolverError(f"bessel_zero: fewer than {count} zeros of J_{m} below {MAX_X}")
        f_next = special.jv(m, x_next)
        if f_prev == 0.0:
            found.append(x)
        elif f_prev * f_next < 0:
            found.append(_polish(m, len(found) + 1, x, x_next))
        x, f_prev = x_next, f_next
    return tuple(found)


def _polish(m: int, n: int, lo: float, hi: float) -> float:
    x = mcmahon_guess(m, n)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    f_lo = special.jv(m, lo)
    for _ in range(100):
        fx = special.jv(m, x)
        if fx == 0.0:
            return x
        if (fx < 0) == (f_lo < 0):
            lo, f_lo = x, fx
        else:
            hi = x
        dfx = 0.5 * (special.jv(m - 1, x) - special.jv(m + 1, x)) if m else -special.jv(1, x)
        x_new = x - fx / dfx if dfx != 0 else 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4 * np.finfo(float).eps * x:
            return x_new
        x = x_new
    raise SolverError(f"bessel_zero: Newton did not converge for j_{m},{n}")


def bessel_zero(m: int, n: int) -> float:
    """The ``n``-th positive zero ``j_{m,n}`` of ``J_m`` (``m, n <= 20``)."""
    if int(m) != m or not 0 <= m <= MAX_ORDER:
        raise DomainError(f"bessel order m = {m!r} outside 0..{MAX_ORDER}")
    if int(n) != n or not 1 <= n <= MAX_ZERO_INDEX:
        raise DomainError(f"zero index n = {n!r} outside 1..{MAX_ZERO_INDEX}")
    return _zeros(int(m), MAX_ZERO_INDEX)[int(n) - 1]


@dataclass(frozen=True)
class DiscMode:
    lam: float
    m: int
    n: int
    multiplicity: int


@dataclass(frozen=True)
class DiscSpectrum:
    """First eigenvalues of the Dirichlet Laplacian on the unit disc, multiplicities expanded."""

    entries: tuple[DiscMode, ...]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i) -> DiscMode:
        return self.entries[i]


def disc_spectrum(count: int) -> DiscSpectrum:
    """``j_{m,n}^2`` in ascending order; modes with ``m >= 1`` appear twice."""
    if int(count) != count or not 1 <= count <= MAX_SPECTRUM:
        raise DomainError(f"count = {count!r} outside 1..{MAX_SPECTRUM}")
    modes = [
        DiscMode(float(bessel_zero(m, n) ** 2), m, n, 1 if m == 0 else 2)
        for m in range(MAX_ORDER + 1)
        for n in range(1, MAX_ZERO_INDEX + 1)
    ]
    modes.sort(key=lambda e: (e.lam, e.m))
    out: list[DiscMode] = []
    for e in modes:
        out.extend([e] * e.multiplicity)
        if len(out) >= count:
            break
    return DiscSpectrum(tuple(out[:count]))

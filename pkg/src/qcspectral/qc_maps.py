"""Closed-form quasiconformal map families and their Jacobian weights.

Each family supplies ``forward`` (source domain -> unit disc), ``inverse``,
both Jacobians and the complex dilatation of ``forward``.  Points are complex
NumPy arrays ``w = u + iv``.

Jacobians, with ``J = |f_w|^2 - |f_wbar|^2``:

* spiral ``w exp(2i log|w|)``: ``f_w = (1 + i) e^{..}``, ``f_wbar = i w/wbar e^{..}``,
  so ``J = 2 - 1 = 1`` and ``mu = (1 + i)/2 * w/wbar``;
* ellipse ``s w - a wbar`` with ``s = sqrt(a^2 + 1)``: ``J = s^2 - a^2 = 1``;
* petal ``(rho/sqrt 2) e^{2i theta} - 1``: ``f_w = 3/(2 sqrt 2) (w/wbar)^{1/2}``,
  ``f_wbar = -1/(2 sqrt 2) (w/wbar)^{3/2}``, so ``J = 9/8 - 1/8 = 1``;
* radial power ``g(z) = z|z|^t`` (the inverse): ``g_z = (1 + t/2)|z|^t``,
  ``g_zbar = (t/2)|z|^t z/zbar``, so ``J_g = (1 + t)|z|^{2t}``.  The forward
  map ``w|w|^{-t/(1+t)}`` has ``mu = -(t/(t+2)) w/wbar`` and
  ``J = (1/(1+t)) |w|^{-2t/(1+t)}``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .qc_core import MatrixField, _unit_phase, field_from_dilatation, identity_field

SQRT2 = math.sqrt(2.0)

__all__ = [
    "QCMap",
    "SpiralMap",
    "EllipseMap",
    "PetalMap",
    "RadialPowerMap",
    "IdentityMap",
    "spiral_map",
    "ellipse_map",
    "petal_map",
    "radial_power_map",
    "identity_map",
    "WeightField",
    "weight_field",
    "constant_weight",
    "beta_regularity_integral",
    "example_a_matrix_polar",
    "example_b_matrix",
    "example_c_matrix_polar",
]


def _c(w) -> np.ndarray:
    return np.asarray(w, dtype=complex)


class QCMap(ABC):
    """Quasiconformal homeomorphism of a source domain onto the unit disc."""

    family: str = "map"
    theta_range: tuple[float, float] = (-math.pi, math.pi)

    @property
    @abstractmethod
    def K(self) -> float:
        """Quasiconformality coefficient ``(1 + sup|mu|)/(1 - sup|mu|)``."""

    @abstractmethod
    def forward(self, w) -> np.ndarray: ...

    @abstractmethod
    def inverse(self, z) -> np.ndarray: ...

    @abstractmethod
    def jacobian_forward(self, w) -> np.ndarray: ...

    @abstractmethod
    def dilatation(self, w) -> np.ndarray: ...

    @abstractmethod
    def source_domain(self): ...

    @property
    def mu_sup(self) -> float:
        return (self.K - 1.0) / (self.K + 1.0)

    @property
    def unit_jacobian(self) -> bool:
        return False

    def jacobian_inverse(self, z) -> np.ndarray:
        """``|J(z, phi^{-1})|`` on the disc side."""
        return 1.0 / self.jacobian_forward(self.inverse(z))

    def matrix_field(self) -> MatrixField:
        return field_from_dilatation(self.dilatation, self.mu_sup, name=self.family)

    def describe(self) -> dict:
        return {"family": self.family}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.describe().items() if k != "family")
        return f"{type(self).__name__}({args})"


class SpiralMap(QCMap):
    """``w exp(2i log|w|)`` on the unit disc; radial lines become spirals."""

    family = "spiral"

    @property
    def K(self) -> float:
        return 3.0 + 2.0 * SQRT2

    @property
    def unit_jacobian(self) -> bool:
        return True

    def forward(self, w):
        w = _c(w)
        out = np.zeros_like(w)
        nz = w != 0
        out[nz] = w[nz] * np.exp(2j * np.log(np.abs(w[nz])))
        return out

    def inverse(self, z):
        z = _c(z)
        out = np.zeros_like(z)
        nz = z != 0
        out[nz] = z[nz] * np.exp(-2j * np.log(np.abs(z[nz])))
        return out

    def jacobian_forward(self, w):
        return np.ones(np.shape(w))

    def dilatation(self, w):
        return 0.5 * (1.0 + 1.0j) * _unit_phase(w)

    def source_domain(self):
        from .mesh import UnitDisc

        return UnitDisc()


class EllipseMap(QCMap):
    """Linear map ``s w - a wbar`` of the ellipse with semi-axes ``s +/- a`` onto the disc."""

    family = "ellipse"

    def __init__(self, a: float):
        if not a >= 0:
            raise DomainError(f"ellipse parameter a = {a!r} must be >= 0")
        self.a = float(a)
        self.s = math.hypot(self.a, 1.0)

    @property
    def K(self) -> float:
        m = self.a / self.s
        # (1 + m)/(1 - m) = (s + a)^2 without cancellation
        return (self.s + self.a) ** 2 if m < 1 else math.inf

    @property
    def mu_sup(self) -> float:
        return self.a / self.s

    @property
    def unit_jacobian(self) -> bool:
        return True

    def forward(self, w):
        w = _c(w)
        return self.s * w - self.a * np.conj(w)

    def inverse(self, z):
        z = _c(z)
        return self.s * z + self.a * np.conj(z)

    def jacobian_forward(self, w):
        return np.ones(np.shape(w))

    def dilatation(self, w):
        return np.full(np.shape(w), -self.a / self.s, dtype=complex)

    def source_domain(self):
        from .mesh import Ellipse

        return Ellipse(self.a)

    def describe(self) -> dict:
        return {"family": self.family, "a": self.a}


class PetalMap(QCMap):
    """``(rho/sqrt 2) e^{2i theta} - 1`` from the rose petal onto the disc; ``0 -> -1``."""

    family = "petal"
    theta_range = (-math.pi / 4, math.pi / 4)

    @property
    def K(self) -> float:
        return 2.0

    @property
    def unit_jacobian(self) -> bool:
        return True

    def forward(self, w):
        w = _c(w)
        return np.abs(w) / SQRT2 * np.exp(2j * np.angle(w)) - 1.0

    def inverse(self, z):
        zeta = _c(z) + 1.0
        return SQRT2 * np.sqrt(np.abs(zeta)) * np.sqrt(zeta)

    def jacobian_forward(self, w):
        return np.ones(np.shape(w))

    def dilatation(self, w):
        return -_unit_phase(w) / 3.0

    def source_domain(self):
        from .mesh import Petal

        return Petal()


class RadialPowerMap(QCMap):
    """Radial stretch with inverse ``z|z|^t``; Jacobian weight ``(1 + t)|z|^{2t}``."""

    family = "radial"

    def __init__(self, t: float):
        if not t > -1.0:
            raise DomainError(f"radial exponent t = {t!r} must be > -1")
        self.t = float(t)
        self._e = -self.t / (1.0 + self.t)

    @property
    def K(self) -> float:
        return max(1.0 + self.t, 1.0 / (1.0 + self.t))

    @property
    def mu_sup(self) -> float:
        return abs(self.t) / (self.t + 2.0)

    @property
    def unit_jacobian(self) -> bool:
        return self.t == 0.0

    def forward(self, w):
        w = _c(w)
        out = np.zeros_like(w)
        nz = w != 0
        out[nz] = w[nz] * np.abs(w[nz]) ** self._e
        return out

    def inverse(self, z):
        z = _c(z)
        out = np.zeros_like(z)
        nz = z != 0
        out[nz] = z[nz] * np.abs(z[nz]) ** self.t
        return out

    def jacobian_forward(self, w):
        r = np.abs(_c(w))
        with np.errstate(divide="ignore"):
            return r ** (2.0 * self._e) / (1.0 + self.t)

    def jacobian_inverse(self, z):
        r = np.abs(_c(z))
        with np.errstate(divide="ignore"):
            return (1.0 + self.t) * r ** (2.0 * self.t)

    def dilatation(self, w):
        return -(self.t / (self.t + 2.0)) * _unit_phase(w)

    def matrix_field(self) -> MatrixField:
        if self.t == 0.0:
            return identity_field()
        return super().matrix_field()

    def source_domain(self):
        from .mesh import UnitDisc

        return UnitDisc()

    def describe(self) -> dict:
        return {"family": self.family, "t": self.t}


class IdentityMap(QCMap):
    family = "identity"

    @property
    def K(self) -> float:
        return 1.0

    @property
    def unit_jacobian(self) -> bool:
        return True

    def forward(self, w):
        return _c(w).copy()

    def inverse(self, z):
        return _c(z).copy()

    def jacobian_forward(self, w):
        return np.ones(np.shape(w))

    def dilatation(self, w):
        return np.zeros(np.shape(w), dtype=complex)

    def matrix_field(self) -> MatrixField:
        return identity_field()

    def source_domain(self):
        from .mesh import UnitDisc

        return UnitDisc()


def spiral_map() -> SpiralMap:
    return SpiralMap()


def ellipse_map(a: float) -> EllipseMap:
    return EllipseMap(a)


def petal_map() -> PetalMap:
    return PetalMap()


def radial_power_map(t: float) -> RadialPowerMap:
    return RadialPowerMap(t)


def identity_map() -> IdentityMap:
    return IdentityMap()


# --------------------------------------------------------------------------
# printed coefficient matrices, in the polar form they are usually quoted in
# --------------------------------------------------------------------------


def example_a_matrix_polar(theta) -> np.ndarray:
    """Spiral coefficient matrix as a function of the polar angle; entries (a11, a12, a22)."""
    phi = 2.0 * np.asarray(theta, dtype=float) + math.pi / 4
    c = 2.0 * SQRT2 * np.cos(phi)
    s = -2.0 * SQRT2 * np.sin(phi)
    return np.stack([3.0 - c, s, 3.0 + c], axis=-1)


def example_b_matrix(a: float) -> np.ndarray:
    s = math.hypot(a, 1.0)
    return np.array([(s + a) ** 2, 0.0, 1.0 / (s + a) ** 2])


def example_c_matrix_polar(theta) -> np.ndarray:
    """Petal coefficient matrix as a function of the polar angle."""
    theta = np.asarray(theta, dtype=float)
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    off = 0.75 * np.sin(2.0 * theta)
    return np.stack([2.0 * c2 + 0.5 * s2, off, 0.5 * c2 + 2.0 * s2], axis=-1)


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightField:
    """Positive density ``z -> h(z)`` on the disc side of a map."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = "weight"
    is_unit: bool = False

    def __call__(self, z) -> np.ndarray:
        z = _c(z)
        return np.broadcast_to(np.asarray(self.evaluator(z), dtype=float), z.shape)


def weight_field(qcmap: QCMap) -> WeightField:
    """``h(z) = |J(z, phi^{-1})|`` in closed form."""
    if qcmap.unit_jacobian:
        return constant_weight(1.0, name=f"h[{qcmap.family}]")
    return WeightField(qcmap.jacobian_inverse, name=f"h[{qcmap.family}]")


def constant_weight(c: float, name: str | None = None) -> WeightField:
    if not c > 0:
        raise DomainError(f"weight constant {c!r} must be positive")
    c = float(c)
    return WeightField(lambda z: np.full(np.shape(z), c), name=name or f"const[{c:g}]", is_unit=c == 1.0)


def beta_regularity_integral(qcmap: QCMap, beta: float, quadrature=None) -> float:
    """``iint |J(w, phi)|^{1 - beta}`` over the source domain; ``inf`` on divergence."""
    from .quadrature import QuadratureSpec, polar_integrate

    if not beta > 1.0:
        raise DomainError(f"beta = {beta!r} must be > 1")
    spec = quadrature or QuadratureSpec()
    res = polar_integrate(qcmap.source_domain(),
                          lambda w: np.abs(qcmap.jacobian_forward(w)) ** (1.0 - beta), spec)
    return math.inf if res.diverged else res.value

"""Planar domains and conforming P1 triangulations.

Meshes are built from a structured hexagonal ring mesh of the unit disc
(ring ``k`` carries ``6k`` equally spaced vertices) and transported to the
target domain:

* disc: used as is;
* ellipse: radial scaling by the boundary radius ``R(theta)``;
* petal: conformally graded toward the boundary point -1, then pulled back
  through the closed-form inverse of the petal map;
* mapped disc: pulled back through ``map.inverse``.

Refinement splits every triangle into four and projects new boundary
midpoints onto the exact boundary.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, MeshError, ResourceLimitError

if TYPE_CHECKING:  # pragma: no cover
    from .qc_maps import QCMap

MAX_VERTICES = 2_000_000
BOUNDARY_TOL = 1e-9
SQRT2 = math.sqrt(2.0)

__all__ = [
    "PlanarDomain",
    "UnitDisc",
    "Ellipse",
    "Petal",
    "MappedDisc",
    "TriangleMesh",
    "QualityReport",
    "triangulate",
    "refine",
    "mesh_quality",
    "disc_ring_mesh",
    "domain_from_name",
]


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------


class PlanarDomain(ABC):
    """Bounded domain, star-shaped about the origin, described in polar form."""

    kind: str = "domain"
    theta_range: tuple[float, float] = (-math.pi, math.pi)

    @abstractmethod
    def radius(self, theta) -> np.ndarray:
        """Distance from the origin to the boundary along the ray ``theta``."""

    @abstractmethod
    def area(self) -> float: ...

    @abstractmethod
    def diameter(self) -> float: ...

    def project_to_boundary(self, pts: np.ndarray) -> np.ndarray:
        """Radial projection of ``(N, 2)`` points onto the boundary."""
        pts = np.asarray(pts, dtype=float)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        r = self.radius(theta)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])

    def boundary_residual(self, pts: np.ndarray) -> np.ndarray:
        """``|p| - R(theta(p))``: zero on the boundary, negative inside."""
        pts = np.asarray(pts, dtype=float)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        return np.hypot(pts[:, 0], pts[:, 1]) - self.radius(theta)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


class UnitDisc(PlanarDomain):
    kind = "disc"

    def radius(self, theta):
        return np.ones_like(np.asarray(theta, dtype=float))

    def area(self) -> float:
        return math.pi

    def diameter(self) -> float:
        return 2.0

    def project_to_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts / np.hypot(pts[:, 0], pts[:, 1])[:, None]

    def __repr__(self) -> str:
        return "UnitDisc()"


class Ellipse(PlanarDomain):
    """Ellipse with semi-axes ``sqrt(a^2+1) + a`` (along u) and ``sqrt(a^2+1) - a``."""

    kind = "ellipse"

    def __init__(self, a: float):
        if not a >= 0:
            raise DomainError(f"ellipse parameter a = {a!r} must be >= 0")
        self.a = float(a)
        s = math.hypot(self.a, 1.0)
        self.major = s + self.a
        # s - a written without cancellation
        self.minor = 1.0 / self.major

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        c, s = np.cos(theta), np.sin(theta)
        return 1.0 / np.sqrt((c / self.major) ** 2 + (s / self.minor) ** 2)

    def area(self) -> float:
        return math.pi * self.major * self.minor

    def diameter(self) -> float:
        return 2.0 * self.major

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a}

    def __repr__(self) -> str:
        return f"Ellipse(a={self.a!r})"


class Petal(PlanarDomain):
    """Rose petal ``rho < 2 sqrt(2) cos(2 theta)``, ``|theta| < pi/4``; corner at 0."""

    kind = "petal"
    theta_range = (-math.pi / 4, math.pi / 4)

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = 2.0 * SQRT2 * np.cos(2.0 * theta)
        return np.where(np.abs(theta) <= math.pi / 4, np.maximum(r, 0.0), 0.0)

    def area(self) -> float:
        return math.pi

    def diameter(self) -> float:
        return 2.0 * SQRT2

    def project_to_boundary(self, pts):
        # Rays from the corner meet the boundary only once, so a chord that
        # starts at the corner cannot be projected radially; project through
        # the petal map instead (disc centre <-> (sqrt 2, 0)).
        z = _petal_forward(np.asarray(pts, dtype=float))
        z = z / np.abs(z)
        return _petal_inverse(z)

    def boundary_residual(self, pts):
        return np.abs(_petal_forward(np.asarray(pts, dtype=float))) - 1.0

    def __repr__(self) -> str:
        return "Petal()"


def _petal_forward(pts: np.ndarray) -> np.ndarray:
    w = pts[:, 0] + 1j * pts[:, 1]
    rho, theta = np.abs(w), np.angle(w)
    return rho / SQRT2 * np.exp(2j * theta) - 1.0


def _petal_inverse(z: np.ndarray) -> np.ndarray:
    zeta = np.asarray(z, dtype=complex) + 1.0
    w = SQRT2 * np.sqrt(np.abs(zeta)) * np.sqrt(zeta)
    return np.column_stack([w.real, w.imag])


class MappedDisc(PlanarDomain):
    """Preimage of the unit disc under ``map.forward``."""

    kind = "mapped"

    def __init__(self, qcmap: "QCMap"):
        self.map = qcmap
        self.theta_range = getattr(qcmap, "theta_range", (-math.pi, math.pi))

    def _ray_radius(self, theta: float) -> float:
        f = lambda r: abs(complex(self.map.forward(np.array([r * np.exp(1j * theta)]))[0])) - 1.0
        hi = 1.0
        while f(hi) < 0:
            hi *= 2.0
            if hi > 1e6:
                raise DomainError("mapped disc is unbounded along a ray")
        return brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        flat = np.array([self._ray_radius(float(t)) for t in theta.ravel()])
        return flat.reshape(theta.shape)

    def area(self) -> float:
        from .quadrature import polar_integrate

        return polar_integrate(UnitDisc(), self.map.jacobian_inverse).value

    def diameter(self) -> float:
        theta = np.linspace(-math.pi, math.pi, 181)
        pts = self.radius(theta) * np.exp(1j * theta)
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    def project_to_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        z = self.map.forward(pts[:, 0] + 1j * pts[:, 1])
        w = self.map.inverse(z / np.abs(z))
        return np.column_stack([w.real, w.imag])

    def boundary_residual(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.abs(self.map.forward(pts[:, 0] + 1j * pts[:, 1])) - 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "map": self.map.describe()}

    def __repr__(self) -> str:
        return f"MappedDisc({self.map!r})"


def domain_from_name(name: str, a: float = 0.0) -> PlanarDomain:
    if name == "disc":
        return UnitDisc()
    if name == "ellipse":
        return Ellipse(a)
    if name == "petal":
        return Petal()
    raise DomainError(f"unknown domain {name!r} (expected disc, ellipse or petal)")


# --------------------------------------------------------------------------
# meshes
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Conforming triangulation with counterclockwise triangles.

    ``boundary`` holds the sorted indices of vertices on the domain boundary.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    h_max: float
    domain: PlanarDomain | None = None

    def __post_init__(self):
        for name in ("vertices", "triangles", "boundary"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def boundary_vertices(self) -> np.ndarray:
        return self.boundary

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def points(self) -> np.ndarray:
        """Vertices as complex numbers."""
        return self.vertices[:, 0] + 1j * self.vertices[:, 1]

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def total_area(self) -> float:
        return float(np.sum(self.signed_areas()))

    def interior(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    def edge_midpoints(self) -> np.ndarray:
        """Complex midpoints of the local edges (01, 12, 20); shape ``(M, 3)``."""
        z = self.points[self.triangles]
        return 0.5 * np.stack([z[:, 0] + z[:, 1], z[:, 1] + z[:, 2], z[:, 2] + z[:, 0]], axis=1)

    def validate(self) -> None:
        """Raise MeshError if any structural invariant fails."""
        nv = self.n_vertices
        t = self.triangles
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must have shape (M, 3)")
        if t.size and (t.min() < 0 or t.max() >= nv):
            raise MeshError("triangle index out of range")
        area = self.signed_areas()
        p = self.vertices[t]
        scale = np.max(np.abs(p[:, 1:] - p[:, :1]), axis=(1, 2)) ** 2 if len(t) else np.zeros(0)
        bad = area <= 1e-14 * scale
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise MeshError(f"triangle {i} has non-positive signed area {area[i]:.3e}")
        keys, counts = _edge_keys_counts(t, nv)
        if np.any(counts > 2):
            raise MeshError("non-manifold edge shared by more than two triangles")
        bnd_edges = keys[counts == 1]
        on_bnd = np.zeros(nv, dtype=bool)
        on_bnd[self.boundary] = True
        ends = np.stack([bnd_edges // nv, bnd_edges % nv], axis=1)
        if not np.all(on_bnd[ends]):
            raise MeshError("hanging vertex: a free edge has an endpoint off the boundary set")
        if self.domain is not None and len(self.boundary):
            res = self.domain.boundary_residual(self.vertices[self.boundary])
            worst = float(np.max(np.abs(res)))
            if worst > BOUNDARY_TOL:
                raise MeshError(f"boundary vertex off the domain boundary by {worst:.3e}")

    def to_json_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary": self.boundary.tolist(),
            "h_max": float(self.h_max),
        }

    @classmethod
    def from_json_dict(cls, data: dict, domain: PlanarDomain | None = None) -> "TriangleMesh":
        return cls(
            np.asarray(data["vertices"], dtype=float).reshape(-1, 2),
            np.asarray(data["triangles"], dtype=np.int64).reshape(-1, 3),
            np.asarray(data["boundary"], dtype=np.int64),
            float(data["h_max"]),
            domain,
        )


def _edge_keys_counts(triangles: np.ndarray, nv: int):
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e.sort(axis=1)
    keys = e[:, 0].astype(np.int64) * nv + e[:, 1]
    return np.unique(keys, return_counts=True)


def _longest_edge(vertices: np.ndarray, triangles: np.ndarray) -> float:
    p = vertices[triangles]
    lengths = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
    return float(lengths.max())


def disc_ring_mesh(n_rings: int):
    """Hexagonal ring mesh of the unit disc.

    Returns ``(vertices, triangles, boundary)``; ring ``k`` (radius ``k/n``)
    has ``6k`` vertices, consecutive rings are zipped by angle.
    """
    if n_rings < 1:
        raise DomainError("need at least one ring")
    nv = 1 + 3 * n_rings * (n_rings + 1)
    verts = np.zeros((nv, 2))
    starts = [0]
    tris: list[np.ndarray] = []
    offset = 1
    for k in range(1, n_rings + 1):
        m = 6 * k
        ang = 2.0 * math.pi * np.arange(m) / m
        verts[offset:offset + m, 0] = (k / n_rings) * np.cos(ang)
        verts[offset:offset + m, 1] = (k / n_rings) * np.sin(ang)
        starts.append(offset)
        offset += m
    # exact axis points keep symmetric meshes symmetric
    verts[np.abs(verts) < 1e-15] = 0.0
    tris.append(np.stack([np.zeros(6, dtype=np.int64), 1 + np.arange(6), 1 + (np.arange(6) + 1) % 6], axis=1))
    for k in range(2, n_rings + 1):
        n_in, n_out = 6 * (k - 1), 6 * k
        s_in, s_out = starts[k - 1], starts[k]
        i = j = 0
        out = []
        while i < n_in or j < n_out:
            next_in = (i + 1) / n_in
            next_out = (j + 1) / n_out
            if j < n_out and (i == n_in or next_out <= next_in):
                out.append((s_in + i % n_in, s_out + j, s_out + (j + 1) % n_out))
                j += 1
            else:
                out.append((s_in + i, s_out + j % n_out, s_in + (i + 1) % n_in))
                i += 1
        tris.append(np.asarray(out, dtype=np.int64))
    triangles = np.concatenate(tris)
    boundary = np.arange(starts[n_rings], nv, dtype=np.int64)
    return verts, triangles, boundary


def _projected_vertices(n_rings: int) -> int:
    return 1 + 3 * n_rings * (n_rings + 1)


def _petal_vertices(disc_verts: np.ndarray, corner: int, grading: float) -> np.ndarray:
    z = disc_verts[:, 0] + 1j * disc_verts[:, 1]
    z[corner] = -1.0
    if grading:
        z = (z - grading) / (1.0 - grading * z)
        z[corner] = -1.0
    return _petal_inverse(z)


def _build(domain: PlanarDomain, n_rings: int, petal_grading: float):
    verts, tris, bnd = disc_ring_mesh(n_rings)
    if isinstance(domain, UnitDisc):
        pass
    elif isinstance(domain, Ellipse):
        theta = np.arctan2(verts[:, 1], verts[:, 0])
        verts = verts * domain.radius(theta)[:, None]
    elif isinstance(domain, Petal):
        corner = int(bnd[0] + 3 * n_rings)
        verts = _petal_vertices(verts, corner, petal_grading)
        verts[corner] = 0.0
        keep = np.ones(len(bnd), dtype=bool)
        keep[3 * n_rings] = False
        verts[bnd[keep]] = domain.project_to_boundary(verts[bnd[keep]])
    elif isinstance(domain, MappedDisc):
        w = domain.map.inverse(verts[:, 0] + 1j * verts[:, 1])
        verts = np.column_stack([w.real, w.imag])
    else:
        raise DomainError(f"cannot triangulate {domain!r}")
    verts[bnd] = np.where(np.isfinite(verts[bnd]), verts[bnd], 0.0)
    return verts, tris, bnd


def triangulate(domain: PlanarDomain, target_h: float, petal_grading: float = 0.25) -> TriangleMesh:
    """Conforming mesh of ``domain`` with longest edge at most ``1.5 * target_h``."""
    diam = domain.diameter()
    if not 0.0 < target_h < diam:
        raise DomainError(f"target_h = {target_h!r} must lie in (0, {diam:.6g})")
    stretch = {"ellipse": getattr(domain, "major", 1.0), "petal": 2.0}.get(domain.kind, 1.0)
    n_rings = math.ceil(stretch / target_h)
    for _ in range(8):
        if _projected_vertices(n_rings) > MAX_VERTICES:
            raise ResourceLimitError(
                f"target_h = {target_h!r} needs ~{_projected_vertices(n_rings):.3g} vertices "
                f"(limit {MAX_VERTICES})"
            )
        verts, tris, bnd = _build(domain, n_rings, petal_grading)
        h = _longest_edge(verts, tris)
        if h <= 1.5 * target_h:
            break
        n_rings = math.ceil(n_rings * h / (1.4 * target_h))
    else:  # pragma: no cover - the size loop converges in one or two passes
        raise MeshError("could not reach the requested mesh size")
    mesh = TriangleMesh(verts, tris, np.sort(bnd), h, domain)
    mesh.validate()
    return mesh


def refine(mesh: TriangleMesh, domain: PlanarDomain | None = None) -> TriangleMesh:
    """Uniform red refinement; boundary midpoints are projected onto the boundary."""
    domain = domain if domain is not None else mesh.domain
    nv = mesh.n_vertices
    t = mesh.triangles
    local = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    srt = np.sort(local, axis=1)
    keys = srt[:, 0].astype(np.int64) * nv + srt[:, 1]
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    a, b = uniq // nv, uniq % nv
    mids = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
    is_bnd = counts == 1
    if domain is not None and np.any(is_bnd):
        mids[is_bnd] = domain.project_to_boundary(mids[is_bnd])
    verts = np.concatenate([mesh.vertices, mids])
    m = len(t)
    mid = (nv + inverse).reshape(3, m).T  # columns: m01, m12, m20
    v0, v1, v2 = t[:, 0], t[:, 1], t[:, 2]
    m01, m12, m20 = mid[:, 0], mid[:, 1], mid[:, 2]
    tris = np.concatenate([
        np.stack([v0, m01, m20], axis=1),
        np.stack([m01, v1, m12], axis=1),
        np.stack([m20, m12, v2], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ])
    bnd = np.concatenate([mesh.boundary, nv + np.flatnonzero(is_bnd)])
    out = TriangleMesh(verts, tris, np.sort(bnd), _longest_edge(verts, tris), domain)
    out.validate()
    return out


@dataclass(frozen=True)
class QualityReport:
    min_angle_deg: float
    max_aspect_ratio: float
    h_max: float
    n_triangles: int


def mesh_quality(mesh: TriangleMesh) -> QualityReport:
    """Minimum interior angle, worst aspect ratio (1 for equilateral) and h_max."""
    mesh.validate()
    p = mesh.vertices[mesh.triangles]
    e = np.roll(p, -1, axis=1) - p  # e[:, i] = p[i+1] - p[i]
    length = np.linalg.norm(e, axis=2)
    angles = []
    for i in range(3):
        u = -e[:, (i - 1) % 3]
        v = e[:, i]
        cosang = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
    area = mesh.signed_areas()
    aspect = length.max(axis=1) * length.sum(axis=1) / (4.0 * math.sqrt(3.0) * area)
    return QualityReport(
        float(np.min(angles)), float(np.max(aspect)), float(length.max()), mesh.n_triangles
    )

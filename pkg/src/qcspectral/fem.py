"""P1 finite elements for ``-div(A grad g) = lambda h g`` with Dirichlet data.

Coefficients ``A`` and ``h`` are sampled at the three edge midpoints of each
triangle, so vertices (where the example coefficients are discontinuous) are
never evaluated.  Stiffness uses the midpoint average of ``A``; mass uses the
midpoint rule on ``h phi_i phi_j`` which is exact for constant ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from .errors import AssemblyError, DomainError, SolverError
from .mesh import PlanarDomain, TriangleMesh, refine, triangulate
from .qc_core import MatrixField, identity_field
from .qc_maps import WeightField, constant_weight

DENSE_LIMIT = 2000
RESIDUAL_TOL = 1e-8
_SEED = 20240601

__all__ = [
    "local_gradients",
    "assemble_stiffness",
    "assemble_mass",
    "apply_dirichlet",
    "is_positive_definite",
    "solve_generalized_eig",
    "discrete_poincare_constant",
    "solve_spectrum",
    "SpectrumResult",
    "DirichletSystem",
]

# barycentric coordinates of the edge midpoints m01, m12, m20
_MID_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


def local_gradients(mesh: TriangleMesh) -> tuple[np.ndarray, np.ndarray]:
    """Constant P1 basis gradients, shape ``(M, 3, 2)``, and triangle areas."""
    p = mesh.vertices[mesh.triangles]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    grads = np.stack([b, c], axis=2) / (2.0 * area)[:, None, None]
    return grads, area


def _sample(mesh: TriangleMesh, fn, what: str) -> np.ndarray:
    mids = mesh.edge_midpoints()
    try:
        vals = np.asarray(fn(mids), dtype=float)
    except Exception as exc:  # noqa: BLE001 - reported with context
        raise AssemblyError(f"{what} evaluation failed: {exc}") from exc
    bad = ~np.isfinite(vals)
    if bad.ndim > mids.ndim:
        bad = bad.any(axis=tuple(range(mids.ndim, bad.ndim)))
    if np.any(bad):
        t, q = np.argwhere(bad)[0]
        raise AssemblyError(f"{what} is not finite at quadrature point {complex(mids[t, q])}")
    return vals


def _scatter(mesh: TriangleMesh, local: np.ndarray) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # summation order of duplicates is not guaranteed; make symmetry exact
    return ((mat + mat.T) * 0.5).tocsr()


def assemble_stiffness(mesh: TriangleMesh, field_: MatrixField | None = None) -> sp.csr_matrix:
    """``K_ij = sum_T |T| <A_T grad phi_i, grad phi_j>`` with ``A_T`` the midpoint mean."""
    field_ = field_ or identity_field()
    grads, area = local_gradients(mesh)
    if field_.is_identity:
        a11 = a22 = np.ones(len(area))
        a12 = np.zeros(len(area))
    else:
        ent = _sample(mesh, field_, f"matrix field {field_.name!r}").mean(axis=1)
        a11, a12, a22 = ent[:, 0], ent[:, 1], ent[:, 2]
    gx, gy = grads[..., 0], grads[..., 1]
    local = (a11[:, None, None] * gx[:, :, None] * gx[:, None, :]
             + a12[:, None, None] * (gx[:, :, None] * gy[:, None, :] + gy[:, :, None] * gx[:, None, :])
             + a22[:, None, None] * gy[:, :, None] * gy[:, None, :]) * area[:, None, None]
    return _scatter(mesh, local)


def assemble_mass(mesh: TriangleMesh, weight: WeightField | None = None) -> sp.csr_matrix:
    """``M_ij = sum_T |T|/3 sum_q h(m_q) phi_i(m_q) phi_j(m_q)`` over the edge midpoints."""
    weight = weight or constant_weight(1.0)
    area = mesh.signed_areas()
    h = _sample(mesh, weight, f"weight {weight.name!r}")
    if np.any(h <= 0):
        t, q = np.argwhere(h <= 0)[0]
        raise AssemblyError(
            f"weight {weight.name!r} is non-positive ({h[t, q]:.3e}) at {complex(mesh.edge_midpoints()[t, q])}"
        )
    local = np.einsum("tq,qi,qj->tij", h, _MID_BARY, _MID_BARY) * (area / 3.0)[:, None, None]
    return _scatter(mesh, local)


@dataclass(frozen=True, eq=False)
class DirichletSystem:
    K: sp.csr_matrix
    M: sp.csr_matrix
    interior: np.ndarray


def apply_dirichlet(K: sp.spmatrix, M: sp.spmatrix, boundary) -> DirichletSystem:
    """Remove boundary rows and columns; the result acts on interior vertices only."""
    n = K.shape[0]
    mask = np.ones(n, dtype=bool)
    boundary = np.asarray(boundary, dtype=np.int64)
    if boundary.size and (boundary.min() < 0 or boundary.max() >= n):
        raise DomainError("boundary index out of range")
    mask[boundary] = False
    interior = np.flatnonzero(mask)
    if interior.size == 0:
        raise DomainError("no interior vertices: Dirichlet problem is empty")
    K = sp.csr_matrix(K)[interior][:, interior].tocsr()
    M = sp.csr_matrix(M)[interior][:, interior].tocsr()
    return DirichletSystem(K, M, interior)


def is_positive_definite(A) -> bool:
    """Cholesky-type test: dense Cholesky, or a diagonal-pivot sparse LU with positive pivots."""
    if sp.issparse(A) and A.shape[0] > DENSE_LIMIT:
        try:
            lu = splu(sp.csc_matrix(A), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                      options={"SymmetricMode": True})
        except RuntimeError:
            return False
        return bool(np.all(lu.U.diagonal() > 0))
    dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    try:
        np.linalg.cholesky(dense)
    except np.linalg.LinAlgError:
        return False
    return True


def _residuals(K, M, vals, vecs) -> np.ndarray:
    KX = K @ vecs
    R = KX - (M @ vecs) * vals[None, :]
    return np.linalg.norm(R, axis=0) / np.linalg.norm(KX, axis=0)


def solve_generalized_eig(K, M, n: int, *, return_vectors: bool = False, maxiter: int = 5000):
    """The ``n`` smallest eigenvalues of ``K x = lambda M x`` (both symmetric, ``M`` SPD)."""
    dim = K.shape[0]
    if int(n) != n or not 1 <= n <= dim:
        raise DomainError(f"requested {n!r} eigenvalues from a system of dimension {dim}")
    if not is_positive_definite(M):
        raise SolverError("mass matrix is not symmetric positive definite")
    if dim <= DENSE_LIMIT:
        Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
        Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
        vals, vecs = sla.eigh(Kd, Md, subset_by_index=[0, n - 1])
    else:
        v0 = np.random.default_rng(_SEED).standard_normal(dim)
        try:
            vals, vecs = eigsh(sp.csc_matrix(K), k=n, M=sp.csc_matrix(M), sigma=0.0, which="LM",
                               v0=v0, maxiter=maxiter, tol=0.0)
        except ArpackNoConvergence as exc:
            raise SolverError(f"shift-invert Lanczos did not converge: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    res = _residuals(K, M, vals, vecs)
    if np.any(res > RESIDUAL_TOL):
        raise SolverError(f"eigenpair residuals {np.max(res):.3e} exceed {RESIDUAL_TOL:g}")
    if return_vectors:
        return vals, vecs, res
    return vals


def discrete_poincare_constant(K, M) -> float:
    """``V* = sup ||g||_M / ||g||_K`` from the largest eigenvalue of ``M x = mu K x``."""
    dim = K.shape[0]
    if dim <= DENSE_LIMIT:
        Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
        Md = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
        mu = sla.eigh(Md, Kd, eigvals_only=True, subset_by_index=[dim - 1, dim - 1])[0]
    else:
        v0 = np.random.default_rng(_SEED).standard_normal(dim)
        mu = eigsh(sp.csc_matrix(M), k=1, M=sp.csc_matrix(K), which="LA", v0=v0, tol=0.0,
                   return_eigenvectors=False)[0]
    return math.sqrt(mu)


@dataclass(frozen=True)
class SpectrumResult:
    """Ascending eigenvalues on the finest level plus the refinement history."""

    eigenvalues: tuple[float, ...]
    n_requested: int
    mesh_h: float
    refinement_history: tuple[tuple[float, tuple[float, ...]], ...]
    extrapolated: tuple[float, ...] | None = None
    n_dofs: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def best(self) -> np.ndarray:
        """Extrapolated values when available, else the finest level."""
        return np.array(self.extrapolated if self.extrapolated is not None else self.eigenvalues)

    @property
    def last_change(self) -> np.ndarray:
        """``|lambda(h) - lambda(h/2)|`` for the last two levels (observed discretisation error)."""
        if len(self.refinement_history) < 2:
            return np.full(self.n_requested, math.nan)
        a = np.array(self.refinement_history[-2][1])
        b = np.array(self.refinement_history[-1][1])
        return np.abs(a - b)

    def as_dict(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "n_requested": self.n_requested,
            "mesh_h": self.mesh_h,
            "refinement_history": [{"h": h, "eigenvalues": list(v)} for h, v in self.refinement_history],
            "extrapolated": None if self.extrapolated is None else list(self.extrapolated),
            "n_dofs": self.n_dofs,
        }


def solve_level(mesh: TriangleMesh, field_: MatrixField | None, weight: WeightField | None, n: int):
    K = assemble_stiffness(mesh, field_)
    M = assemble_mass(mesh, weight)
    sysd = apply_dirichlet(K, M, mesh.boundary)
    return solve_generalized_eig(sysd.K, sysd.M, n), sysd


def solve_spectrum(domain: PlanarDomain | TriangleMesh, field_: MatrixField | None = None,
                   weight: WeightField | None = None, n: int = 6, refinements: int = 3,
                   target_h: float = 0.15, extrapolate: bool | None = None,
                   keep_mesh: bool = False) -> SpectrumResult:
    """Solve on a base mesh and ``refinements`` uniform refinements of it.

    ``domain`` may be a prepared mesh.  Richardson extrapolation
    ``lambda(h/2) + (lambda(h/2) - lambda(h))/3`` is applied to the last two
    levels unless disabled; by default it is off for the petal, whose corner
    breaks the ``O(h^2)`` assumption.
    """
    if int(refinements) != refinements or refinements < 1:
        raise DomainError(f"refinements = {refinements!r} must be >= 1")
    if int(n) != n or n < 1:
        raise DomainError(f"n = {n!r} must be a positive integer")
    mesh = domain if isinstance(domain, TriangleMesh) else triangulate(domain, target_h)
    dom = mesh.domain
    if extrapolate is None:
        extrapolate = dom is None or dom.kind != "petal"
    history = []
    for level in range(refinements + 1):
        if level:
            mesh = refine(mesh)
        vals, sysd = solve_level(mesh, field_, weight, n)
        history.append((float(mesh.h_max), tuple(float(v) for v in vals)))
    fine = np.array(history[-1][1])
    extrap = None
    if extrapolate:
        coarse = np.array(history[-2][1])
        extrap = tuple(float(v) for v in fine + (fine - coarse) / 3.0)
    meta = {"mesh": mesh} if keep_mesh else {}
    return SpectrumResult(tuple(float(v) for v in fine), int(n), float(mesh.h_max), tuple(history),
                          extrap, int(sysd.K.shape[0]), meta)

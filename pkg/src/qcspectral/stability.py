"""Weight distances, eigenvalue-difference bounds and the verification harness.

Notation: ``w1, w2`` are positive weights on a domain ``Omega``,
``d_s = ||w1 - w2 | L^s||`` and ``c~_n = max(lambda_n[w1]^2, lambda_n[w2]^2)``.

* two-weight bound:     ``B c~ / (1 + B sqrt(c~))`` with ``B = A^2_{2s/(s-1),2} d_s``;
* product bound:        ``c~ B``;
* Jacobian bound:       ``c~ A^2_{4b/(b-1),2} (|Omega|^{1/(2b)} + ||J||_b^{1/2}) ||1 - J^{1/2}||_2``
  with ``J = J(z, phi^{-1})`` and ``s = 2b/(b + 1)``;
* quasidisc bound:      ``c~ M(K) ||1 - J^{1/2}||_2`` (reported as log10).

All weight norms use the edge-midpoint rule on the finest FEM mesh and two
further refinements of it, Richardson-extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .fem import RESIDUAL_TOL, SpectrumResult, solve_spectrum
from .mesh import Ellipse, Petal, TriangleMesh, UnitDisc, triangulate
from .qc_core import identity_field
from .qc_maps import (QCMap, WeightField, beta_regularity_integral, constant_weight, ellipse_map,
                      petal_map, radial_power_map, spiral_map, weight_field)
from .quadrature import mesh_integrate_extrapolated, refinement_chain
from .sharp_constants import mk_constant, poincare_sobolev_constant
from .specfun import disc_spectrum

__all__ = [
    "WeightPair",
    "NormResult",
    "lp_norm",
    "ds_distance",
    "ds_upper_bound",
    "ds_qc_bound",
    "b_constant",
    "bound_lemma31",
    "bound_thm34",
    "bound_thm52",
    "bound_thm53_log10",
    "c_tilde",
    "StabilityReport",
    "VerificationReport",
    "verify_isospectral",
    "verify_stability",
    "ISOSPECTRAL_TOLERANCES",
]

NORM_REFINEMENTS = 2


@dataclass(frozen=True)
class WeightPair:
    w1: WeightField
    w2: WeightField
    s: float

    def __post_init__(self):
        if not self.s > 1.0:
            raise DomainError(f"s = {self.s!r} must be > 1")


@dataclass(frozen=True)
class NormResult:
    value: float
    converged: bool
    diverged: bool


def lp_norm(f, mesh: TriangleMesh, p: float, refinements: int = NORM_REFINEMENTS) -> NormResult:
    """``||f | L^p||`` by extrapolated midpoint quadrature; ``p = inf`` samples the sup."""
    if p == math.inf:
        chain = refinement_chain(mesh, refinements)
        pts = [mesh.points] + [m.edge_midpoints().ravel() for m in chain]
        vals = np.abs(np.asarray(f(np.concatenate(pts)), dtype=float))
        finite = bool(np.all(np.isfinite(vals)))
        return NormResult(float(vals.max()) if finite else math.inf, finite, not finite)
    res = mesh_integrate_extrapolated(mesh, lambda z: np.abs(np.asarray(f(z), dtype=float)) ** p,
                                      refinements)
    if res.diverged:
        return NormResult(math.inf, False, True)
    return NormResult(max(res.value, 0.0) ** (1.0 / p), res.converged, False)


def _area(mesh: TriangleMesh) -> float:
    return mesh.domain.area() if mesh.domain is not None else mesh.total_area()


def ds_distance(pair: WeightPair, mesh: TriangleMesh) -> float:
    """``||w1 - w2 | L^s(Omega)||``; ``inf`` if the quadrature diverges."""
    if pair.w1 is pair.w2:
        return 0.0
    return lp_norm(lambda z: pair.w1(z) - pair.w2(z), mesh, pair.s).value


def _half_norm(w: WeightField, mesh: TriangleMesh, q: float) -> float:
    """``||w | L^q||^{1/2}``."""
    return math.sqrt(lp_norm(w, mesh, q).value)


def ds_upper_bound(pair: WeightPair, mesh: TriangleMesh) -> float:
    """``(||w1||^{1/2}_{s/(2-s)} + ||w2||^{1/2}_{s/(2-s)}) ||sqrt w1 - sqrt w2 | L^2||``."""
    s = pair.s
    if not 1.0 < s <= 2.0:
        raise DomainError(f"s = {s!r} must lie in (1, 2]")
    if pair.w1 is pair.w2:
        return 0.0
    q = math.inf if s == 2.0 else s / (2.0 - s)
    second = lp_norm(lambda z: np.sqrt(pair.w1(z)) - np.sqrt(pair.w2(z)), mesh, 2.0).value
    if second == 0.0:
        return 0.0
    return (_half_norm(pair.w1, mesh, q) + _half_norm(pair.w2, mesh, q)) * second


def jacobian_factors(qcmap: QCMap, beta: float, mesh: TriangleMesh) -> tuple[float, float]:
    """``(|Omega|^{1/(2b)} + ||J||_b^{1/2}, ||1 - J^{1/2}||_2)`` with ``J = J(z, phi^{-1})``."""
    if not beta > 1.0:
        raise DomainError(f"beta = {beta!r} must be > 1")
    h = weight_field(qcmap)
    if h.is_unit:
        return _area(mesh) ** (1.0 / (2.0 * beta)) + _area(mesh) ** (1.0 / (2.0 * beta)), 0.0
    first = _area(mesh) ** (1.0 / (2.0 * beta)) + _half_norm(h, mesh, beta)
    second = lp_norm(lambda z: 1.0 - np.sqrt(h(z)), mesh, 2.0).value
    return first, second


def ds_qc_bound(qcmap: QCMap, beta: float, mesh: TriangleMesh) -> float:
    """Bound on ``d_s(1, h)``, ``s = 2 beta/(beta + 1)``, through the Jacobian of ``phi^{-1}``."""
    first, second = jacobian_factors(qcmap, beta, mesh)
    return 0.0 if second == 0.0 else first * second


def b_constant(s: float, area: float, d_s: float) -> float:
    """``B = A^2_{2s/(s-1),2}(Omega) d_s``."""
    if not 1.0 < s <= 2.0:
        raise DomainError(f"s = {s!r} must lie in (1, 2]")
    if d_s == 0.0:
        return 0.0
    r = 2.0 * s / (s - 1.0)
    return poincare_sobolev_constant(r, area).value ** 2 * d_s


def c_tilde(lambda_pair) -> float:
    l1, l2 = lambda_pair
    if not (l1 > 0 and l2 > 0):
        raise DomainError("eigenvalues must be positive")
    return max(l1 * l1, l2 * l2)


def bound_lemma31(B: float, lambda_pair) -> float:
    """``B c~ / (1 + B sqrt(c~))``."""
    if B < 0:
        raise DomainError(f"B = {B!r} must be >= 0")
    c = c_tilde(lambda_pair)
    return B * c / (1.0 + B * math.sqrt(c))


def bound_thm34(s: float, area: float, d_s: float, lambda_pair) -> float:
    """``c~ A^2_{2s/(s-1),2}(Omega) d_s``."""
    return c_tilde(lambda_pair) * b_constant(s, area, d_s)


def bound_thm52(qcmap: QCMap, beta: float, mesh: TriangleMesh, lambda_pair) -> float:
    """Jacobian form of the product bound; requires a finite beta-regularity integral."""
    reg = beta_regularity_integral(qcmap, beta)
    if not math.isfinite(reg):
        raise DomainError(f"{qcmap!r} is not beta-regular for beta = {beta!r}: integral diverges")
    qc = ds_qc_bound(qcmap, beta, mesh)
    if qc == 0.0:
        return 0.0
    r = 4.0 * beta / (beta - 1.0)
    return c_tilde(lambda_pair) * poincare_sobolev_constant(r, _area(mesh)).value ** 2 * qc


def bound_thm53_log10(K: float, mesh: TriangleMesh, lambda_pair, qcmap: QCMap,
                      source_area: float | None = None) -> float:
    """log10 of ``c~ M(K) ||1 - J^{1/2}||_2``; ``-inf`` when the norm vanishes (exact zero bound)."""
    h = weight_field(qcmap)
    norm = 0.0 if h.is_unit else lp_norm(lambda z: 1.0 - np.sqrt(h(z)), mesh, 2.0).value
    if norm == 0.0:
        return -math.inf
    area = source_area if source_area is not None else qcmap.source_domain().area()
    mk = mk_constant(K, area)
    return math.log10(c_tilde(lambda_pair)) + mk.log10_value + math.log10(norm)


# --------------------------------------------------------------------------
# verification harness
# --------------------------------------------------------------------------

ISOSPECTRAL_TOLERANCES = {"spiral": 0.015, "ellipse": 0.01, "petal": 0.02}
_CASE_ALIASES = {
    "isospectral-a": "spiral", "spiralondisc": "spiral", "spiral": "spiral", "a": "spiral",
    "isospectral-b": "ellipse", "ellipsetodisc": "ellipse", "ellipse": "ellipse", "b": "ellipse",
    "isospectral-c": "petal", "petaltodisc": "petal", "petal": "petal", "c": "petal",
}


@dataclass(frozen=True)
class VerificationReport:
    case_id: str
    n: int
    eigenvalues: tuple[float, ...]
    reference: tuple[float, ...]
    rel_errors: tuple[float, ...]
    tolerance: float
    passed: bool
    extrapolated: bool
    mesh_h: float
    refinements: int
    history: tuple = ()

    def as_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "n": self.n,
            "eigenvalues": list(self.eigenvalues),
            "reference": list(self.reference),
            "rel_errors": list(self.rel_errors),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "extrapolated": self.extrapolated,
            "mesh_h": self.mesh_h,
            "refinements": self.refinements,
            "refinement_history": [{"h": h, "eigenvalues": list(v)} for h, v in self.history],
        }


def isospectral_problem(case: str, a: float = 0.5):
    """``(case_id, domain, matrix field)`` for a named isospectral example."""
    key = _CASE_ALIASES.get(case.lower().replace("_", ""))
    if key is None:
        raise DomainError(f"unknown isospectral case {case!r}")
    if key == "spiral":
        return "isospectral-a", UnitDisc(), spiral_map().matrix_field(), key
    if key == "ellipse":
        return f"isospectral-b(a={a!r})", Ellipse(a), ellipse_map(a).matrix_field(), key
    return "isospectral-c", Petal(), petal_map().matrix_field(), key


def verify_isospectral(case: str, n: int, refinements: int = 3, target_h: float = 0.15,
                       tol: float | None = None, a: float = 0.5) -> VerificationReport:
    """Compare the divergence-form spectrum of an example with ``j_{m,n}^2``."""
    case_id, domain, fld, key = isospectral_problem(case, a)
    tol = ISOSPECTRAL_TOLERANCES[key] if tol is None else float(tol)
    spec = solve_spectrum(domain, fld, None, n, refinements, target_h)
    ref = disc_spectrum(n).eigenvalues
    vals = spec.best
    rel = np.abs(vals / ref - 1.0)
    return VerificationReport(case_id, int(n), tuple(map(float, vals)), tuple(map(float, ref)),
                              tuple(map(float, rel)), tol, bool(np.all(rel <= tol)),
                              spec.extrapolated is not None, spec.mesh_h, int(refinements),
                              spec.refinement_history)


@dataclass(frozen=True)
class StabilityReport:
    """All ingredients of the bounds for one mode, next to the FEM difference."""

    n: int
    lambda_1n: float
    lambda_2n: float
    c_tilde_n: float
    d_s: float
    poincare_const: float
    B: float
    bound_lemma31: float
    bound_thm34: float
    bound_thm52: float | None
    bound_thm53_log10: float | None
    actual_diff: float
    holds: dict
    classification: str
    c_tilde_source: str
    case_id: str = ""
    mesh_h: float = math.nan
    refinements: int = 0
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def all_hold(self) -> bool:
        return all(self.holds.values())

    def as_dict(self) -> dict:
        keys = ["n", "lambda_1n", "lambda_2n", "c_tilde_n", "d_s", "poincare_const", "B",
                "bound_lemma31", "bound_thm34", "bound_thm52", "bound_thm53_log10", "actual_diff",
                "holds", "classification", "c_tilde_source", "case_id", "mesh_h", "refinements"]
        return {k: getattr(self, k) for k in keys}


@dataclass(frozen=True, eq=False)
class _StabilityRun:
    plain: SpectrumResult
    weighted: SpectrumResult
    mesh: TriangleMesh


_RUNS: dict[tuple, _StabilityRun] = {}


def _stability_spectra(t: float, n: int, refinements: int, target_h: float) -> _StabilityRun:
    key = (float(t), int(n), int(refinements), float(target_h))
    run = _RUNS.get(key)
    if run is None:
        base = triangulate(UnitDisc(), target_h)
        plain = solve_spectrum(base, identity_field(), None, n, refinements, keep_mesh=True)
        weighted = solve_spectrum(base, None, weight_field(radial_power_map(t)), n, refinements)
        run = _StabilityRun(plain, weighted, plain.meta["mesh"])
        _RUNS[key] = run
    return run


def verify_stability(t: float, beta: float, n_modes: int, refinements: int = 3,
                     target_h: float = 0.15) -> list[StabilityReport]:
    """Bounds versus FEM for the radial family: ``lambda_n[D]`` against ``lambda_n[h, D]``."""
    qcmap = radial_power_map(t)
    if not beta > 1.0:
        raise DomainError(f"beta = {beta!r} must be > 1")
    run = _stability_spectra(t, n_modes, refinements, target_h)
    mesh = run.mesh
    area = mesh.domain.area()
    s = 2.0 * beta / (beta + 1.0)
    h = weight_field(qcmap)
    one = constant_weight(1.0)
    pair = WeightPair(one, one if h.is_unit else h, s)
    d_s = ds_distance(pair, mesh)
    d_up = ds_upper_bound(pair, mesh)
    d_qc = ds_qc_bound(qcmap, beta, mesh)
    poinc = poincare_sobolev_constant(2.0 * s / (s - 1.0), area).value
    B = poinc**2 * d_s
    K = qcmap.K
    lam1, lam2 = run.plain.best, run.weighted.best
    prev1 = np.array(run.plain.refinement_history[-2][1])
    prev2 = np.array(run.weighted.refinement_history[-2][1])
    fine1 = np.array(run.plain.eigenvalues)
    fine2 = np.array(run.weighted.eigenvalues)
    case_id = f"stability(t={t!r},beta={beta!r})"
    # both Jacobian bounds are c~ times a mode-independent factor
    unit = (1.0, 1.0)
    f52 = bound_thm52(qcmap, beta, mesh, unit)
    f53 = bound_thm53_log10(K, mesh, unit, qcmap) if K > 1.0 else None
    reports = []
    for i in range(n_modes):
        pair_l = (float(lam1[i]), float(lam2[i]))
        ct = c_tilde(pair_l)
        b31 = bound_lemma31(B, pair_l)
        b34 = bound_thm34(s, area, d_s, pair_l)
        b52 = ct * f52
        b53 = None if f53 is None else f53 + math.log10(ct)
        diff = abs(pair_l[1] - pair_l[0])
        holds = {"lemma31": diff <= b31, "thm34": diff <= b34, "thm52": diff <= b52}
        if b53 is not None:
            holds["thm53"] = diff == 0.0 or math.log10(diff) <= b53
        noise = 10.0 * RESIDUAL_TOL * max(pair_l)
        d_fine = abs(fine2[i] - fine1[i])
        d_prev = abs(prev2[i] - prev1[i])
        if diff < noise:
            label = "isospectral within tolerance"
        elif not all(holds.values()):
            label = "bound violated"
        elif abs(d_fine - d_prev) <= 0.1 * d_fine:
            label = "bound holds"
        else:
            label = "bound holds within noise"
        reports.append(StabilityReport(
            n=i + 1, lambda_1n=pair_l[0], lambda_2n=pair_l[1], c_tilde_n=ct, d_s=d_s,
            poincare_const=poinc, B=B, bound_lemma31=b31, bound_thm34=b34, bound_thm52=b52,
            bound_thm53_log10=b53, actual_diff=diff, holds=holds, classification=label,
            c_tilde_source="plain" if pair_l[0] >= pair_l[1] else "weighted",
            case_id=case_id, mesh_h=run.plain.mesh_h, refinements=int(refinements),
            extras={"s": s, "ds_upper_bound": d_up, "ds_qc_bound": d_qc, "K": K},
        ))
    return reports

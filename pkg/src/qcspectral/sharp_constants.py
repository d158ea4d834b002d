"""Explicit constants: Talenti's Sobolev constant, the Poincare-Sobolev bound
``A_{r,2}(Omega)`` and the quasidisc constant ``M(K)``.

The admissible exponents crowd against their endpoints (for ``M(K)`` the
range of ``beta - 1`` is below 1e-13), so everything is parametrised by
offsets: ``eps = beta - 1`` and ``delta = 2 - p``.  Values are carried as
natural logarithms and converted at the end; ``log10`` fields are always
finite even when the value itself overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import DomainError
from .specfun import gamma

LN10 = math.log(10.0)
GOLDEN_TOL = 1e-10
ENDPOINT_SHRINK = 1e-9
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

__all__ = [
    "golden_section",
    "talenti_constant",
    "log_talenti",
    "poincare_sobolev_constant",
    "nu_function",
    "log_nu",
    "nu_root",
    "NuRoot",
    "c_beta",
    "log_c_beta",
    "mk_constant",
    "mk_beta_constant",
    "jacobian_lbeta_bound",
    "jacobian_lbeta_bound_log10",
    "qc_exponent",
    "ConstantEvaluation",
]


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = GOLDEN_TOL, max_iter: int = 500) -> tuple[float, float]:
    """Minimise ``f`` on ``[lo, hi]`` to ``|dx| <= tol``; returns ``(x, f(x))``.

    The better endpoint is also compared, so monotone objectives return the
    boundary point rather than a point ``tol`` away from it.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    cands = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    fx, x = min(cands)
    return x, fx


# --------------------------------------------------------------------------
# Talenti / Poincare-Sobolev
# --------------------------------------------------------------------------


def _log_talenti_delta(delta: float) -> float:
    """``log`` of Talenti's constant at ``p = 2 - delta`` (``0 < delta < 1``)."""
    p = 2.0 - delta
    return (-0.5 * math.log(math.pi) - math.log(2.0) / p
            + ((p - 1.0) / p) * (math.log1p(-delta) - math.log(delta))
            - 0.5 * (math.lgamma(2.0 / p) + math.lgamma(3.0 - 2.0 / p)))


def log_talenti(p: float) -> float:
    if not 1.0 < p < 2.0:
        raise DomainError(f"talenti: p = {p!r} must lie in (1, 2)")
    return _log_talenti_delta(2.0 - p)


def talenti_constant(p: float) -> float:
    """Sharp constant of ``||f||_{q} <= A ||grad f||_p`` on the plane, ``q = 2p/(2 - p)``."""
    if not 1.0 < p < 2.0:
        raise DomainError(f"talenti: p = {p!r} must lie in (1, 2)")
    ratio = (p - 1.0) / (2.0 - p)
    return (ratio ** ((p - 1.0) / p)
            / (math.sqrt(math.pi) * 2.0 ** (1.0 / p) * math.sqrt(gamma(2.0 / p) * gamma(3.0 - 2.0 / p))))


@dataclass(frozen=True)
class ConstantEvaluation:
    """Result of a constrained minimisation; ``value`` may be ``inf`` when only ``log10_value`` fits."""

    value: float
    log10_value: float
    minimizer_p: float
    bracket: tuple[float, float]
    minimizer_beta: float | None = None
    minimizer_beta_offset: float | None = None
    infinite: bool = False
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "value": self.value,
            "log10_value": self.log10_value,
            "minimizer_p": self.minimizer_p,
            "bracket": list(self.bracket),
            "minimizer_beta": self.minimizer_beta,
            "minimizer_beta_offset": self.minimizer_beta_offset,
            "infinite": self.infinite,
        }
        out.update(self.details)
        return out


def _exp_or_inf(log_value: float) -> float:
    return math.exp(log_value) if log_value < 709.0 else math.inf


def _inner_poincare(delta_max: float) -> tuple[float, float]:
    """Minimise ``log T(2 - delta)`` over ``delta in (0, delta_max)``; returns ``(delta, log T)``."""
    v, lt = golden_section(lambda v: _log_talenti_delta(v * delta_max),
                           ENDPOINT_SHRINK, 1.0 - ENDPOINT_SHRINK)
    return v * delta_max, lt


def poincare_sobolev_constant(r: float, area: float) -> ConstantEvaluation:
    """Upper bound ``inf_p T(p) |Omega|^{1/r}`` for ``A_{r,2}(Omega)``, ``p in (2r/(r+2), 2)``.

    The search runs over the relative offset inside the open interval with
    endpoints pulled in by 1e-9 of its width.
    """
    if not r >= 2.0:
        raise DomainError(f"r = {r!r} must be >= 2")
    if not area > 0:
        raise DomainError(f"area = {area!r} must be positive")
    delta_max = 4.0 / (r + 2.0)
    delta, lt = _inner_poincare(delta_max)
    log_value = lt + math.log(area) / r
    return ConstantEvaluation(
        value=_exp_or_inf(log_value),
        log10_value=log_value / LN10,
        minimizer_p=2.0 - delta,
        bracket=(2.0 * r / (r + 2.0), 2.0),
        details={"r": r, "area": area, "minimizer_delta": delta},
    )


# --------------------------------------------------------------------------
# nu, C_beta, M(K)
# --------------------------------------------------------------------------


def _log_nu_eps(eps: float, K: float) -> float:
    return (8.0 * (1.0 + eps) * LN10 + math.log(2.0 * eps) - math.log1p(2.0 * eps)
            + 2.0 * (1.0 + eps) * math.log(24.0 * math.pi**2 * K * K))


def log_nu(beta: float, K: float, *, epsilon: float | None = None) -> float:
    """Natural log of ``nu(beta)``; pass ``epsilon = beta - 1`` when it is below float resolution."""
    eps = _offset(beta, epsilon)
    if K < 1.0:
        raise DomainError(f"K = {K!r} must be >= 1")
    return _log_nu_eps(eps, K)


def nu_function(beta: float, K: float, *, epsilon: float | None = None) -> float:
    """``10^{8 beta} (2 beta - 2)/(2 beta - 1) (24 pi^2 K^2)^{2 beta}``."""
    return _exp_or_inf(log_nu(beta, K, epsilon=epsilon))


def _offset(beta: float | None, epsilon: float | None) -> float:
    eps = epsilon if epsilon is not None else (None if beta is None else beta - 1.0)
    if eps is None or not eps > 0:
        raise DomainError(f"beta = {beta!r} must be > 1")
    return float(eps)


@dataclass(frozen=True)
class NuRoot:
    beta_tilde: float
    epsilon_tilde: float
    iterations: int


def nu_root(K: float, rtol: float = 1e-13) -> NuRoot:
    """Unique root of ``nu(beta) = 1`` by bisection in ``log(beta - 1)``.

    ``epsilon_tilde = beta_tilde - 1`` is resolved to relative accuracy
    ``rtol`` (its absolute error is far below 1e-12).
    """
    if not K >= 1.0:
        raise DomainError(f"K = {K!r} must be >= 1")
    lo, hi = math.log(1e-300), math.log(10.0)
    if _log_nu_eps(math.exp(lo), K) >= 0 or _log_nu_eps(math.exp(hi), K) <= 0:
        raise DomainError("nu root not bracketed")  # pragma: no cover
    it = 0
    while hi - lo > rtol and it < 400:
        mid = 0.5 * (lo + hi)
        if _log_nu_eps(math.exp(mid), K) < 0:
            lo = mid
        else:
            hi = mid
        it += 1
    eps = math.exp(0.5 * (lo + hi))
    return NuRoot(1.0 + eps, eps, it)


def _log_c_beta_eps(eps: float, K: float) -> float:
    one_minus_nu = -math.expm1(_log_nu_eps(eps, K))
    if not one_minus_nu > 0:
        return math.inf
    beta = 1.0 + eps
    return 6.0 * LN10 - (math.log1p(2.0 * eps) + math.log(one_minus_nu)) / (2.0 * beta)


def log_c_beta(beta: float, K: float, *, epsilon: float | None = None) -> float:
    return _log_c_beta_eps(_offset(beta, epsilon), K)


def c_beta(beta: float, K: float, *, epsilon: float | None = None) -> float:
    """``10^6 / [(2 beta - 1)(1 - nu(beta))]^{1/(2 beta)}``; ``inf`` at or past the root of nu."""
    return _exp_or_inf(log_c_beta(beta, K, epsilon=epsilon))


def qc_exponent(K: float) -> float:
    """``K^2 pi^2 (2 + pi^2)^2 / (4 log 3)`` (natural logarithm)."""
    return K * K * math.pi**2 * (2.0 + math.pi**2) ** 2 / (4.0 * math.log(3.0))


def _admissible_eps(K: float) -> tuple[float, float]:
    """``(eps_star, eps_tilde)`` with ``eps_star = min(1/(K-1), eps_tilde)``."""
    eps_tilde = nu_root(K).epsilon_tilde
    eps_qc = math.inf if K == 1.0 else 1.0 / (K - 1.0)
    return min(eps_qc, eps_tilde), eps_tilde


def _log_bracket_term(eps: float, K: float, area: float) -> float:
    """log of ``C_beta K pi^{(1-beta)/(2 beta)}/2 * e^X |Omega|^{1/2} + pi^{1/(2 beta)}``."""
    beta = 1.0 + eps
    big = (_log_c_beta_eps(eps, K) + math.log(K) + (-eps / (2.0 * beta)) * math.log(math.pi)
           - math.log(2.0) + qc_exponent(K) + 0.5 * math.log(area))
    small = math.log(math.pi) / (2.0 * beta)
    hi, lo = max(big, small), min(big, small)
    return hi + math.log1p(math.exp(lo - hi))


def _log_poincare_sq_disc(eps: float) -> tuple[float, float]:
    """``log inf_p A^2`` on the unit disc for ``r = 4 beta/(beta - 1)``; returns ``(delta, log)``."""
    beta = 1.0 + eps
    delta_max = 2.0 * eps / (2.0 + 3.0 * eps)
    delta, lt = _inner_poincare(delta_max)
    # |D|^{2/r} = pi^{(beta - 1)/(2 beta)}
    return delta, 2.0 * lt + (eps / (2.0 * beta)) * math.log(math.pi)


def _mk_log_at(eps: float, K: float, area: float) -> tuple[float, float]:
    delta, lp = _log_poincare_sq_disc(eps)
    return lp + _log_bracket_term(eps, K, area), delta


def _check_K(K: float, area: float) -> None:
    if not K > 1.0:
        raise DomainError(f"K = {K!r} must be > 1")
    if not area > 0:
        raise DomainError(f"area = {area!r} must be positive")


def mk_constant(K: float, domain_area: float = math.pi) -> ConstantEvaluation:
    """Quasidisc constant ``M(K)``: nested minimisation over ``beta in (1, beta*)`` and ``p``.

    ``details`` records ``beta_star``/``beta_tilde`` offsets and the extreme
    values of ``1 - nu`` and ``C_beta`` met during the search.
    """
    _check_K(K, domain_area)
    eps_star, eps_tilde = _admissible_eps(K)
    if not (eps_star > 0 and 1.0 + eps_star > 1.0):
        return ConstantEvaluation(math.inf, math.inf, math.nan, (1.0, 1.0 + eps_star), infinite=True,
                                  details={"beta_star_offset": eps_star, "beta_tilde_offset": eps_tilde})
    samples: list[tuple[float, float, float]] = []

    def objective(u: float) -> float:
        eps = u * eps_star
        val, _ = _mk_log_at(eps, K, domain_area)
        samples.append((eps, -math.expm1(_log_nu_eps(eps, K)), _log_c_beta_eps(eps, K)))
        return val

    u, log_m = golden_section(objective, ENDPOINT_SHRINK, 1.0 - ENDPOINT_SHRINK)
    eps = u * eps_star
    _, delta = _mk_log_at(eps, K, domain_area)
    min_one_minus_nu = min(s[1] for s in samples)
    min_log_c = min(s[2] for s in samples)
    return ConstantEvaluation(
        value=_exp_or_inf(log_m),
        log10_value=log_m / LN10,
        minimizer_p=2.0 - delta,
        bracket=(1.0, 1.0 + eps_star),
        minimizer_beta=1.0 + eps,
        minimizer_beta_offset=eps,
        infinite=not math.isfinite(log_m),
        details={
            "K": K,
            "domain_area": domain_area,
            "beta_star": 1.0 + eps_star,
            "beta_star_offset": eps_star,
            "beta_tilde": 1.0 + eps_tilde,
            "beta_tilde_offset": eps_tilde,
            "minimizer_delta": delta,
            "min_one_minus_nu": min_one_minus_nu,
            "min_c_beta": _exp_or_inf(min_log_c),
            "samples": len(samples),
        },
    )


def _check_beta_admissible(K: float, eps: float) -> None:
    eps_star, _ = _admissible_eps(K)
    if not 0 < eps < eps_star:
        raise DomainError(
            f"beta - 1 = {eps:.6g} outside the admissible range (0, {eps_star:.6g}) for K = {K!r}"
        )


def mk_beta_constant(K: float, beta: float | None = None, domain_area: float = math.pi, *,
                     epsilon: float | None = None) -> ConstantEvaluation:
    """``M_beta(K)`` at a fixed admissible ``beta``: the inner infimum over ``p`` only."""
    _check_K(K, domain_area)
    eps = _offset(beta, epsilon)
    _check_beta_admissible(K, eps)
    log_m, delta = _mk_log_at(eps, K, domain_area)
    return ConstantEvaluation(
        value=_exp_or_inf(log_m),
        log10_value=log_m / LN10,
        minimizer_p=2.0 - delta,
        bracket=(4.0 * (1.0 + eps) / (2.0 + 3.0 * eps), 2.0),
        minimizer_beta=1.0 + eps,
        minimizer_beta_offset=eps,
        details={"K": K, "domain_area": domain_area, "minimizer_delta": delta},
    )


def jacobian_lbeta_bound_log10(K: float, beta: float | None = None, domain_area: float = math.pi, *,
                               epsilon: float | None = None) -> float:
    """log10 of ``C_beta^2 K^2 pi^{(1-beta)/beta} / 4 * exp(2X) * |Omega~|``, X = ``qc_exponent(K)``."""
    if not K >= 1.0:
        raise DomainError(f"K = {K!r} must be >= 1")
    if not domain_area > 0:
        raise DomainError(f"area = {domain_area!r} must be positive")
    eps = _offset(beta, epsilon)
    _check_beta_admissible(K, eps)
    b = 1.0 + eps
    ln = (2.0 * _log_c_beta_eps(eps, K) + 2.0 * math.log(K) + (-eps / b) * math.log(math.pi)
          - math.log(4.0) + 2.0 * qc_exponent(K) + math.log(domain_area))
    return ln / LN10


def jacobian_lbeta_bound(K: float, beta: float | None = None, domain_area: float = math.pi, *,
                         epsilon: float | None = None) -> float:
    """The Jacobian ``L^beta`` bound itself; ``inf`` when it exceeds double range."""
    return _exp_or_inf(jacobian_lbeta_bound_log10(K, beta, domain_area, epsilon=epsilon) * LN10)

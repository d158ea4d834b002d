"""Command line front end: meshes, spectra, constants and verification reports.

Exit codes: 0 success, 1 verification failure, 2 invalid input (including
resource limits), 3 assembly or solver failure.
"""

from __future__ import annotations

import functools
import json
import math
import sys

import click

from . import __version__
from .errors import AssemblyError, DomainError, MeshError, QCSpectralError, ResourceLimitError, SolverError
from .mesh import domain_from_name, refine, triangulate
from .qc_core import identity_field
from .qc_maps import (constant_weight, ellipse_map, petal_map, radial_power_map, spiral_map,
                      weight_field)
from .report import dumps, plot_comparison, spectrum_csv
from .specfun import disc_spectrum

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2, 3


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map library exceptions onto exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ResourceLimitError as exc:
            _fail(EXIT_INPUT, f"resource limit: {exc}")
        except (DomainError, MeshError) as exc:
            _fail(EXIT_INPUT, str(exc))
        except (AssemblyError, SolverError) as exc:
            _fail(EXIT_COMPUTE, str(exc))
        except QCSpectralError as exc:  # pragma: no cover - every subclass is handled above
            _fail(EXIT_COMPUTE, str(exc))

    return wrapper


def _load_config(ctx: click.Context, param: click.Parameter, value):
    """``--config file.json``: keys mirror the long flags (dashes or underscores)."""
    if not value:
        return value
    try:
        with open(value, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.BadParameter(f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise click.BadParameter("config must be a JSON object")
    key_of = lambda flag: flag.lstrip("-").replace("-", "_")  # noqa: E731
    flags: dict[str, tuple[click.Parameter, bool]] = {}
    for prm in ctx.command.params:
        for opt in getattr(prm, "opts", []):
            flags[key_of(opt)] = (prm, False)
        for opt in getattr(prm, "secondary_opts", []):
            flags[key_of(opt)] = (prm, True)
    out = {}
    for key, val in data.items():
        prm, negated = flags.get(key_of(key), (None, False))
        if prm is None or prm.name == "config":
            raise click.BadParameter(f"unknown config key {key!r}")
        out[prm.name] = (not val) if negated else val
    ctx.default_map = {**(ctx.default_map or {}), **out}
    return value


config_option = click.option("--config", type=click.Path(dir_okay=False), is_eager=True,
                             expose_value=False, callback=_load_config,
                             help="JSON file whose keys mirror the command's flags.")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _domain(name: str, a: float):
    return domain_from_name(name, a)


def parse_matrix(spec: str):
    """``identity | example-a | example-b:a | example-c | radial:t`` -> MatrixField."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "identity" and not arg:
            return identity_field()
        if kind == "example-a" and not arg:
            return spiral_map().matrix_field()
        if kind == "example-c" and not arg:
            return petal_map().matrix_field()
        if kind == "example-b":
            return ellipse_map(float(arg) if arg else 0.5).matrix_field()
        if kind == "radial" and arg:
            return radial_power_map(float(arg)).matrix_field()
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad matrix parameter in {spec!r}") from exc
    raise DomainError(f"unknown matrix {spec!r}")


def parse_weight(spec: str):
    """``unit | const:c | radial:t`` -> WeightField."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "unit" and not arg:
            return None
        if kind == "const" and arg:
            return constant_weight(float(arg))
        if kind == "radial" and arg:
            return weight_field(radial_power_map(float(arg)))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad weight parameter in {spec!r}") from exc
    raise DomainError(f"unknown weight {spec!r}")


@click.group()
@click.version_option(__version__, prog_name="qcspectral")
def cli():
    """Dirichlet spectra of -div(A grad u) and quasiconformal stability checks."""


main = cli


@cli.command("mesh")
@config_option
@click.option("--domain", "domain_name", type=click.Choice(["disc", "ellipse", "petal"]), default="disc")
@click.option("--a", type=float, default=0.5, show_default=True, help="Ellipse parameter.")
@click.option("--h", "target_h", type=float, default=0.1, show_default=True)
@click.option("--refine", "n_refine", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guard
def cmd_mesh(domain_name, a, target_h, n_refine, out):
    """Write a triangulation as JSON."""
    if n_refine < 0:
        raise DomainError("--refine must be >= 0")
    dom = _domain(domain_name, a)
    mesh = triangulate(dom, target_h)
    for _ in range(n_refine):
        mesh = refine(mesh)
    _emit(json.dumps(mesh.to_json_dict()) + "\n", out)


@cli.command("solve")
@config_option
@click.option("--domain", "domain_name", type=click.Choice(["disc", "ellipse", "petal"]), default="disc")
@click.option("--a", type=float, default=0.5, show_default=True, help="Ellipse parameter.")
@click.option("--matrix", "matrix_spec", default="identity", show_default=True,
              help="identity | example-a | example-b:a | example-c | radial:t")
@click.option("--weight", "weight_spec", default="unit", show_default=True, help="unit | const:c | radial:t")
@click.option("--n", "n_eigs", type=int, default=6, show_default=True)
@click.option("--refine", "refinements", type=int, default=3, show_default=True)
@click.option("--h", "target_h", type=float, default=0.15, show_default=True)
@click.option("--reference", type=click.Choice(["none", "disc"]), default="none", show_default=True)
@click.option("--extrapolate/--no-extrapolate", default=None,
              help="Richardson extrapolation (default: on except for the petal).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Spectrum CSV (default stdout).")
@click.option("--history", type=click.Path(dir_okay=False), default=None, help="Refinement history JSON.")
@_guard
def cmd_solve(domain_name, a, matrix_spec, weight_spec, n_eigs, refinements, target_h, reference,
              extrapolate, out, history):
    """Dirichlet eigenvalues by P1 finite elements."""
    from .fem import solve_spectrum

    if n_eigs < 1:
        raise DomainError("--n must be >= 1")
    if refinements < 1:
        raise DomainError("--refine must be >= 1")
    field_ = parse_matrix(matrix_spec)
    weight = parse_weight(weight_spec)
    ref = disc_spectrum(n_eigs).eigenvalues if reference == "disc" else None
    result = solve_spectrum(_domain(domain_name, a), field_, weight, n_eigs, refinements, target_h,
                            extrapolate)
    _emit(spectrum_csv(result.best, ref), out)
    if history:
        data = result.as_dict()
        data["reference"] = None if ref is None else list(ref)
        with open(history, "w", encoding="utf-8") as fh:
            fh.write(dumps(data))


@cli.command("constants")
@config_option
@click.option("--talenti", is_flag=True, help="Talenti constant at --p.")
@click.option("--p", type=float, default=None)
@click.option("--poincare", is_flag=True, help="Poincare-Sobolev constant at --r, --area.")
@click.option("--r", type=float, default=None)
@click.option("--area", type=float, default=math.pi, show_default=True)
@click.option("--mk", is_flag=True, help="Quasidisc constant M(K) (log10) with beta*, beta~.")
@click.option("--nu-root", "nu_root_flag", is_flag=True, help="Root beta~ of nu(beta) = 1.")
@click.option("--jacobian", is_flag=True, help="Jacobian L^beta bound (log10) at --beta or --beta-offset.")
@click.option("--K", "K", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--beta-offset", type=float, default=None, help="beta - 1, for betas below float resolution.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guard
def cmd_constants(talenti, p, poincare, r, area, mk, nu_root_flag, jacobian, K, beta, beta_offset, out):
    """Evaluate the explicit constants as JSON."""
    from . import sharp_constants as sc

    if not (talenti or poincare or mk or nu_root_flag or jacobian):
        raise DomainError("choose at least one of --talenti, --poincare, --mk, --nu-root, --jacobian")
    res: dict = {}
    if talenti:
        if p is None:
            raise DomainError("--talenti needs --p")
        res["talenti"] = {"p": p, "value": sc.talenti_constant(p)}
    if poincare:
        if r is None:
            raise DomainError("--poincare needs --r")
        res["poincare"] = sc.poincare_sobolev_constant(r, area).as_dict()
    if (mk or nu_root_flag or jacobian) and K is None:
        raise DomainError("--mk, --nu-root and --jacobian need --K")
    if nu_root_flag:
        root = sc.nu_root(K)
        res["nu_root"] = {"K": K, "beta_tilde": root.beta_tilde, "beta_tilde_offset": root.epsilon_tilde}
    if mk:
        res["mk"] = sc.mk_constant(K, area).as_dict()
    if jacobian:
        if beta is None and beta_offset is None:
            raise DomainError("--jacobian needs --beta or --beta-offset")
        lg = sc.jacobian_lbeta_bound_log10(K, beta, area, epsilon=beta_offset)
        res["jacobian_lbeta_bound"] = {"K": K, "beta": beta, "beta_offset": beta_offset, "area": area,
                                       "log10_value": lg, "value": sc.jacobian_lbeta_bound(
                                           K, beta, area, epsilon=beta_offset)}
    _emit(dumps(res), out)


@cli.command("verify")
@config_option
@click.option("--case", "case", type=click.Choice(["isospectral-a", "isospectral-b", "isospectral-c", "stability"]),
              required=True)
@click.option("--a", type=float, default=0.5, show_default=True)
@click.option("--n", "n_eigs", type=int, default=None, help="Modes (default 5, or 3 for isospectral-a/c).")
@click.option("--tol", type=float, default=None, help="Relative tolerance for isospectral cases.")
@click.option("--t", type=float, default=0.1, show_default=True, help="Radial exponent (stability).")
@click.option("--beta", type=float, default=2.0, show_default=True)
@click.option("--refine", "refinements", type=int, default=3, show_default=True)
@click.option("--h", "target_h", type=float, default=0.15, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report JSON (default stdout).")
@click.option("--plot", type=click.Path(dir_okay=False), default=None, help="SVG comparison plot.")
@_guard
def cmd_verify(case, a, n_eigs, tol, t, beta, refinements, target_h, out, plot):
    """Check isospectrality or the stability bounds; exit 1 on failure."""
    from .stability import verify_isospectral, verify_stability

    if n_eigs is None:
        n_eigs = 3 if case in ("isospectral-a", "isospectral-c") else 5
    if n_eigs < 1:
        raise DomainError("--n must be >= 1")
    if refinements < 1:
        raise DomainError("--refine must be >= 1")
    if tol is not None and not tol > 0:
        raise DomainError("--tol must be positive")
    if case == "stability":
        reports = verify_stability(t, beta, n_eigs, refinements, target_h)
        ok = all(rep.all_hold for rep in reports)
        _emit(dumps({"case": case, "passed": ok, "reports": [rep.as_dict() for rep in reports]}), out)
        if plot:
            plot_comparison(plot, [rep.n for rep in reports], [rep.actual_diff for rep in reports],
                            {"two-weight": [rep.bound_lemma31 for rep in reports],
                             "product": [rep.bound_thm34 for rep in reports],
                             "jacobian": [rep.bound_thm52 for rep in reports]},
                            f"radial t={t:g}, beta={beta:g}", "|lambda_n[h,D] - lambda_n[D]|")
    else:
        rep = verify_isospectral(case, n_eigs, refinements, target_h, tol, a)
        ok = rep.passed
        _emit(dumps(rep.as_dict()), out)
        if plot:
            diffs = [abs(v - r_) for v, r_ in zip(rep.eigenvalues, rep.reference)]
            plot_comparison(plot, range(1, rep.n + 1), diffs,
                            {"tolerance": [rep.tolerance * r_ for r_ in rep.reference]},
                            rep.case_id, "|lambda_n - j^2|")
    if not ok:
        click.echo("verification failed", err=True)
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":  # pragma: no cover
    main()

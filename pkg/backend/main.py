#!/usr/bin/env python3
"""
Midpoint Viscous Schemes CLI
Coefficient dumps, spectral analysis, optimisation, accuracy studies and flow benchmarks
"""

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from config import CaseConfig, Config, DiffusionCase, FilterPolicy, ParameterRange, RunConfig, SearchConfig
from services import __version__
from services.cases import run_case, theta_stability_scan
from services.coeffs import SchemeId, TermKind, coefficient_dump
from services.errors import NumericalInstabilityError, SchemeError, UnsupportedSchemeError
from services.operators import Field1D, Periodic, straight_d2
from services.optimizer import efficiency_surface, search_straight
from services.output import (
    csv_text,
    read_table,
    write_csv,
    write_json,
    write_resolved_config,
    write_snapshot,
)
from services.pde_suite import DEFAULT_GRIDS, oa_mixed, oa_straight, run_diffusion
from services.spectral import scheme_report, spectra_rows

logger = logging.getLogger("viscous")

ALL_SCHEMES = ("me4-base", "me4-opti", "me6-base", "me6-opti", "visbal-e4", "visbal-e6")


def status(symbol: str, message: str) -> None:
    print(f"{symbol} {message}", file=sys.stderr)


# Argument types

def _scheme_list(text: str) -> str:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty scheme list")
    for name in names:
        if name.lower() == "all":
            continue
        try:
            SchemeId.parse(name)
        except UnsupportedSchemeError as e:
            raise argparse.ArgumentTypeError(str(e))
    return ",".join(names)


def _scheme_name(text: str) -> str:
    name = text.strip()
    try:
        return SchemeId.parse(name).slug
    except UnsupportedSchemeError as e:
        raise argparse.ArgumentTypeError(str(e))


def _grid_list(text: str) -> List[int]:
    try:
        grids = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")
    if not grids:
        raise argparse.ArgumentTypeError("empty grid list")
    if any(b <= a for a, b in zip(grids, grids[1:])):
        raise argparse.ArgumentTypeError("grids must be strictly increasing")
    return grids


def _samples(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 16:
        raise argparse.ArgumentTypeError("the wavenumber grid needs at least 16 samples")
    return value


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _interval(text: str) -> List[Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return [_rational(p) for p in parts]


def _int_pair(text: str) -> List[int]:
    parts = text.split(",")
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI integers, got {text!r}")
    return [lo, hi]


def _grid_shape(text: str) -> str:
    try:
        nx, ny = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}")
    if nx < 8 or ny < 8:
        raise argparse.ArgumentTypeError("each grid dimension needs at least 8 points")
    return f"{nx}x{ny}"


# Parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="flat JSON config file; flags override its values")
    common.add_argument("--progress", action="store_true", help="show progress bars")
    common.add_argument("--format", choices=["csv", "json"])

    parser = argparse.ArgumentParser(prog="viscous", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text, argument_default=argparse.SUPPRESS)

    p = add("coeffs", "dump exact stencil coefficients")
    p.add_argument("--scheme", type=_scheme_list)
    p.add_argument("--term", choices=["straight", "mixed"])

    p = add("spectra", "modified-wavenumber curves and spectral metrics")
    p.add_argument("--scheme", type=_scheme_list)
    p.add_argument("--term", choices=["straight", "mixed"])
    p.add_argument("--samples", type=_samples, help="points on the wavenumber grid [0, pi]")
    p.add_argument("--eps", type=float)
    p.add_argument("--no-filter-penalty", dest="filter_penalty", action="store_false")

    p = add("optimize", "search the free leading-error parameters")
    p.add_argument("--order", type=int, choices=[4, 6])
    p.add_argument("--eps", type=float)
    p.add_argument("--samples", type=_samples)
    p.add_argument("--range", dest="interval", type=_interval, action="append",
                   help="LO,HI for one parameter; repeat in parameter order")
    p.add_argument("--step", type=_rational, action="append", help="scan step for the matching --range")

    p = add("oa", "order-of-accuracy study")
    p.add_argument("--scheme", type=_scheme_list)
    p.add_argument("--term", choices=["straight", "mixed"])
    p.add_argument("--grids", type=_grid_list)
    p.add_argument("--no-filter-penalty", dest="filter_penalty", action="store_false")

    p = add("diffuse", "unsteady nonlinear diffusion benchmark")
    p.add_argument("--scheme", type=_scheme_list)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--tend", dest="t_end", type=float)
    p.add_argument("--nu-mean", dest="nu_mean", type=float)
    p.add_argument("--nu-amp", dest="nu_amp", type=float)

    for name, help_text in (("run", "compressible flow benchmark"),
                            ("scan-theta", "largest stable filter cycle for a benchmark")):
        p = add(name, help_text)
        p.add_argument("--case", choices=["dpsl", "khi", "quirk"])
        p.add_argument("--grid", type=_grid_shape, help="NxM")
        p.add_argument("--scheme", type=_scheme_name)
        p.add_argument("--cfl", type=float)
        p.add_argument("--tend", dest="t_end", type=float)
        p.add_argument("--dt", type=float)
        if name == "run":
            p.add_argument("--theta", type=int)
        else:
            p.add_argument("--theta-range", dest="theta_range", type=_int_pair, help="LO,HI")

    p = add("apply", "apply a straight operator to a periodic CSV field")
    p.add_argument("--scheme", type=_scheme_list)
    p.add_argument("--input", help="CSV with a phi column and an optional mu column")
    p.add_argument("--spacing", type=float)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Config file values first, then command-line flags"""
    values: Dict[str, object] = {}
    options = vars(args).copy()
    path = options.pop("config", None)
    if path:
        with open(path, encoding="utf-8") as f:
            values.update(RunConfig.model_validate_json(f.read()).model_dump(exclude_unset=True))
    intervals = options.pop("interval", None)
    steps = options.pop("step", None)
    if intervals is not None:
        order = options.get("order", values.get("order"))
        defaults = SearchConfig(order=order).ranges
        if len(intervals) != len(defaults):
            raise ValueError(f"order {order} takes {len(defaults)} --range values, got {len(intervals)}")
        steps = steps or [r.step for r in defaults]
        if len(steps) != len(intervals):
            raise ValueError("give one --step per --range")
        values["ranges"] = [ParameterRange(lo=lo, hi=hi, step=s) for (lo, hi), s in zip(intervals, steps)]
    values.update(options)
    return RunConfig.model_validate(values)


# Commands

def _schemes(cfg: RunConfig) -> List[SchemeId]:
    if not cfg.scheme:
        raise ValueError("--scheme is required")
    names: List[str] = []
    for name in cfg.scheme.split(","):
        names.extend(ALL_SCHEMES if name.lower() == "all" else [name])
    return [SchemeId.parse(name, cfg.term) for name in names]


def _path(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out, name)


def cmd_coeffs(cfg: RunConfig) -> int:
    for scheme in _schemes(cfg):
        records = coefficient_dump(scheme)
        path = write_json(_path(cfg, f"coeffs-{scheme.slug}-{scheme.term.value}.json"), records)
        status("✓", f"{scheme}: {len(records)} stencil records -> {path}")
    return 0


def cmd_spectra(cfg: RunConfig) -> int:
    for scheme in _schemes(cfg):
        report = scheme_report(scheme, cfg.term, cfg.eps, cfg.samples, cfg.filter_penalty)
        stem = f"spectra-{scheme.slug}-{cfg.term}"
        write_csv(_path(cfg, stem + ".csv"), ("k", "kstar_exact", "kstar_scheme", "spectral_viscosity"),
                  spectra_rows(report.curve))
        write_json(_path(cfg, stem + ".json"), report.as_dict())
        status("✓", f"{scheme}: e_v={report.resolving_efficiency:.4f}, "
                    f"over-dissipation={report.overdissipation:.6f} at k={report.overdissipation_k:.4f}")
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    if cfg.order is None:
        raise ValueError("--order is required")
    search = SearchConfig(order=cfg.order, ranges=cfg.ranges, keep_surface=False,
                          **{k: v for k, v in (("eps", cfg.eps), ("samples", cfg.samples)) if v is not None})
    result = search_straight(cfg.order, search, cfg.progress)
    payload = result.as_dict()
    payload["search"] = search.model_dump(mode="json")
    write_json(_path(cfg, f"optimize-o{cfg.order}.json"), payload)
    surface = efficiency_surface(cfg.order, search, progress=cfg.progress)
    write_csv(_path(cfg, f"surface-o{cfg.order}.csv"), ("param_a", "param_b", "efficiency", "feasible"),
              surface.rows())
    params = ", ".join(str(p) for p in result.optimal_params)
    if result.feasible:
        status("✓", f"order {cfg.order}: optimum ({params}) with e_v={result.efficiency:.4f}")
    else:
        status("⚠", f"order {cfg.order}: no feasible point in the scanned ranges")
    return 0


def cmd_oa(cfg: RunConfig) -> int:
    grids = cfg.grids or list(DEFAULT_GRIDS)
    for scheme in _schemes(cfg):
        if scheme.term is TermKind.MIXED:
            study = oa_mixed(scheme, grids, filter_penalty=cfg.filter_penalty)
        else:
            study = oa_straight(scheme, grids)
        stem = f"oa-{scheme.slug}-{cfg.term}"
        rows = list(study.rows())
        if cfg.format == "json":
            write_json(_path(cfg, stem + ".json"), study.as_dict())
        else:
            write_csv(_path(cfg, stem + ".csv"), ("N", "L1", "order"), rows)
            write_json(_path(cfg, stem + "-summary.json"), study.as_dict())
        sys.stdout.write(csv_text(("N", "L1", "order"), rows))
        status("✓", f"{study.scheme} {study.term}: L1 at N={grids[-1]} is {study.errors[-1]:.4e}")
    return 0


def cmd_diffuse(cfg: RunConfig) -> int:
    for scheme in _schemes(cfg):
        overrides = {k: getattr(cfg, k) for k in ("n", "dt", "t_end", "nu_mean", "nu_amp") if getattr(cfg, k) is not None}
        case = DiffusionCase(scheme=scheme.slug, **overrides)
        result = run_diffusion(case, cfg.progress)
        stem = f"diffuse-{scheme.slug}-n{case.n}"
        write_csv(_path(cfg, stem + "-profile.csv"), ("x", "f"), zip(result.x, result.f))
        write_csv(_path(cfg, stem + "-history.csv"), ("t", "max_f"), result.rows())
        write_json(_path(cfg, stem + ".json"), {"case": case.model_dump(), "peak": result.peak,
                                                 "t": result.times[-1]})
        status("✓", f"{scheme.name} N={case.n}: MAX(f)={result.peak:.6f} at t={result.times[-1]:.6g}")
    return 0


def _case_config(cfg: RunConfig) -> CaseConfig:
    values = {"case": cfg.case, "cfl": cfg.cfl, "t_end": cfg.t_end, "dt": cfg.dt}
    if cfg.grid:
        nx, ny = (int(p) for p in cfg.grid.lower().split("x"))
        values.update(nx=nx, ny=ny)
    return CaseConfig.model_validate(values)


def _snapshot_fields(state) -> Dict[str, np.ndarray]:
    vx, vy = state.velocity
    return {"rho": state.rho, "u": vx, "v": vy, "p": state.pressure}


def _write_state(cfg: RunConfig, stem: str, state) -> None:
    fields = _snapshot_fields(state)
    if cfg.format == "json":
        write_snapshot(_path(cfg, stem), fields, state.grid.spacings, state.t)
        return
    x, y = state.grid.centres()
    columns = [x, y] + list(fields.values())
    write_csv(_path(cfg, stem + ".csv"), ("x", "y") + tuple(fields),
              zip(*(np.ravel(c) for c in columns)))


def cmd_run(cfg: RunConfig) -> int:
    if cfg.case is None:
        raise ValueError("--case is required")
    case = _case_config(cfg)
    scheme = SchemeId.parse(cfg.scheme or "me4-opti")
    policy = case.resolve_filter(FilterPolicy(theta=cfg.theta)) if cfg.theta else None
    result = run_case(case, scheme, policy, cfg.progress)

    stem = f"{case.case}-{scheme.slug}"
    write_csv(_path(cfg, stem + "-diagnostics.csv"), ("t", "kinetic_energy", "dissipation_rate", "enstrophy"),
              result.diagnostics.rows())
    for i, snapshot in enumerate(result.snapshots):
        _write_state(cfg, f"{stem}-snapshot-{i:04d}", snapshot)
    _write_state(cfg, f"{stem}-final", result.state)
    write_json(_path(cfg, stem + "-run.json"), {
        "version": __version__,
        "config": cfg.model_dump(mode="json"),
        "case": case.model_dump(mode="json"),
        "filter": policy.model_dump() if policy else None,
        "summary": result.summary(),
    })
    if result.status == "blown_up":
        raise NumericalInstabilityError(f"{case.case} with {scheme.name} blew up",
                                        step=(result.failure or {}).get("step"))
    symbol = "✓" if result.completed else "⚠"
    status(symbol, f"{case.case} with {scheme.name}: {result.status} after {result.steps} steps (t={result.state.t:.6g})")
    return 0


def cmd_scan_theta(cfg: RunConfig) -> int:
    if cfg.case is None:
        raise ValueError("--case is required")
    case = _case_config(cfg)
    scheme = SchemeId.parse(cfg.scheme or "me4-opti")
    scan = theta_stability_scan(case, scheme, tuple(cfg.theta_range or (1, 400)), progress=cfg.progress)
    write_json(_path(cfg, f"scan-theta-{case.case}-{scheme.slug}.json"), scan.as_dict())
    if scan.maximal_stable is None:
        status("⚠", f"{case.case} with {scheme.name}: unstable for every theta tried")
    else:
        status("✓", f"{case.case} with {scheme.name}: maximal stable theta = {scan.maximal_stable}")
    return 0


def cmd_apply(cfg: RunConfig) -> int:
    if not cfg.input or cfg.spacing is None:
        raise ValueError("--input and --spacing are required")
    table = read_table(cfg.input)
    phi = table[:, 0]
    mu = table[:, 1] if table.shape[1] > 1 else 1.0
    for scheme in _schemes(cfg):
        result = straight_d2(Field1D(phi, cfg.spacing, boundary=Periodic()), mu, scheme)
        path = write_csv(_path(cfg, f"apply-{scheme.slug}.csv"), ("i", "d2"), enumerate(result.values))
        status("✓", f"{scheme.name} applied to {phi.size} values -> {path}")
    return 0


HANDLERS: Dict[str, Callable[[RunConfig], int]] = {
    "coeffs": cmd_coeffs,
    "spectra": cmd_spectra,
    "optimize": cmd_optimize,
    "oa": cmd_oa,
    "diffuse": cmd_diffuse,
    "run": cmd_run,
    "scan-theta": cmd_scan_theta,
    "apply": cmd_apply,
}


def _error_record(e: Exception) -> str:
    record = {"error": type(e).__name__, "message": str(e)}
    if isinstance(e, NumericalInstabilityError):
        record.update(e.as_record())
    return json.dumps(record, sort_keys=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=Config.LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        cfg = load_config(args)
    except (ValidationError, ValueError) as e:
        print(_error_record(e), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except OSError as e:
        print(_error_record(e), file=sys.stderr)
        return 1

    try:
        logger.debug("resolved config: %s", cfg.model_dump(mode="json"))
        write_resolved_config(cfg.out, cfg.model_dump(mode="json"))
        return HANDLERS[cfg.command](cfg)
    except (SchemeError, OSError) as e:
        status("✗", f"{cfg.command} failed: {e}")
        print(_error_record(e), file=sys.stderr)
        return 1
    except ValueError as e:
        print(_error_record(e), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

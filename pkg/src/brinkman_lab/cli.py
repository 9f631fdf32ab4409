"""
Command-line front end.

    brinkman-lab klevel CONFIG [--output DIR]
    brinkman-lab limit CONFIG [--output DIR]
    brinkman-lab converge CONFIG [--ks 20,80,320] [--times 0.25,0.5] [--delta 0.1]
    brinkman-lab selftest

Exit codes: 0 success, 1 configuration error, 2 solver error, 3 failed
convergence assertion.  ``BRINKMAN_THREADS`` caps the worker pool used by
``converge``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config
from .errors import ConfigError, ConvergenceAssertionError, SolverError
from .harness import convergence_sweep
from .io import atomic_write_text, rows_csv, write_field, write_field_csv
from .klevel import run_klevel
from .limit import run_limit
from .selftest import format_table, run_selftest

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CONVERGENCE = 0, 1, 2, 3

KLEVEL_SUMMARY = ("t", "min_p", "max_p", "max_n", "max_W", "mass_n", "max_speed")
LIMIT_SUMMARY = ("t", "max_p", "max_W", "area", "max_speed", "fixed_point_sweeps")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"not a comma-separated list of numbers: {text!r}") from exc


def _output_dir(cfg: RunConfig, override) -> Path:
    return Path(override if override is not None else cfg.output_dir)


def _dump(out: Path, name: str, field, fmt: str) -> None:
    if fmt == "csv":
        write_field_csv(out / f"{name}.csv", field)
    elif fmt == "binary":
        write_field(out / f"{name}.blf", field)
    else:
        raise ConfigError(f"unknown output format {fmt!r}")


def _snapshot_times(section: dict) -> list:
    times = list(section["snapshots"]) or [section["t_end"]]
    if any(t > section["t_end"] + 1e-12 or t < 0 for t in times):
        raise ConfigError("snapshot times must lie in [0, t_end]")
    return sorted(times)


def _format(cfg: RunConfig) -> str:
    return cfg.sections.get("output", {}).get("format", "binary")


def cmd_klevel(cfg: RunConfig, output=None) -> int:
    config = cfg.klevel_config()
    times = _snapshot_times(cfg["klevel"])
    out = _output_dir(cfg, output)
    fmt = _format(cfg)
    atomic_write_text(out / "config.ini", cfg.to_text())
    run = run_klevel(config, times)
    rows = []
    for i, s in enumerate(run.snapshots):
        for name, field in (("p", s.p), ("n", s.n), ("W", s.W)):
            _dump(out, f"klevel_{name}_{i:03d}", field, fmt)
        mass = float(s.n.values.sum() * s.grid.cell_volume)
        rows.append((s.t, s.p.min(), s.p.max(), s.n.max(), s.W.max(), mass, s.V.max_norm()))
    atomic_write_text(out / "klevel_summary.csv", rows_csv(KLEVEL_SUMMARY, rows))
    print(f"k-level run: {len(run.snapshots)} snapshots, {run.steps} steps -> {out}")
    return EXIT_OK


def cmd_limit(cfg: RunConfig, output=None) -> int:
    cfg.require("limit")
    lim = cfg["limit"]
    el = cfg.sections.get("elliptic", {})
    times = _snapshot_times(lim)
    grid, law, omega0 = cfg.grid(), cfg.law(), cfg.omega0()
    out = _output_dir(cfg, output)
    fmt = _format(cfg)
    atomic_write_text(out / "config.ini", cfg.to_text())
    states = run_limit(omega0, law, grid, times, cfl=lim["cfl"], dt_max=lim["dt_max"],
                       method=el.get("method", "spectral"), corrector=lim["corrector"])
    rows = []
    for i, s in enumerate(states):
        for name, field in (("theta", s.theta), ("p", s.p), ("n", s.n), ("W", s.W)):
            _dump(out, f"limit_{name}_{i:03d}", field, fmt)
        area = float(s.n.values.sum() * grid.cell_volume)
        sweeps = s.stats.sweeps if s.stats is not None else 0
        rows.append((s.t, s.p.max(), s.W.max(), area, s.V.max_norm(), sweeps))
    atomic_write_text(out / "limit_summary.csv", rows_csv(LIMIT_SUMMARY, rows))
    print(f"limit run: {len(states)} snapshots -> {out}")
    return EXIT_OK


def cmd_converge(cfg: RunConfig, ks=None, times=None, delta=None, output=None) -> int:
    conv = cfg.sections.get("converge", {})
    ks = _float_list(ks) if ks is not None else tuple(conv.get("ks", ()))
    times = _float_list(times) if times is not None else tuple(conv.get("times", ()))
    if len(ks) < 2:
        raise ConfigError("--ks needs at least two values")
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ConfigError("--ks must be ascending")
    if not times:
        times = (cfg["klevel"]["t_end"],) if cfg.has("klevel") else ()
    if not times or min(times) <= 0:
        raise ConfigError("comparison times must be given and positive")
    config = cfg.klevel_config()
    config = replace(config, t_end=max(config.t_end, max(times)))
    if delta is None:
        delta = conv.get("delta", 0.0) or 0.1 * config.omega0.diameter
    tol_pos = conv.get("tol_pos", 0.0) or None
    out = _output_dir(cfg, output)
    atomic_write_text(out / "config.ini", cfg.to_text())
    report = convergence_sweep(config, ks, times, float(delta), conv.get("p_norm", 2.0),
                               tol_pos, check=False,
                               limit_corrector=cfg.sections.get("limit", {}).get("corrector", False))
    atomic_write_text(out / "convergence.csv", report.to_csv())
    summary = report.summary()
    atomic_write_text(out / "convergence_summary.txt", summary + "\n")
    print(summary)
    bad = report.monotonicity_failures()
    if bad:
        raise ConvergenceAssertionError("; ".join(bad))
    return EXIT_OK


def cmd_selftest() -> int:
    results = run_selftest()
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brinkman-lab", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("klevel", "limit", "converge"):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--output", help="output directory (overrides output.dir)")
        if name == "converge":
            p.add_argument("--ks", help="comma-separated ascending stiffness ladder")
            p.add_argument("--times", help="comma-separated comparison times")
            p.add_argument("--delta", type=float, help="exclusion band half-width")
    sub.add_parser("selftest")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest()
        cfg = load_config(args.config)
        if args.command == "klevel":
            return cmd_klevel(cfg, args.output)
        if args.command == "limit":
            return cmd_limit(cfg, args.output)
        return cmd_converge(cfg, args.ks, args.times, args.delta, args.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ConvergenceAssertionError as exc:
        print(f"convergence assertion failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())

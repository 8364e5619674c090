"""
Command-line front end.

    chermnykh locate|trajectory|perturb|sweep|report [--config PATH]
        [--set key=value]... [--out DIR] [--jobs N] [--no-plots]

Exit codes: 0 success, 2 configuration error, 3 equilibrium solver failure,
4 integration failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, output
from .config import ConfigError, apply_overrides, build, read_config
from .dynamics import InvalidInitialError, Termination, integrate
from .equilibria import EquilibriumError, locate_all, solve_point
from .model import State
from .reference import table_reference
from .stability import resolve_jobs, run_perturbed, sweep

log = logging.getLogger("chermnykh")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INTEGRATION = 0, 2, 3, 4
COMMANDS = ("locate", "trajectory", "perturb", "sweep", "report")


class CommandFailed(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _use_color(stream) -> bool:
    return "NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def _bold(text, color):
    return f"\033[1m{text}\033[0m" if color else text


def _manifest(cfg, outputs):
    resolved = cfg.resolved()
    return {
        "tool": "chermnykh",
        "version": __version__,
        "command": cfg.command,
        "config": resolved,
        "input_hash": output.input_hash(resolved, cfg.source),
        "outputs": sorted(outputs),
    }


def _plot(cfg, name, *args):
    if not cfg.plots:
        return None
    from . import plotting

    if not plotting.available():
        log.warning("matplotlib not installed; skipping figure %s", args[-1])
        return None
    return getattr(plotting, name)(*args)


def _solve(params, index):
    try:
        return solve_point(params, index)
    except (EquilibriumError, ArithmeticError) as exc:
        raise CommandFailed(EXIT_SOLVER, f"equilibrium solver failed for {index.value}: {exc}") from exc


def points_table(points, reference=None, color=False) -> str:
    head = f"{'L':<4}{'x':>22}{'y':>22}{'residual':>12}{'iter':>6}"
    if reference:
        head += f"{'ref x':>12}{'ref y':>12}"
    lines = [_bold(head, color)]
    for pt in points:
        line = f"{pt.index.value:<4}{pt.x:>22.15f}{pt.y:>22.15f}{pt.residual:>12.2e}{pt.iterations:>6d}"
        if reference:
            ref = reference.get(pt.index.value)
            if ref is None and pt.index.value == "L5" and "L4" in reference:
                ref = (reference["L4"][0], -reference["L4"][1])
            if ref:
                line += f"{ref[0]:>12.6f}{ref[1]:>12.6f}"
        lines.append(line)
    return "\n".join(lines)


def cmd_locate(cfg, out: Path) -> int:
    try:
        points = locate_all(cfg.params)
    except EquilibriumError as exc:
        raise CommandFailed(EXIT_SOLVER, f"equilibrium solver failed at {exc.index.value}: {exc}") from exc
    reference = table_reference(cfg.params)
    report = {"params": cfg.params.as_dict(), "points": [p.as_dict() for p in points]}
    if reference:
        report["reference"] = {
            k: {"x": v[0], "y": v[1], "dx": points[i].x - v[0], "dy": points[i].y - v[1]}
            for i, (k, v) in enumerate(reference.items())
        }
    written = [output.write_json(out / "points.json", report)]
    fig = _plot(cfg, "plot_points", cfg.params, points, out / "points.png")
    if fig:
        written.append(fig)
    output.write_json(out / "manifest.json", _manifest(cfg, [w.name for w in written]))
    print(points_table(points, reference, color=_use_color(sys.stdout)))
    return EXIT_OK


def _summary(traj):
    drift = traj.energy_drift
    return {
        "termination": traj.termination.value,
        "t_escape": traj.t_escape,
        "t_event": traj.t_event,
        "energy_initial": float(traj.energy[0]),
        "energy_drift": drift,
        "energy_drift_relative": drift / abs(float(traj.energy[0])) if traj.energy[0] else None,
        "max_r_local": float(traj.r_local.max()),
        "samples": len(traj),
        "final_state": list(traj.state(len(traj) - 1).as_tuple()),
        "t_final": float(traj.t[-1]),
        "stats": traj.stats,
    }


def _check_failure(traj):
    if traj.termination in (Termination.SINGULARITY, Termination.STEP_UNDERFLOW):
        raise CommandFailed(
            EXIT_INTEGRATION,
            f"integration stopped: {traj.termination.value} at t={traj.t_event!r}",
        )


def _initial(cfg):
    if cfg.initial is not None:
        return None, cfg.initial
    point = _solve(cfg.params, cfg.point)
    return point, State(0.0, point.x, point.y)


def cmd_trajectory(cfg, out: Path) -> int:
    point, initial = _initial(cfg)
    if cfg.perturbation is not None and point is not None:
        from .stability import perturb_ic

        initial = perturb_ic(point, cfg.perturbation)
    try:
        traj = integrate(cfg.params, initial, cfg.integrator)
    except InvalidInitialError as exc:
        raise CommandFailed(EXIT_INTEGRATION, f"integration failed (singularity): {exc}") from exc
    summary = _summary(traj)
    if point is not None:
        summary["point"] = point.as_dict()
    written = [
        output.atomic_write(out / "trajectory.csv", output.trajectory_csv(traj)),
        output.write_json(out / "summary.json", summary),
    ]
    fig = _plot(cfg, "plot_trajectory", traj, out / "trajectory.png")
    if fig:
        written.append(fig)
    output.write_json(out / "manifest.json", _manifest(cfg, [w.name for w in written]))
    print(f"{traj.termination.value}: {len(traj)} samples, t_final={traj.t[-1]:.6g}, "
          f"energy drift {traj.energy_drift:.3e}")
    _check_failure(traj)
    return EXIT_OK


def cmd_perturb(cfg, out: Path) -> int:
    point = _solve(cfg.params, cfg.point)
    try:
        traj, verdict = run_perturbed(cfg.params, point, cfg.perturbation, cfg.integrator)
    except InvalidInitialError as exc:
        raise CommandFailed(EXIT_INTEGRATION, f"integration failed (singularity): {exc}") from exc
    report = {"point": point.as_dict(), "verdict": verdict.as_dict(), "trajectory": _summary(traj)}
    written = [
        output.atomic_write(out / "trajectory.csv", output.trajectory_csv(traj)),
        output.write_json(out / "verdict.json", report),
    ]
    fig = _plot(cfg, "plot_trajectory", traj, out / "trajectory.png")
    if fig:
        written.append(fig)
    output.write_json(out / "manifest.json", _manifest(cfg, [w.name for w in written]))
    state = "bounded" if verdict.bounded else f"unbounded ({traj.termination.value} at t={traj.t_event:.6g})"
    print(f"{point.index.value} eps={verdict.perturbation.epsilon:g} phi={verdict.perturbation.phi:.6g}: {state}, "
          f"max displacement {verdict.max_displacement:.3e}")
    _check_failure(traj)
    return EXIT_OK


def cmd_sweep(cfg, out: Path, jobs) -> int:
    table = sweep(
        cfg.params,
        cfg.axes,
        cfg.perturbation,
        cfg.integrator,
        index=cfg.point,
        recompute=cfg.recompute,
        jobs=jobs,
    )
    n_failed = sum(r.verdict.failed for r in table)
    summary = {
        "axes": list(table.axes),
        "shape": list(table.shape),
        "cells": len(table),
        "bounded": sum(r.verdict.bounded for r in table),
        "failed": n_failed,
        "t_end": cfg.integrator.t_end,
    }
    written = [
        output.atomic_write(out / "sweep.csv", output.sweep_csv(table)),
        output.write_json(out / "summary.json", summary),
    ]
    fig = _plot(cfg, "plot_sweep", table, cfg.integrator.t_end, out / "sweep.png")
    if fig:
        written.append(fig)
    output.write_json(out / "manifest.json", _manifest(cfg, [w.name for w in written]))
    print(f"{len(table)} cells, {summary['bounded']} bounded, {n_failed} failed")
    return EXIT_OK


def cmd_report(cfg, out: Path, jobs, t_end=None) -> int:
    from .report import build_report

    build_report(out, t_end=t_end, jobs=jobs, plots=cfg.plots)
    print(f"reproduction report written to {out / 'reproduction.md'}")
    return EXIT_OK


def make_parser():
    ap = argparse.ArgumentParser(prog="chermnykh", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="INI configuration file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key (section.key or bare key)")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--jobs", type=int, default=None, help="parallel workers for sweeps (default: all CPUs)")
        sp.add_argument("--no-plots", action="store_true", help="skip figure rendering")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "report":
            sp.add_argument("--t-end", type=float, default=None,
                            help="horizon for the long stability runs (default 3000)")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw, source = read_config(args.config)
        raw = apply_overrides(raw, args.set)
        command = "locate" if args.command == "report" else args.command
        cfg = build(command, raw, source, plots=False if args.no_plots else None)
        cfg.command = args.command
        if args.jobs is not None and args.jobs < 0:
            raise ConfigError("--jobs must be >= 0")
        jobs = resolve_jobs(args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out
    try:
        if args.command == "locate":
            return cmd_locate(cfg, out)
        if args.command == "trajectory":
            return cmd_trajectory(cfg, out)
        if args.command == "perturb":
            return cmd_perturb(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, jobs)
        return cmd_report(cfg, out, jobs, t_end=args.t_end)
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

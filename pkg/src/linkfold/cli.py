"""Command-line interface: batch access to the workbench simulators.

Exit codes: 0 success, 2 validation error, 3 kinematic or optical
infeasibility, 64 usage error.  `LINKFOLD_THREADS` caps internal
parallelism (0 = auto); all current computations are single-threaded,
so any cap is honored trivially.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import design as dg
from . import finger as fg
from . import optics as op
from . import perception as pc
from . import workbench as wb
from .errors import (AssemblyError, ConditioningError, ConvergenceError,
                     DomainError, FeatureExtractionError, GeometryError,
                     LinkfoldError, SingularityError, ValidationError,
                     VisibilityError)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_USAGE = 64

_INFEASIBLE = (AssemblyError, ConvergenceError, SingularityError,
               GeometryError, VisibilityError, FeatureExtractionError,
               ConditioningError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _write_bytes(path: str, blob: bytes) -> None:
    with open(path, "wb") as f:
        f.write(blob)


def _load_project(path: str) -> wb.Project:
    return wb.project_from_dict(wb.loads(_read_text(path)))


def _thread_cap() -> int:
    raw = os.environ.get("LINKFOLD_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"LINKFOLD_THREADS={raw!r} is not an integer")
    if n < 0:
        raise ValidationError("LINKFOLD_THREADS must be >= 0")
    return n


def _config_dict(config: fg.FingerConfig) -> dict:
    return {
        "format": wb.FORMAT_VERSION,
        "kind": "finger_config",
        "actuator_deg": config.actuator_deg,
        "theta_pip_deg": config.theta_pip_deg,
        "theta_dip_deg": config.theta_dip_deg,
    }


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_solve(args) -> int:
    project = _load_project(args.project)
    config = fg.free_motion(project.finger, args.actuator_deg)
    _write_text(args.output, wb.dumps(_config_dict(config)))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.step_deg <= 0:
        raise ValidationError("step must be positive")
    params = _load_project(args.project).finger
    rows = [(cfg.actuator_deg, cfg.theta_pip_deg, cfg.theta_dip_deg, *trans)
            for cfg, trans in fg.closing_path(params, args.step_deg)]
    _write_text(args.output, wb.sweep_csv(rows))
    return EXIT_OK


def _cmd_coverage(args) -> int:
    project = _load_project(args.project)
    if args.config is not None:
        grid = [fg.FingerConfig(0.0, args.config[0], args.config[1])]
    else:
        grid = op.config_grid(args.grid)
    report = op.coverage_sweep(project.finger, project.template, grid)
    payload = {
        "format": wb.FORMAT_VERSION,
        "kind": "coverage_report",
        "maximin_fraction": report.maximin,
        "min_fraction": dict(report.min_fraction),
        "mean_fraction": dict(report.mean_fraction),
        "entries": [
            {"theta_pip_deg": e.config.theta_pip_deg,
             "theta_dip_deg": e.config.theta_dip_deg,
             "fractions": dict(e.fractions), "feasible": e.feasible}
            for e in report.entries
        ],
    }
    _write_text(args.output, wb.dumps(payload))
    if args.svg is not None:
        config = grid[0]
        scene = op.build_scene(project.finger, project.template, config)
        step = max(scene.camera.pixels // 48, 1)
        rays = tuple(op.trace_ray(scene, k)
                     for k in range(0, scene.camera.pixels, step))
        _write_text(args.svg, wb.emit_svg(project.finger, config,
                                          scene=scene, rays=rays))
    return EXIT_OK


def _cmd_optimize_linkage(args) -> int:
    project = _load_project(args.project)
    space = project.linkage_space
    if space is None:
        space = dg.default_linkage_space()
    result = dg.optimize_linkage(space, budget=args.budget, seed=args.seed)
    _write_text(args.output, wb.dumps(wb.design_result_to_dict(result)))
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def _cmd_optimize_optics(args) -> int:
    project = _load_project(args.project)
    space = project.optics_space
    if space is None:
        space = dg.default_optics_space()
    result = dg.optimize_optics(space, project.finger,
                                budget=args.budget, seed=args.seed)
    _write_text(args.output, wb.dumps(wb.design_result_to_dict(result)))
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def _cmd_grasp(args) -> int:
    params = _load_project(args.project).finger
    obj, start = fg.seated_circle(params, args.diameter)
    trace = fg.simulate_grasp(params, obj, torque_limit=args.torque_limit,
                              step_deg=args.step_deg,
                              start_actuator_deg=start)
    _write_text(args.output, wb.grasp_csv(trace))
    return EXIT_OK if trace.reached else EXIT_INFEASIBLE


def _cmd_render(args) -> int:
    project = _load_project(args.project)
    config = fg.FingerConfig(0.0, args.pip_deg, args.dip_deg)
    img = pc.synth_render(project.finger, config,
                          template=project.template, height=args.height)
    _write_bytes(args.output, wb.write_pgm(img))
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    if args.step_deg <= 0:
        raise ValidationError("step must be positive")
    project = _load_project(args.project)
    values = tuple(np.arange(0.0, 90.0 + 1e-9, args.step_deg))
    table = pc.build_calibration(project.finger, values, values,
                                 template=project.template,
                                 height=args.height)
    _write_text(args.output, wb.dumps(wb.table_to_dict(table)))
    return EXIT_OK


def _cmd_estimate(args) -> int:
    table = wb.table_from_dict(wb.loads(_read_text(args.table)))
    try:
        with open(args.image, "rb") as f:
            img = wb.read_pgm(f.read())
    except OSError as e:
        raise ValidationError(f"cannot read {args.image}: {e}")
    est = pc.estimate_joint_angles(table, img)
    payload = {
        "format": wb.FORMAT_VERSION,
        "kind": "joint_estimate",
        "theta_pip_deg": est.pip_deg,
        "theta_dip_deg": est.dip_deg,
        "confidence": est.confidence,
        "residual_px": est.residual_px,
    }
    _write_text(args.output, wb.dumps(payload))
    return EXIT_OK


def _cmd_width(args) -> int:
    params = _load_project(args.project).finger
    config = fg.FingerConfig(0.0, args.pip_deg, args.dip_deg)
    width = fg.estimate_width(params, config)
    payload = {
        "format": wb.FORMAT_VERSION,
        "kind": "width_estimate",
        "theta_pip_deg": args.pip_deg,
        "theta_dip_deg": args.dip_deg,
        "width_mm": width,
    }
    _write_text(args.output, wb.dumps(payload))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument wiring


def _pair_arg(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected PIP,DIP degrees")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError("expected numeric PIP,DIP")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linkfold",
                     description="Finger design workbench batch interface")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        p.add_argument("-o", "--output", default=None,
                       help="output path (default stdout)")
        return p

    p = cmd("solve", _cmd_solve, "free motion at one actuator angle")
    p.add_argument("--project", required=True)
    p.add_argument("--actuator-deg", type=float, required=True)

    p = cmd("sweep", _cmd_sweep, "actuator sweep CSV with transmission angles")
    p.add_argument("--project", required=True)
    p.add_argument("--step-deg", type=float, default=0.5)

    p = cmd("coverage", _cmd_coverage, "pad visibility over a joint grid")
    p.add_argument("--project", required=True)
    p.add_argument("--grid", type=float, default=5.0,
                   help="grid step in degrees")
    p.add_argument("--config", type=_pair_arg, default=None,
                   help="single PIP,DIP configuration instead of a grid")
    p.add_argument("--svg", default=None,
                   help="also emit a traced schematic to this path")

    p = cmd("optimize-linkage", _cmd_optimize_linkage,
            "search link lengths for ROM and transmission margin")
    p.add_argument("--project", required=True)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = cmd("optimize-optics", _cmd_optimize_optics,
            "search camera and mirror placement for coverage")
    p.add_argument("--project", required=True)
    p.add_argument("--budget", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)

    p = cmd("grasp", _cmd_grasp, "close on a seated circle, trace CSV")
    p.add_argument("--project", required=True)
    p.add_argument("--diameter", type=float, required=True)
    p.add_argument("--torque-limit", type=float, default=500.0)
    p.add_argument("--step-deg", type=float, default=0.25)

    p = cmd("render", _cmd_render, "synthetic tactile frame as P5 graymap")
    p.add_argument("--project", required=True)
    p.add_argument("--pip-deg", type=float, required=True)
    p.add_argument("--dip-deg", type=float, required=True)
    p.add_argument("--height", type=int, default=pc.RENDER_HEIGHT)
    p.set_defaults(output=None)

    p = cmd("calibrate", _cmd_calibrate, "build a joint-angle lookup table")
    p.add_argument("--project", required=True)
    p.add_argument("--step-deg", type=float, default=3.0)
    p.add_argument("--height", type=int, default=pc.RENDER_HEIGHT)

    p = cmd("estimate", _cmd_estimate, "joint angles from a tactile frame")
    p.add_argument("--table", required=True)
    p.add_argument("--image", required=True)

    p = cmd("width", _cmd_width, "grasped-object width from a configuration")
    p.add_argument("--project", required=True)
    p.add_argument("--pip-deg", type=float, required=True)
    p.add_argument("--dip-deg", type=float, required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        _thread_cap()
        if args.fn is _cmd_render and args.output is None:
            raise ValidationError("render requires -o (binary output)")
        return args.fn(args)
    except (ValidationError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except _INFEASIBLE as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except LinkfoldError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

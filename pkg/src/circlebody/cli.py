"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 singularity (or
other breakdown) during a run, 3 a verification check failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .algebraic import trajectory_algebraic
from .config import RandomInitial, RunConfig, load_config
from .errors import CircleBodyError, ConfigError, SingularityError, StepLimitExceeded
from .experiments import (
    angle_trajectory,
    angular_deviation,
    circle_angle_velocities,
    circle_angles,
    circle_trajectory,
    invariant_series,
    radius_error,
)
from .export import write_csv, write_json, write_svg
from .geometry import AngleState
from .models import TAN_KINDS, ModelKind
from .sampling import SamplingError, random_angle_state
from .verify import DEFAULT_SEED, SUITES, run_suite

OUTPUT_DIR_ENV = "CIRCLEBODY_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SINGULAR = 2
EXIT_CHECK_FAILED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="circlebody", description="Integrable particle models on the unit circle.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("simulate", help="integrate one configured run and export it")
    p.add_argument("config", type=Path)
    p.add_argument("--svg", action="store_true", help="also write a static trajectory plot")
    p = sub.add_parser("verify", help="run a randomized verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p = sub.add_parser("compare", help="angle form vs vector form (vs algebraic, many_body only)")
    p.add_argument("config", type=Path)
    p.add_argument("--svg", action="store_true", help="also write a static trajectory plot")
    return parser


# --- shared steps ---------------------------------------------------------------


def output_dir(cfg: RunConfig) -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir)


def initial_state(cfg: RunConfig) -> AngleState:
    init = cfg.initial
    if isinstance(init, AngleState):
        return init
    rng = np.random.default_rng(init.seed)
    tan_margin = init.min_separation if cfg.model.kind in TAN_KINDS else None
    try:
        return random_angle_state(
            rng,
            cfg.n_particles,
            init.angular_spread,
            init.velocity_spread,
            init.min_separation,
            tan_margin=tan_margin,
        )
    except SamplingError as exc:
        raise ConfigError(f"initial.random: {exc}") from exc


def _angle_columns(prefix, n):
    return [f"{prefix}theta_{k + 1}" for k in range(n)]


def _describe(cfg: RunConfig, s0: AngleState) -> dict:
    init = {"theta": s0.theta, "theta_dot": s0.theta_dot}
    if isinstance(cfg.initial, RandomInitial):
        init["random"] = vars(cfg.initial)
    ic = cfg.integrator
    return {
        "model": {"kind": cfg.model.kind.value, **cfg.model_params},
        "n_particles": cfg.n_particles,
        "t_end": cfg.t_end,
        "n_samples": cfg.n_samples,
        "initial": init,
        "integrator": {
            "rel_tol": ic.rel_tol,
            "abs_tol": ic.abs_tol,
            "max_step": ic.max_step,
            "max_steps": ic.max_steps,
            "projection": ic.projection.value,
        },
    }


# --- subcommands -----------------------------------------------------------------


def cmd_simulate(path, svg=False) -> int:
    cfg = load_config(path)
    s0 = initial_state(cfg)
    t = cfg.t_grid
    n = cfg.n_particles
    out = output_dir(cfg)
    summary = {**_describe(cfg, s0), "form": cfg.form}

    if cfg.form == "circle":
        traj = circle_trajectory(cfg.model, s0, t, cfg.integrator)
        theta = circle_angles(traj, s0.theta)
        theta_dot = circle_angle_velocities(traj)
        angles = [AngleState(a, b) for a, b in zip(theta, theta_dot)]
        xy = traj.positions().reshape(t.size, 2 * n)
        summary["max_constraint_residual"] = float(traj.constraint_residual.max())
        summary["max_radius_error"] = radius_error(traj)
    else:
        traj = angle_trajectory(cfg.model, s0, t, cfg.integrator)
        theta, theta_dot = traj.positions(), traj.velocities()
        angles = traj.states
        xy = None
        summary["max_constraint_residual"] = 0.0
    summary["steps"] = vars(traj.stats)

    written = []
    if "trajectory_csv" in cfg.outputs:
        cols = ["t", *_angle_columns("", n), *[f"theta_dot_{k + 1}" for k in range(n)]]
        data = [t[:, None], theta, theta_dot]
        if xy is not None:
            cols += [f"{c}_{k + 1}" for k in range(n) for c in ("x", "y")]
            data.append(xy)
        written.append(write_csv(out / f"{cfg.prefix}_trajectory.csv", cols, np.hstack(data)))

    inv = invariant_series(cfg.model, angles)
    if inv is None:
        summary["max_invariant_drift"] = None
    else:
        names, values, drift = inv
        summary["max_invariant_drift"] = float(drift.max())
        if cfg.model.kind is ModelKind.SUTHERLAND:
            summary["P_drift"] = float(np.abs(values[:, 0] - values[0, 0]).max())
            summary["E_drift"] = float(np.abs(values[:, 1] - values[0, 1]).max())
        if "invariants_csv" in cfg.outputs:
            path_inv = out / f"{cfg.prefix}_invariants.csv"
            written.append(write_csv(path_inv, ["t", *names, "drift"], np.column_stack([t, values, drift])))

    if svg:
        written.append(write_svg(out / f"{cfg.prefix}_trajectory.svg", t, theta, cfg.model.kind.value))
    if "summary_json" in cfg.outputs:
        summary_path = out / f"{cfg.prefix}_summary.json"
        summary["files"] = [p.name for p in written] + [summary_path.name]
        written.append(write_json(summary_path, summary))
    for p in written:
        print(p)
    return EXIT_OK


def cmd_compare(path, svg=False) -> int:
    cfg = load_config(path)
    s0 = initial_state(cfg)
    t = cfg.t_grid
    n = cfg.n_particles
    out = output_dir(cfg)

    methods = {
        "angle": angle_trajectory(cfg.model, s0, t, cfg.integrator).positions(),
        "circle": circle_angles(circle_trajectory(cfg.model, s0, t, cfg.integrator), s0.theta),
    }
    if cfg.model.kind is ModelKind.MANY_BODY:
        methods["algebraic"] = trajectory_algebraic(cfg.model, s0, t).positions()

    names = list(methods)
    pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1 :]]
    cols = ["t"]
    data = [t[:, None]]
    for name in names:
        cols += _angle_columns(f"{name}_", n)
        data.append(methods[name])
    worst = {}
    for a, b in pairs:
        d = np.array([angular_deviation(x, y) for x, y in zip(methods[a], methods[b])])
        cols.append(f"dev_{a}_{b}")
        data.append(d[:, None])
        worst[f"{a}_vs_{b}"] = float(d.max())

    written = [write_csv(out / f"{cfg.prefix}_compare.csv", cols, np.hstack(data))]
    if svg:
        written.append(write_svg(out / f"{cfg.prefix}_compare.svg", t, methods["angle"], cfg.model.kind.value))
    summary = {
        **_describe(cfg, s0),
        "methods": names,
        "max_deviation": worst,
        "worst_deviation": max(worst.values()),
    }
    written.append(write_json(out / f"{cfg.prefix}_compare.json", summary))
    for p in written:
        print(p)
    return EXIT_OK


def cmd_verify(suite, seed=DEFAULT_SEED) -> int:
    checks = run_suite(suite, seed)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"verify {suite}: first failing check: {failed[0].name}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"verify {suite}: all {len(checks)} checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.svg)
        if args.command == "compare":
            return cmd_compare(args.config, args.svg)
        return cmd_verify(args.suite, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularityError, StepLimitExceeded) as exc:
        kind = type(exc).__name__
        if isinstance(exc.__cause__, CircleBodyError):
            kind = f"{kind} ({type(exc.__cause__).__name__})"
        print(f"{kind}: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except CircleBodyError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

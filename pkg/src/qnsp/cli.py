"""Command-line entry points.

    qnsp simulate --config cfg.yaml --out runs/sim
    qnsp profiles --config cfg.yaml --order 2 --out runs/prof
    qnsp ladder   --config cfg.yaml --out runs/ladder
    qnsp check
    qnsp report --record runs/ladder/run_record.json --out runs/rerun
"""

from __future__ import annotations

import argparse
import sys

import numpy as np


def _cmd_simulate(args):
    from . import config as cfgmod
    from .diagnostics import conservation_report, run_diagnostics
    from .fields import ScalarField
    from .hierarchy import build_profiles, compose_initial_data
    from .initial import random_smooth_scalar, random_smooth_vector, taylor_green_velocity
    from .operators import leray_project
    from .persist import write_checkpoint
    from .state import FluidState
    from .stepping import integrate

    cfg = cfgmod.load_config(args.config)
    grid = cfgmod.grid_from_config(cfg)
    params = cfgmod.params_from_config(cfg)
    run = cfgmod.run_options(cfg)
    init = cfgmod.initial_options(cfg)
    prof = cfgmod.profile_options(cfg)

    if init["kind"] == "taylor_green":
        u0 = taylor_green_velocity(grid, init["amplitude"])
        T0 = ScalarField.constant(grid, init["t_mean"])
    elif init["kind"] == "random":
        rng = np.random.default_rng(init["seed"])
        u0 = leray_project(random_smooth_vector(grid, rng, kmax=4, amplitude=init["amplitude"]))
        T0 = random_smooth_scalar(grid, rng, kmax=4, amplitude=0.1 * init["amplitude"], mean=init["t_mean"])
    else:
        print(f"error: unknown initial kind {init['kind']!r}", file=sys.stderr)
        return 2

    profiles = None
    if run["well_prepared"]:
        profiles = build_profiles(
            u0, T0, params.order, run["tau"], params, prof["dt"], prof["cadence"]
        )
        state0 = compose_initial_data(profiles, params.eps)
    else:
        n0 = ScalarField.constant(grid, 1.0)
        state0 = FluidState.build(0.0, n0, u0, T0, params.eps)

    traj = integrate(
        state0, run["tau"], params, run["dt"],
        scheme=run["scheme"], cadence=run["cadence"],
    )
    write_checkpoint(args.out, traj.final, params, run["scheme"])
    rep = conservation_report(traj)
    print(f"final t = {traj.final.t:.6g}, samples = {len(traj)}")
    print(f"mass drift max = {rep.max_drift:.3e}")
    print(f"potential residual max = {float(np.max(rep.pot_residual)):.3e}")
    if profiles is not None:
        series = run_diagnostics(traj, profiles)
        path = f"{args.out}/diagnostics.csv"
        series.write_csv(path)
        print(f"energy norm max = {series.max_triple:.6g}")
        print(f"diagnostics written to {path}")
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_profiles(args):
    from . import config as cfgmod
    from .fields import ScalarField
    from .hierarchy import build_profiles
    from .initial import random_smooth_scalar, random_smooth_vector, taylor_green_velocity
    from .operators import leray_project
    from .persist import save_profiles

    cfg = cfgmod.load_config(args.config)
    grid = cfgmod.grid_from_config(cfg)
    params = cfgmod.params_from_config(cfg, eps=1.0)
    run = cfgmod.run_options(cfg)
    init = cfgmod.initial_options(cfg)
    prof = cfgmod.profile_options(cfg)
    order = args.order if args.order is not None else params.order

    if init["kind"] == "taylor_green":
        u0 = taylor_green_velocity(grid, init["amplitude"])
        T0 = ScalarField.constant(grid, init["t_mean"])
    else:
        rng = np.random.default_rng(init["seed"])
        u0 = leray_project(random_smooth_vector(grid, rng, kmax=4, amplitude=init["amplitude"]))
        T0 = random_smooth_scalar(grid, rng, kmax=4, amplitude=0.1 * init["amplitude"], mean=init["t_mean"])

    pset = build_profiles(u0, T0, order, run["tau"], params, prof["dt"], prof["cadence"])
    path = save_profiles(args.out, pset)
    print(f"profiles through order {order} written to {args.out} ({path})")
    return 0


def _cmd_ladder(args):
    from . import config as cfgmod
    from .ladder import run_ladder

    cfg = cfgmod.load_config(args.config)
    ladder_cfg = cfgmod.ladder_from_config(cfg)
    out = args.out or cfgmod.output_dir(cfg)
    record, _ = run_ladder(ladder_cfg, out_dir=out)
    for row in record.rows:
        print(
            f"eps={row.eps:<10g} status={row.status:<10} "
            f"err_joint_H3={row.err_joint_h3:.6e} wall={row.wall_s:.1f}s"
        )
    joint = record.fits.get("joint")
    if joint:
        print(f"joint slope = {joint.slope:.4f} (R^2 = {joint.r2:.5f})")
    if record.prop31_ratio is not None:
        print(f"energy-norm max/min over ladder = {record.prop31_ratio:.3f}")
    print(f"confirming = {record.confirming}")
    print(f"report written to {out}")
    return 0


def _cmd_check(args):
    from .checks import run_checks

    failures = run_checks(verbose=True)
    return 1 if failures else 0


def _cmd_report(args):
    from .ladder import emit_report, load_record

    record = load_record(args.record)
    paths = emit_report(record, args.out)
    for p in paths:
        print(f"wrote {p}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qnsp",
        description="Plasma quasineutral-limit simulation and verification suite",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one full-system run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("profiles", help="build and persist the expansion profiles")
    p.add_argument("--config", required=True)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_profiles)

    p = sub.add_parser("ladder", help="run a full convergence-ladder experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_ladder)

    p = sub.add_parser("check", help="run the built-in invariant battery")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("report", help="re-emit report files from a stored record")
    p.add_argument("--record", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

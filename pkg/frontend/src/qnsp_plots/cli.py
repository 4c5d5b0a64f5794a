"""Command line:

    plots convergence <run_dir> --out fig.svg
    plots norms <run_dir> --out fig.svg
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

from .frames import LadderFrame
from .render import render_convergence, render_timeseries


def _cmd_convergence(args):
    frame = LadderFrame.load(args.run_dir)
    slope = render_convergence(frame, args.out)
    stored = frame.stored_joint_slope
    line = f"wrote {args.out} (fitted slope {slope:.3f}"
    if stored is not None:
        line += f", stored {stored:.3f}"
    print(line + ")")
    return 0


def _cmd_norms(args):
    paths = sorted(glob.glob(os.path.join(args.run_dir, "diagnostics", "diag_*.csv")))
    if not paths:
        print(f"error: no diagnostics CSVs under {args.run_dir}", file=sys.stderr)
        return 2
    c_tilde = None
    try:
        c_tilde = LadderFrame.load(args.run_dir).c_tilde
    except Exception:
        pass  # norms can render from diagnostics alone
    count = render_timeseries(paths, args.out, c_tilde)
    print(f"wrote {args.out} ({count} runs)")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plots", description="qnsp figure rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convergence", help="log-log convergence figure")
    p.add_argument("run_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_convergence)

    p = sub.add_parser("norms", help="energy-norm time-series figure")
    p.add_argument("run_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_norms)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

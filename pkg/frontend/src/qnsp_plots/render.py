"""Static figure rendering from ladder artifacts."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .frames import DiagnosticsFrame, LadderFrame


def display_refit(points):
    """Least squares in log-log for the annotation; display only."""
    if len(points) < 2:
        return None
    x = np.log([e for e, _ in points])
    y = np.log([v for _, v in points])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def render_convergence(frame: LadderFrame, outpath):
    """Log-log error-vs-parameter figure with reference and fitted slopes.

    Failed rows are excluded and listed in the legend.  Returns the
    annotated (re-fitted) slope.
    """
    points = frame.completed_points()
    if len(points) < 2:
        raise ValueError("need at least 2 completed rows to render convergence")
    slope = display_refit(points)
    order = frame.order

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    eps = np.array([e for e, _ in points])
    err = np.array([v for _, v in points])
    ax.loglog(eps, err, "o-", color="k", label="sup-in-time joint H3 error")

    eps_axis, fields = frame.per_field_curves()
    for key, style in (("err_n_H3", "s--"), ("err_u_H3", "^--"), ("err_T_H3", "v--")):
        vals = fields[key]
        if eps_axis and all(v > 0 for v in vals):
            ax.loglog(eps_axis, vals, style, alpha=0.45, label=key)

    anchor = err[0] / eps[0] ** order
    grid = np.array([eps.min() * 0.8, eps.max() * 1.25])
    for p, ls in ((order - 1, ":"), (order, "-"), (order + 1, ":")):
        if p <= 0:
            continue
        ax.loglog(grid, anchor * grid**p, ls, color="gray", lw=1,
                  label=f"reference slope {p}")

    ax.annotate(
        f"fitted slope {slope:.3f}",
        xy=(0.05, 0.92), xycoords="axes fraction", fontsize=11,
    )
    skipped = frame.skipped_rows()
    if skipped:
        note = ", ".join(f"eps={e:g} ({status})" for e, status in skipped)
        ax.plot([], [], " ", label=f"excluded: {note}")
    ax.set_xlabel("expansion parameter")
    ax.set_ylabel("sup-in-time H3 error")
    ax.set_title("convergence toward the composed profiles")
    ax.legend(fontsize=8, loc="lower right")
    fig.text(0.995, 0.005, frame.domain_note, fontsize=6, ha="right", color="gray")
    fig.tight_layout()
    fig.savefig(outpath)
    plt.close(fig)
    return slope


def render_timeseries(diag_paths, outpath, c_tilde=None):
    """Overlaid energy-norm histories, one curve per run, shared axes."""
    frames = [DiagnosticsFrame.load(p) for p in diag_paths]
    if not frames:
        raise ValueError("need at least one diagnostics CSV")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for fr in sorted(frames, key=lambda f: f.label):
        ax.plot(fr.times, fr.triple, label=fr.label)
    if c_tilde is not None:
        ax.axhline(c_tilde, color="r", ls="--", lw=1, label="threshold")
    ax.set_xlabel("t")
    ax.set_ylabel("energy norm of remainders")
    ax.set_title("remainder energy norm over time")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(outpath)
    plt.close(fig)
    return len(frames)

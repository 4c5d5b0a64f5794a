import csv
import json

import pytest


def write_fixture(
    run_dir,
    eps_errs,
    order=1,
    stored_slope=None,
    statuses=None,
    c_tilde=None,
    with_diagnostics=0,
):
    """Build a consistent CSV+JSON ladder directory from (eps, err) pairs.

    Every column of a row is given the same error value; that keeps the
    fixture law visible in all curves.
    """
    run_dir.mkdir(parents=True, exist_ok=True)
    statuses = statuses or ["completed"] * len(eps_errs)
    rows = []
    for (e, v), status in zip(eps_errs, statuses):
        rows.append(
            {
                "eps": e,
                "status": status,
                "err_n_h3": v,
                "err_u_h3": v,
                "err_t_h3": v,
                "err_joint_h3": v,
                "triple_norm_max": v,
                "triple_norm_t0": v,
                "dt_used": 1e-3,
                "wall_s": 1.0,
            }
        )
    record = {
        "schema_version": 1,
        "domain_note": "periodic torus surrogate",
        "config": {"order": order},
        "rows": rows,
        "fits": {
            "joint": (
                None
                if stored_slope is None
                else {"slope": stored_slope, "intercept": 0.0, "r2": 1.0, "n_points": len(rows)}
            )
        },
        "c_tilde": c_tilde,
        "prop31_ratio": None,
        "floor_estimate": None,
        "confirming": True,
    }
    with open(run_dir / "run_record.json", "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
    with open(run_dir / "ladder_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["epsilon", "err_n_H3", "err_u_H3", "err_T_H3", "triple_norm_max", "status", "wall_s"]
        )
        for row in rows:
            w.writerow(
                [
                    repr(float(row["eps"])),
                    repr(float(row["err_n_h3"])),
                    repr(float(row["err_u_h3"])),
                    repr(float(row["err_t_h3"])),
                    repr(float(row["triple_norm_max"])),
                    row["status"],
                    repr(float(row["wall_s"])),
                ]
            )
    if with_diagnostics:
        ddir = run_dir / "diagnostics"
        ddir.mkdir(exist_ok=True)
        for i in range(with_diagnostics):
            with open(ddir / f"diag_eps_{i}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(
                    [
                        "t",
                        "triple_norm",
                        "err_n_H3",
                        "err_u_H3",
                        "err_T_H3",
                        "mass_drift",
                        "pot_residual",
                        "cont_residual",
                    ]
                )
                for j in range(6):
                    w.writerow([repr(0.01 * j), repr(1.0 + 0.1 * i)] + [repr(0.0)] * 6)
    return run_dir


@pytest.fixture
def quadratic_fixture(tmp_path):
    eps = [4e-2, 2e-2, 1e-2, 5e-3]
    return write_fixture(
        tmp_path / "quad",
        [(e, e**2) for e in eps],
        order=2,
        stored_slope=2.0,
        with_diagnostics=2,
    )

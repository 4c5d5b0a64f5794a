"""Parsed views of ladder run directories.

This package never recomputes physics: every number it displays traces to a
CSV or JSON field written by the harness.  The only arithmetic here is the
display re-fit of the log-log slope.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

SCHEMA_VERSION = 1

SUMMARY_COLUMNS = (
    "epsilon",
    "err_n_H3",
    "err_u_H3",
    "err_T_H3",
    "triple_norm_max",
    "status",
    "wall_s",
)

DIAGNOSTICS_COLUMNS = (
    "t",
    "triple_norm",
    "err_n_H3",
    "err_u_H3",
    "err_T_H3",
    "mass_drift",
    "pot_residual",
    "cont_residual",
)

# CSV column -> run_record.json row key
_SHARED = {
    "epsilon": "eps",
    "err_n_H3": "err_n_h3",
    "err_u_H3": "err_u_h3",
    "err_T_H3": "err_t_h3",
    "triple_norm_max": "triple_norm_max",
}


class SchemaError(ValueError):
    """A persisted artifact does not match the documented schema."""


def _float(s):
    try:
        return float(s)
    except ValueError:
        return math.nan


@dataclass
class LadderFrame:
    """Joined view of ladder_summary.csv and run_record.json."""

    csv_rows: list
    record: dict

    @classmethod
    def load(cls, run_dir):
        csv_path = os.path.join(run_dir, "ladder_summary.csv")
        json_path = os.path.join(run_dir, "run_record.json")
        try:
            with open(csv_path, newline="") as fh:
                reader = csv.reader(fh)
                header = tuple(next(reader))
                if header != SUMMARY_COLUMNS:
                    raise SchemaError(
                        f"{csv_path}: header {header} != {SUMMARY_COLUMNS}"
                    )
                rows = [dict(zip(header, row)) for row in reader]
        except FileNotFoundError:
            raise SchemaError(f"missing {csv_path}") from None
        try:
            with open(json_path) as fh:
                record = json.load(fh)
        except FileNotFoundError:
            raise SchemaError(f"missing {json_path}") from None
        if record.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(
                f"{json_path}: unsupported schema {record.get('schema_version')}"
            )
        frame = cls(rows, record)
        frame.validate()
        return frame

    def validate(self):
        """CSV and JSON must agree on shared fields to 1e-12 relative."""
        json_rows = self.record.get("rows", [])
        if len(json_rows) != len(self.csv_rows):
            raise SchemaError(
                f"row count mismatch: CSV {len(self.csv_rows)} vs JSON {len(json_rows)}"
            )
        for i, (crow, jrow) in enumerate(zip(self.csv_rows, json_rows)):
            if crow["status"] != jrow["status"]:
                raise SchemaError(f"row {i}: status mismatch")
            for ckey, jkey in _SHARED.items():
                a, b = _float(crow[ckey]), float(jrow[jkey])
                if math.isnan(a) and math.isnan(b):
                    continue
                scale = max(abs(a), abs(b), 1e-300)
                if abs(a - b) > 1e-12 * scale:
                    raise SchemaError(
                        f"row {i}: {ckey} disagrees (CSV {a!r}, JSON {b!r})"
                    )

    @property
    def order(self):
        return int(self.record.get("config", {}).get("order", 1))

    @property
    def stored_joint_slope(self):
        fit = (self.record.get("fits") or {}).get("joint")
        return None if fit is None else float(fit["slope"])

    @property
    def c_tilde(self):
        return self.record.get("c_tilde")

    @property
    def domain_note(self):
        return self.record.get("domain_note", "")

    def completed_points(self):
        """(eps, joint error) for completed rows, from the JSON record."""
        pts = []
        for row in self.record.get("rows", []):
            if row["status"] != "completed":
                continue
            e, v = float(row["eps"]), float(row["err_joint_h3"])
            if v > 0 and math.isfinite(v):
                pts.append((e, v))
        return pts

    def skipped_rows(self):
        return [
            (float(r["eps"]), r["status"])
            for r in self.record.get("rows", [])
            if r["status"] != "completed"
        ]

    def per_field_curves(self):
        """eps -> (err_n, err_u, err_T) series from the CSV, completed rows."""
        out = {"err_n_H3": [], "err_u_H3": [], "err_T_H3": []}
        eps = []
        for row in self.csv_rows:
            if row["status"] != "completed":
                continue
            eps.append(_float(row["epsilon"]))
            for key in out:
                out[key].append(_float(row[key]))
        return eps, out


@dataclass
class DiagnosticsFrame:
    """One per-run diagnostics CSV."""

    label: str
    times: list
    triple: list

    @classmethod
    def load(cls, path):
        try:
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = tuple(next(reader))
                if header != DIAGNOSTICS_COLUMNS:
                    missing = set(DIAGNOSTICS_COLUMNS) - set(header)
                    name = sorted(missing)[0] if missing else header[0]
                    raise SchemaError(f"{path}: bad diagnostics header near column {name!r}")
                times, triple = [], []
                for row in reader:
                    times.append(_float(row[0]))
                    triple.append(_float(row[1]))
        except FileNotFoundError:
            raise SchemaError(f"missing {path}") from None
        label = os.path.basename(path).replace("diag_", "").replace(".csv", "")
        return cls(label, times, triple)

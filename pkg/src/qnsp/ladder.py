"""Parameter-ladder experiments: sup-in-time errors against composed
profiles, rate fitting, and machine-readable run records."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .diagnostics import run_diagnostics
from .errors import (
    BlowUpError,
    ConfigurationError,
    FitError,
    IntegrationTimeout,
    NumericsError,
)
from .fields import ScalarField
from .grid import make_grid
from .hierarchy import build_profiles, compose_initial_data, integrate_limit
from .initial import random_smooth_scalar, random_smooth_vector, taylor_green_velocity
from .norms import sobolev_norm, sobolev_norm_sq
from .operators import leray_project
from .params import PhysParams
from .stepping import integrate, stability_report

DOMAIN_NOTE = (
    "periodic torus surrogate: all runs use a periodic box in place of the "
    "whole space; reported norms are torus norms"
)

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


# ---------------------------------------------------------------------------
# configuration and record types
# ---------------------------------------------------------------------------

@dataclass
class LadderConfig:
    """Everything needed to reproduce one ladder experiment."""

    grid_dim: int = 2
    grid_n: int = 64
    box_length: float = 2.0 * math.pi
    hbar: float = 0.05
    mu: float = 0.1
    lam: float = 0.0
    kappa: float = 0.1
    order: int = 1
    eps_values: tuple = (4e-2, 2e-2, 1e-2, 5e-3)
    tau: float = 0.25
    dt: float = 1e-3
    scheme: str = "rk4_explicit"
    cadence: float = 5e-3
    profile_dt: float | None = None
    profile_cadence: float | None = None
    initial_kind: str = "taylor_green"
    initial_amplitude: float = 1.0
    t_mean: float = 1.0
    seed: int = 0
    workers: int | None = None
    planted_remainder: float = 0.0
    planted_seed: int = 1
    null_experiment: bool = False
    c_tilde: float | None = None
    floor_estimate: float | None = None
    max_wall_s: float | None = None

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_values)
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigurationError("eps_values must be strictly decreasing")
        if not eps:
            raise ConfigurationError("eps_values must be non-empty")
        self.eps_values = eps
        if self.tau <= 0:
            raise ConfigurationError("tau must be positive")

    def params(self, eps) -> PhysParams:
        return PhysParams(
            eps=eps, hbar=self.hbar, mu=self.mu, lam=self.lam,
            kappa=self.kappa, order=self.order,
        )

    def worker_count(self):
        env = os.environ.get("DEBYE_LADDER_WORKERS")
        if env:
            return max(1, int(env))
        if self.workers:
            return max(1, int(self.workers))
        return 1


@dataclass
class LadderRow:
    eps: float
    status: str
    err_n_h3: float = math.nan
    err_u_h3: float = math.nan
    err_t_h3: float = math.nan
    err_joint_h3: float = math.nan
    triple_norm_max: float = math.nan
    triple_norm_t0: float = math.nan
    dt_used: float = math.nan
    wall_s: float = 0.0


@dataclass
class RateFit:
    slope: float
    intercept: float
    r2: float
    n_points: int


@dataclass
class RunRecord:
    config: dict
    rows: list
    fits: dict
    c_tilde: float | None
    prop31_ratio: float | None
    floor_estimate: float | None
    confirming: bool
    schema_version: int = SCHEMA_VERSION
    domain_note: str = DOMAIN_NOTE

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "domain_note": self.domain_note,
            "config": self.config,
            "rows": [asdict(r) for r in self.rows],
            "fits": {
                key: (asdict(f) if f is not None else None)
                for key, f in self.fits.items()
            },
            "c_tilde": self.c_tilde,
            "prop31_ratio": self.prop31_ratio,
            "floor_estimate": self.floor_estimate,
            "confirming": self.confirming,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            from .errors import SchemaError

            raise SchemaError(f"unsupported record schema {d.get('schema_version')}")
        rows = [LadderRow(**r) for r in d["rows"]]
        fits = {
            key: (RateFit(**f) if f is not None else None)
            for key, f in d["fits"].items()
        }
        return cls(
            config=d["config"],
            rows=rows,
            fits=fits,
            c_tilde=d["c_tilde"],
            prop31_ratio=d["prop31_ratio"],
            floor_estimate=d["floor_estimate"],
            confirming=d["confirming"],
            schema_version=d["schema_version"],
            domain_note=d["domain_note"],
        )


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------

def fit_rate(pairs) -> RateFit:
    """Least squares on (log eps, log err); the slope is the empirical order.

    Raises FitError for fewer than 3 pairs or non-positive errors (the
    latter signals floor saturation; shrink dt or raise resolution).
    """
    pairs = [(float(e), float(v)) for e, v in pairs]
    if len(pairs) < 3:
        raise FitError(f"rate fit needs at least 3 points, got {len(pairs)}")
    if any(v <= 0 for _, v in pairs):
        raise FitError("non-positive error values; the measurement hit its floor")
    x = np.log([e for e, _ in pairs])
    y = np.log([v for _, v in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sstot = float(np.sum((y - y.mean()) ** 2))
    r2 = 0.0 if sstot == 0 else 1.0 - float(np.sum(resid**2)) / sstot
    return RateFit(float(slope), float(intercept), float(r2), len(pairs))


# ---------------------------------------------------------------------------
# ladder driver
# ---------------------------------------------------------------------------

def _initial_fields(cfg: LadderConfig, grid):
    if cfg.initial_kind == "taylor_green":
        u0 = taylor_green_velocity(grid, cfg.initial_amplitude)
        T0 = ScalarField.constant(grid, cfg.t_mean)
    elif cfg.initial_kind == "random":
        rng = np.random.default_rng(cfg.seed)
        u0 = leray_project(
            random_smooth_vector(grid, rng, kmax=4, amplitude=cfg.initial_amplitude)
        )
        T0 = random_smooth_scalar(
            grid, rng, kmax=4, amplitude=0.1 * cfg.initial_amplitude, mean=cfg.t_mean
        )
    else:
        raise ConfigurationError(f"unknown initial kind {cfg.initial_kind!r}")
    return u0, T0


def _planted_remainder(cfg, grid):
    """O(1) remainder data in velocity and temperature only: the Poisson
    coupling slaves the density remainder (an O(1) density part would leave
    the admissible data class and inflate the weighted potential like
    eps^-1/2)."""
    if cfg.planted_remainder == 0.0:
        return None
    from .diagnostics import RemainderSet

    rng = np.random.default_rng(cfg.planted_seed)
    amp = cfg.planted_remainder
    u_r = random_smooth_vector(grid, rng, kmax=4, amplitude=amp)
    t_r = random_smooth_scalar(grid, rng, kmax=4, amplitude=amp)
    z = ScalarField.zeros(grid)
    return RemainderSet(0.0, z, u_r, t_r, z, z, cfg.eps_values[0], cfg.order)


def _aligned_dt(dt_user, dt_stability, cadence):
    """Cap dt by the stability report, then snap so cadence is a multiple."""
    dt = min(dt_user, dt_stability)
    return cadence / math.ceil(cadence / dt - 1e-12)


def _full_run(cfg, grid, profiles, eps, remainder0):
    params = cfg.params(eps)
    t_start = time.perf_counter()
    data = compose_initial_data(profiles, eps, remainder0)
    report = stability_report(data, params, cfg.scheme)
    dt = _aligned_dt(cfg.dt, report["dt_max"], cfg.cadence)
    row = LadderRow(eps=eps, status="completed", dt_used=dt)
    diag = None
    try:
        traj = integrate(
            data, cfg.tau, params, dt,
            scheme=cfg.scheme, cadence=cfg.cadence, max_wall_s=cfg.max_wall_s,
        )
        diag = run_diagnostics(traj, profiles, cfg.c_tilde)
        row.err_n_h3 = float(np.max(diag.err_n_h3))
        row.err_u_h3 = float(np.max(diag.err_u_h3))
        row.err_t_h3 = float(np.max(diag.err_t_h3))
        row.err_joint_h3 = float(np.max(diag.err_joint_h3))
        row.triple_norm_max = diag.max_triple
        row.triple_norm_t0 = float(diag.triple[0])
    except BlowUpError:
        row.status = "blow_up"
    except NumericsError:
        row.status = "nan"
    except IntegrationTimeout:
        row.status = "timeout"
    row.wall_s = time.perf_counter() - t_start
    return row, diag


def _null_run(cfg, grid, profiles, eps):
    """Sanity ladder: the limit system re-integrated at the run cadence and
    compared against the shared profiles.  Errors sit at the discretization
    floor and must not be mistaken for a rate."""
    params = cfg.params(eps)
    t_start = time.perf_counter()
    base = profiles.track(0)
    u0 = base.vector_at("u", 0.0)
    T0 = base.scalar_at("T", 0.0)
    dt = _aligned_dt(cfg.dt * 1.4, cfg.dt * 1.4, cfg.cadence)  # off-grid dt
    track = integrate_limit(u0, T0, cfg.tau, params, dt, cfg.cadence)
    errs_u, errs_t = [], []
    for t in track.times:
        du = track.vector_at("u", float(t)) - base.vector_at("u", float(t))
        dT = track.scalar_at("T", float(t)) - base.scalar_at("T", float(t))
        errs_u.append(math.sqrt(sum(sobolev_norm_sq(c, 3.0) for c in du)))
        errs_t.append(sobolev_norm(dT, 3.0))
    row = LadderRow(eps=eps, status="completed", dt_used=dt)
    row.err_n_h3 = 0.0
    row.err_u_h3 = float(np.max(errs_u))
    row.err_t_h3 = float(np.max(errs_t))
    row.err_joint_h3 = float(
        np.max(np.sqrt(np.array(errs_u) ** 2 + np.array(errs_t) ** 2))
    )
    row.triple_norm_max = math.nan
    row.wall_s = time.perf_counter() - t_start
    return row, None


def run_ladder(cfg: LadderConfig, out_dir=None):
    """Run the ladder; returns (RunRecord, {eps: DiagnosticsSeries}).

    Profiles are computed once and shared read-only across runs; per-eps
    failures are recorded in the row status and never abort the ladder.
    """
    grid = make_grid(cfg.grid_dim, cfg.grid_n, cfg.box_length)
    u0, T0 = _initial_fields(cfg, grid)
    params0 = cfg.params(cfg.eps_values[0])
    profile_dt = cfg.profile_dt or cfg.dt
    profile_cadence = cfg.profile_cadence or cfg.cadence
    profiles = build_profiles(
        u0, T0, cfg.order, cfg.tau, params0, profile_dt, profile_cadence
    )
    remainder0 = _planted_remainder(cfg, grid)

    def job(eps):
        if cfg.null_experiment:
            return _null_run(cfg, grid, profiles, eps)
        return _full_run(cfg, grid, profiles, eps, remainder0)

    workers = cfg.worker_count()
    results = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {eps: pool.submit(job, eps) for eps in cfg.eps_values}
            for eps, fut in futures.items():
                results[eps] = fut.result()
    else:
        for eps in cfg.eps_values:
            results[eps] = job(eps)

    rows = [results[eps][0] for eps in cfg.eps_values]
    diags = {eps: results[eps][1] for eps in cfg.eps_values if results[eps][1]}

    completed = [r for r in rows if r.status == "completed"]
    fits = {}
    for key, attr in (
        ("n", "err_n_h3"),
        ("u", "err_u_h3"),
        ("T", "err_t_h3"),
        ("joint", "err_joint_h3"),
    ):
        pairs = [
            (r.eps, getattr(r, attr))
            for r in completed
            if getattr(r, attr) > 0 and math.isfinite(getattr(r, attr))
        ]
        if len(pairs) >= 3:
            try:
                fits[key] = fit_rate(pairs)
            except FitError:
                fits[key] = None
        else:
            fits[key] = None

    c_tilde = cfg.c_tilde
    if c_tilde is None and completed and not cfg.null_experiment:
        base = completed[0].triple_norm_t0
        if math.isfinite(base) and base > 0:
            c_tilde = 10.0 * base

    triples = [
        r.triple_norm_max
        for r in completed
        if math.isfinite(r.triple_norm_max) and r.triple_norm_max > 0
    ]
    prop31 = (max(triples) / min(triples)) if len(triples) >= 2 else None

    floor = cfg.floor_estimate
    if cfg.null_experiment and completed:
        floor = max(r.err_joint_h3 for r in completed)

    joint = fits.get("joint")
    confirming = bool(
        joint is not None
        and joint.r2 >= 0.98
        and (floor is None or min(r.err_joint_h3 for r in completed) > 10.0 * floor)
    )

    record = RunRecord(
        config=_config_dict(cfg),
        rows=rows,
        fits=fits,
        c_tilde=c_tilde,
        prop31_ratio=prop31,
        floor_estimate=floor,
        confirming=confirming,
    )
    if out_dir is not None:
        emit_report(record, out_dir, diags)
    return record, diags


def _config_dict(cfg: LadderConfig):
    d = asdict(cfg)
    d["eps_values"] = list(cfg.eps_values)
    return d


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit_report(record: RunRecord, out_dir, diags=None):
    """Write ladder_summary.csv, run_record.json and per-run diagnostics CSVs.

    The CSV column set is fixed; the JSON carries the full structured record
    (schema versioned) including the domain-surrogate note.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    summary = os.path.join(out_dir, "ladder_summary.csv")
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in record.rows:
            w.writerow(
                [
                    _fmt(r.eps),
                    _fmt(r.err_n_h3),
                    _fmt(r.err_u_h3),
                    _fmt(r.err_t_h3),
                    _fmt(r.triple_norm_max),
                    r.status,
                    _fmt(r.wall_s),
                ]
            )
    paths.append(summary)

    record_path = os.path.join(out_dir, "run_record.json")
    with open(record_path, "w") as fh:
        json.dump(record.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(record_path)

    if diags:
        ddir = os.path.join(out_dir, "diagnostics")
        os.makedirs(ddir, exist_ok=True)
        for eps, series in diags.items():
            p = os.path.join(ddir, f"diag_eps_{eps:g}.csv")
            series.write_csv(p)
            paths.append(p)
    return paths


def load_record(path) -> RunRecord:
    with open(path) as fh:
        return RunRecord.from_dict(json.load(fh))

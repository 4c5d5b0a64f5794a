"""YAML run configuration.

One structured plain-text file drives every CLI entry point.  Full key set
(everything optional unless marked; defaults in parentheses):

    grid:
      dim: 2            # 1, 2 or 3
      points: 64        # even, >= 8
      length: 6.2832    # box length (2*pi)
    physics:
      hbar: 0.05        # Planck constant (0.05)
      mu: 0.1           # shear viscosity (0.1)
      lam: 0.0          # second viscosity (0.0)
      kappa: 0.1        # heat conductivity (0.1)
    run:
      eps: 0.05         # squared scaled Debye length [required by `simulate`]
      order: 1          # expansion order N (1)
      tau: 0.25         # horizon (0.25)
      dt: 1.0e-3        # step-size cap; the stability report may shrink it
      scheme: rk4_explicit   # or imex_cn
      cadence: 5.0e-3   # output sampling interval
      well_prepared: true    # compose data from profiles (true)
    initial:
      kind: taylor_green     # or random
      amplitude: 1.0
      t_mean: 1.0
      seed: 0
    profiles:
      dt: 1.0e-3        # hierarchy step size (run.dt)
      cadence: 5.0e-3   # hierarchy sample cadence (run.cadence)
    ladder:
      eps_values: [4.0e-2, 2.0e-2, 1.0e-2, 5.0e-3]  # strictly decreasing
      workers: 1        # overridden by DEBYE_LADDER_WORKERS
      planted_remainder: 0.0  # amplitude of O(1) remainder data (0 = well-prepared)
      planted_seed: 1
      null_experiment: false  # re-integrate the limit flow to estimate the floor
      c_tilde: null     # energy-norm threshold (default 10x coarsest t=0 value)
      floor_estimate: null    # forwarded to the fit gate
      max_wall_s: null  # per-run wall-clock budget
    output:
      dir: runs/out

The only environment variable honored is DEBYE_LADDER_WORKERS.
"""

from __future__ import annotations

import math

import yaml

from .errors import ConfigurationError
from .grid import make_grid
from .ladder import LadderConfig
from .params import PhysParams


def load_config(path):
    with open(path) as fh:
        cfg = yaml.safe_load(fh) or {}
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return cfg


def _section(cfg, name):
    sec = cfg.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigurationError(f"config section {name!r} must be a mapping")
    return sec


def grid_from_config(cfg):
    g = _section(cfg, "grid")
    return make_grid(
        int(g.get("dim", 2)),
        int(g.get("points", 64)),
        float(g.get("length", 2.0 * math.pi)),
    )


def params_from_config(cfg, eps=None):
    p = _section(cfg, "physics")
    r = _section(cfg, "run")
    if eps is None:
        eps = r.get("eps")
    if eps is None:
        raise ConfigurationError("run.eps is required")
    return PhysParams(
        eps=float(eps),
        hbar=float(p.get("hbar", 0.05)),
        mu=float(p.get("mu", 0.1)),
        lam=float(p.get("lam", 0.0)),
        kappa=float(p.get("kappa", 0.1)),
        order=int(r.get("order", 1)),
    )


def run_options(cfg):
    r = _section(cfg, "run")
    return {
        "tau": float(r.get("tau", 0.25)),
        "dt": float(r.get("dt", 1e-3)),
        "scheme": str(r.get("scheme", "rk4_explicit")),
        "cadence": float(r.get("cadence", 5e-3)),
        "well_prepared": bool(r.get("well_prepared", True)),
    }


def initial_options(cfg):
    i = _section(cfg, "initial")
    return {
        "kind": str(i.get("kind", "taylor_green")),
        "amplitude": float(i.get("amplitude", 1.0)),
        "t_mean": float(i.get("t_mean", 1.0)),
        "seed": int(i.get("seed", 0)),
    }


def profile_options(cfg):
    base = run_options(cfg)
    p = _section(cfg, "profiles")
    return {
        "dt": float(p.get("dt", base["dt"])),
        "cadence": float(p.get("cadence", base["cadence"])),
    }


def ladder_from_config(cfg, out_dir=None):
    grid = _section(cfg, "grid")
    phys = _section(cfg, "physics")
    run = _section(cfg, "run")
    init = _section(cfg, "initial")
    lad = _section(cfg, "ladder")
    prof = profile_options(cfg)

    def opt_float(v):
        return None if v is None else float(v)

    return LadderConfig(
        grid_dim=int(grid.get("dim", 2)),
        grid_n=int(grid.get("points", 64)),
        box_length=float(grid.get("length", 2.0 * math.pi)),
        hbar=float(phys.get("hbar", 0.05)),
        mu=float(phys.get("mu", 0.1)),
        lam=float(phys.get("lam", 0.0)),
        kappa=float(phys.get("kappa", 0.1)),
        order=int(run.get("order", 1)),
        eps_values=tuple(float(e) for e in lad.get("eps_values", (4e-2, 2e-2, 1e-2, 5e-3))),
        tau=float(run.get("tau", 0.25)),
        dt=float(run.get("dt", 1e-3)),
        scheme=str(run.get("scheme", "rk4_explicit")),
        cadence=float(run.get("cadence", 5e-3)),
        profile_dt=prof["dt"],
        profile_cadence=prof["cadence"],
        initial_kind=str(init.get("kind", "taylor_green")),
        initial_amplitude=float(init.get("amplitude", 1.0)),
        t_mean=float(init.get("t_mean", 1.0)),
        seed=int(init.get("seed", 0)),
        workers=lad.get("workers"),
        planted_remainder=float(lad.get("planted_remainder", 0.0)),
        planted_seed=int(lad.get("planted_seed", 1)),
        null_experiment=bool(lad.get("null_experiment", False)),
        c_tilde=opt_float(lad.get("c_tilde")),
        floor_estimate=opt_float(lad.get("floor_estimate")),
        max_wall_s=opt_float(lad.get("max_wall_s")),
    )


def output_dir(cfg, fallback="runs/out"):
    return str(_section(cfg, "output").get("dir", fallback))

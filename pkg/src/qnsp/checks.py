"""Built-in invariant battery behind `qnsp check`.

Quick property checks runnable without pytest; each prints one PASS/FAIL
line.  The full acceptance suite lives in the test tree.
"""

from __future__ import annotations

import numpy as np

from .fields import ScalarField, VectorField
from .grid import make_grid
from .initial import random_smooth_scalar, random_smooth_vector, taylor_green_velocity
from .norms import l2_norm
from .operators import div, grad, hessian, laplacian, leray_project
from .params import PhysParams
from .rhs import bohm_force
from .state import FluidState
from .stepping import step


def _check_transform_round_trip():
    g = make_grid(2, 32)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(g.shape)
    f = ScalarField.from_values(g, vals)
    return np.max(np.abs(f.values - vals)) <= 1e-13


def _check_second_derivative_identity():
    g = make_grid(2, 32)
    rng = np.random.default_rng(1)
    for _ in range(20):
        f = random_smooth_scalar(g, rng, kmax=8)
        h = hessian(f)
        hnorm = np.sqrt(sum(l2_norm(h[i][j]) ** 2 for i in range(2) for j in range(2)))
        lap = l2_norm(laplacian(f))
        if abs(hnorm - lap) > 1e-10 * lap:
            return False
    return True


def _check_leray():
    g = make_grid(2, 32)
    rng = np.random.default_rng(2)
    psi = random_smooth_scalar(g, rng, kmax=6)
    killed = leray_project(grad(psi))
    if max(l2_norm(c) for c in killed) > 1e-12:
        return False
    v = random_smooth_vector(g, rng, kmax=6)
    p = leray_project(v)
    return l2_norm(div(p)) <= 1e-12 * max(l2_norm(p[0]), 1e-300)


def _check_bohm_dual_form():
    # 64-point axes: the dealias cutoff must sit well above the band of the
    # log-density harmonics for the two routes to agree at 1e-8
    g = make_grid(2, 64)
    rng = np.random.default_rng(3)
    n = random_smooth_scalar(g, rng, kmax=4, amplitude=0.1, mean=1.0)
    a = bohm_force(n, 0.1, "log_hessian")
    b = bohm_force(n, 0.1, "expanded")
    num = np.sqrt(sum(l2_norm(p - q) ** 2 for p, q in zip(a, b)))
    den = np.sqrt(sum(l2_norm(p) ** 2 for p in a))
    return num <= 1e-8 * den


def _check_equilibrium_fixed_point():
    g = make_grid(2, 32)
    params = PhysParams(eps=0.1, hbar=0.05, mu=0.1, lam=0.0, kappa=0.1)
    state = FluidState.build(
        0.0,
        ScalarField.constant(g, 1.0),
        VectorField.zeros(g),
        ScalarField.constant(g, 1.2),
        params.eps,
    )
    for scheme in ("rk4_explicit", "imex_cn"):
        out = step(state, 0.01, params, scheme)
        drift = l2_norm(out.n - state.n) + l2_norm(out.T - state.T)
        if drift > 1e-13:
            return False
    return True


def _check_limit_taylor_green():
    from .hierarchy import integrate_limit

    g = make_grid(2, 32)
    params = PhysParams(eps=1.0, hbar=0.0, mu=0.1, lam=0.0, kappa=0.1)
    u0 = taylor_green_velocity(g)
    T0 = ScalarField.constant(g, 1.0)
    track = integrate_limit(u0, T0, 0.2, params, dt=2e-3)
    decay = np.exp(-2 * params.mu * 0.2)
    u = track.vector_at("u", 0.2)
    err = np.sqrt(sum(l2_norm(a - decay * b) ** 2 for a, b in zip(u, u0)))
    return err <= 1e-6 * decay


def _check_rate_fit():
    from .ladder import fit_rate

    fit = fit_rate([(e, 3.0 * e**2) for e in (4e-2, 2e-2, 1e-2, 5e-3)])
    return abs(fit.slope - 2.0) <= 1e-12 and fit.r2 >= 1.0 - 1e-12


CHECKS = (
    ("transform round trip", _check_transform_round_trip),
    ("second-derivative norm identity", _check_second_derivative_identity),
    ("Leray projection properties", _check_leray),
    ("quantum-force dual forms", _check_bohm_dual_form),
    ("equilibrium fixed point", _check_equilibrium_fixed_point),
    ("limit-flow Taylor-Green decay", _check_limit_taylor_green),
    ("rate fit on synthetic law", _check_rate_fit),
)


def run_checks(verbose=True):
    failures = []
    for name, fn in CHECKS:
        try:
            ok = fn()
        except Exception as err:  # a crashed check is a failed check
            ok = False
            if verbose:
                print(f"FAIL {name}: {err!r}")
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            failures.append(name)
    return failures

import numpy as np
import pytest
import scipy.linalg

from qnsp.errors import BlowUpError, ConfigurationError
from qnsp.fields import ScalarField, VectorField
from qnsp.grid import make_grid
from qnsp.initial import taylor_green_velocity
from qnsp.norms import h3_group_norm, l2_norm
from qnsp.params import PhysParams
from qnsp.state import FluidState
from qnsp.stepping import (
    ImexCN,
    integrate,
    linear_block,
    rk4_step,
    stability_report,
    step,
)

from conftest import rel_l2, smooth_scalar


def equilibrium(grid, eps, t_mean=1.0):
    return FluidState.build(
        0.0,
        ScalarField.constant(grid, 1.0),
        VectorField.zeros(grid),
        ScalarField.constant(grid, t_mean),
        eps,
    )


def smooth_state(grid, rng, eps, amp=0.05):
    n = smooth_scalar(grid, rng, kmax=3, amplitude=amp, mean=1.0)
    u = VectorField(
        tuple(smooth_scalar(grid, rng, kmax=3, amplitude=3 * amp) for _ in range(grid.dim))
    )
    T = smooth_scalar(grid, rng, kmax=3, amplitude=amp, mean=1.0)
    return FluidState.build(0.0, n, u, T, eps)


def state_distance(a, b):
    return h3_group_norm(a.n - b.n, a.u - b.u, a.T - b.T)


PARAMS = PhysParams(eps=0.5, hbar=0.05, mu=0.1, lam=0.0, kappa=0.1)


@pytest.mark.parametrize("scheme", ["rk4_explicit", "imex_cn"])
def test_equilibrium_is_fixed_point(scheme, grid2d):
    state = equilibrium(grid2d, PARAMS.eps, 1.3)
    out = step(state, 0.05, PARAMS, scheme)
    assert state_distance(out, state) <= 1e-13


def test_rk4_step_halving_richardson(rng):
    # global self-convergence at order 4: error ratio 16 +- 20%
    g = make_grid(2, 32)
    state = smooth_state(g, rng, PARAMS.eps)
    tau = 0.04
    sols = {}
    for m in (4, 8, 16):
        s = state
        for _ in range(m):
            s = rk4_step(s, tau / m, PARAMS)
        sols[m] = s
    e1 = state_distance(sols[4], sols[8])
    e2 = state_distance(sols[8], sols[16])
    assert 12.8 <= e1 / e2 <= 19.2


def test_imex_self_convergence_order_2(rng):
    g = make_grid(2, 32)
    state = smooth_state(g, rng, PARAMS.eps)
    tau = 0.04
    sols = {}
    for m in (8, 16, 32):
        stepper = ImexCN(g, PARAMS, tau / m)
        s = state
        for _ in range(m):
            s = stepper.step(s)
        sols[m] = s
    e1 = state_distance(sols[8], sols[16])
    e2 = state_distance(sols[16], sols[32])
    ratio = e1 / e2
    # order 2 +- 0.2
    assert 2**1.8 <= ratio <= 2**2.2


def test_linear_block_matches_nonlinear_rhs(rng, grid2d):
    # the per-mode block is the Frechet derivative at (1, 0, Tbar): residual
    # of the linearization shrinks quadratically with the perturbation size
    from qnsp.rhs import qnsp_rhs
    from qnsp.stepping import _pack

    params = PhysParams(eps=0.05, hbar=0.05, mu=0.1, lam=0.02, kappa=0.1)
    A = linear_block(grid2d, params, 1.0)

    def residual(amp):
        rng2 = np.random.default_rng(7)
        n = smooth_scalar(grid2d, rng2, kmax=4, amplitude=amp, mean=1.0)
        u = VectorField(
            tuple(smooth_scalar(grid2d, rng2, kmax=4, amplitude=amp) for _ in range(2))
        )
        T = smooth_scalar(grid2d, rng2, kmax=4, amplitude=amp, mean=1.0)
        state = FluidState.build(0.0, n, u, T, params.eps)
        dn, du, dT = qnsp_rhs(state, params)
        y = _pack(n, u, T)
        lin = np.einsum("...ij,...j->...i", A, y)
        full = _pack(dn, du, dT)
        return np.linalg.norm(full - lin)

    r1 = residual(1e-3)
    r2 = residual(1e-4)
    assert r1 / r2 == pytest.approx(100.0, rel=0.2)


def test_imex_linear_core_vs_matrix_exponential():
    # frozen linearization, one Fourier mode: Crank-Nicolson against expm,
    # second order verified by halving
    g = make_grid(2, 16)
    params = PhysParams(eps=0.01, hbar=0.05, mu=0.1, lam=0.0, kappa=0.1)
    A = linear_block(g, params, 1.0)
    idx = (2, 3)
    Am = A[idx]
    rng = np.random.default_rng(3)
    y0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    tau = 0.1

    def cn_error(steps):
        dt = tau / steps
        eye = np.eye(4)
        y = y0.copy()
        for _ in range(steps):
            y = np.linalg.solve(eye - dt / 2 * Am, (eye + dt / 2 * Am) @ y)
        exact = scipy.linalg.expm(tau * Am) @ y0
        return np.linalg.norm(y - exact) / np.linalg.norm(exact)

    e1, e2 = cn_error(64), cn_error(128)
    assert e1 / e2 == pytest.approx(4.0, rel=0.2)


def test_mass_conservation_and_potential_consistency(rng):
    from qnsp.state import potential_consistency

    g = make_grid(2, 32)
    params = PhysParams(eps=0.05, hbar=0.05, mu=0.1, lam=0.0, kappa=0.1)
    state = smooth_state(g, rng, params.eps)
    traj = integrate(state, 0.05, params, dt=2.5e-3, scheme="rk4_explicit", cadence=0.01)
    for s in traj:
        assert abs(s.n.mean - 1.0) <= 1e-12
        assert potential_consistency(s) <= 1e-10


def test_integrate_equilibrium_constant_trajectory(grid2d):
    state = equilibrium(grid2d, 0.1, 1.0)
    params = PhysParams(eps=0.1, hbar=0.02, mu=0.1, lam=0.0, kappa=0.05)
    traj = integrate(state, 0.2, params, dt=0.004, cadence=0.04)
    assert len(traj) == 6
    assert np.allclose(np.diff(traj.times), 0.04)
    for s in traj:
        assert state_distance(s, state) <= 1e-13


def test_small_amplitude_taylor_green_decay(rng):
    # eps = 1, hbar = kappa = 0, tiny amplitude: the compressible response is
    # O(a^2), so the velocity tracks the incompressible decay e^{-2 mu t}
    g = make_grid(2, 32)
    params = PhysParams(eps=1.0, hbar=0.0, mu=0.1, lam=0.0, kappa=0.0)
    a = 1e-4
    u0 = taylor_green_velocity(g, amplitude=a)
    state = FluidState.build(
        0.0, ScalarField.constant(g, 1.0), u0, ScalarField.constant(g, 1.0), params.eps
    )
    traj = integrate(state, 0.5, params, dt=5e-3, scheme="rk4_explicit")
    final = traj.final
    decay = np.exp(-2 * params.mu * 0.5)
    err = np.sqrt(sum(l2_norm(c - decay * c0) ** 2 for c, c0 in zip(final.u, u0)))
    ref = np.sqrt(sum(l2_norm(decay * c0) ** 2 for c0 in u0))
    assert err <= 2e-3 * ref


def test_blow_up_detection(grid2d):
    x, y = grid2d.meshgrid()
    n = ScalarField.from_values(grid2d, 1.0 + 0.9 * np.cos(x))
    state = FluidState.build(
        0.0, n, VectorField.zeros(grid2d), ScalarField.constant(grid2d, 1.0), 0.1
    )
    params = PhysParams(eps=0.1, hbar=0.0, mu=0.1, lam=0.0, kappa=0.1)
    with pytest.raises(BlowUpError) as err:
        integrate(state, 0.5, params, dt=1e-3, warn_stability=False)
    assert err.value.min_n <= 0.25
    assert hasattr(err.value, "partial")


def test_stability_report_imex_dt_is_eps_independent(rng):
    g = make_grid(2, 32)
    state = smooth_state(g, rng, 1.0)
    p_big = PhysParams(eps=1.0, hbar=0.05, mu=0.1, kappa=0.1)
    p_small = PhysParams(eps=1e-6, hbar=0.05, mu=0.1, kappa=0.1)
    r_big = stability_report(state, p_big, "imex_cn")
    r_small = stability_report(state, p_small, "imex_cn")
    assert r_big["dt_max"] == pytest.approx(r_small["dt_max"], rel=1e-12)
    # while the explicit scheme's limit collapses with eps
    e_big = stability_report(state, p_big, "rk4_explicit")
    e_small = stability_report(state, p_small, "rk4_explicit")
    assert e_small["dt_max"] < 0.05 * e_big["dt_max"]


def test_integrate_rejects_bad_cadence(grid2d):
    state = equilibrium(grid2d, 0.1)
    params = PhysParams(eps=0.1, hbar=0.0, mu=0.1, kappa=0.1)
    with pytest.raises(ConfigurationError):
        integrate(state, 0.1, params, dt=0.01, cadence=0.025)


def test_three_d_smoke(rng):
    g = make_grid(3, 16)
    params = PhysParams(eps=0.5, hbar=0.02, mu=0.1, lam=0.0, kappa=0.1)
    n = smooth_scalar(g, rng, kmax=2, amplitude=0.02, mean=1.0)
    u = taylor_green_velocity(g, amplitude=0.1)
    T = ScalarField.constant(g, 1.0)
    state = FluidState.build(0.0, n, u, T, params.eps)
    traj = integrate(state, 0.02, params, dt=5e-3)
    assert abs(traj.final.n.mean - 1.0) <= 1e-12
    assert traj.final.is_finite()

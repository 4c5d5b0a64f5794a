"""Time integration of the full system.

Two schemes:

* ``rk4_explicit`` -- classical fourth-order Runge-Kutta on the full
  nonlinear tendencies; the accuracy reference at moderate eps.

* ``imex_cn`` -- Crank-Nicolson on the per-mode linearization about the
  spatially constant state (n, u, T) = (1, 0, Tbar(t)), with the potential
  eliminated through the Poisson coupling, plus second-order extrapolation
  (Adams-Bashforth 2) of the remaining nonlinear residual.  The implicit
  block absorbs the plasma oscillation (frequency ~ eps^{-1/2}), the
  viscous/heat operators and the third-order dispersive term, all fatal to
  explicit schemes at small eps.

Every completed step re-projects mean(n) to exactly 1, refreshes the
potential, and checks the density corridor [0.25, 2.5] (wider than the
analytical a-priori corridor (1/2, 3/2) to tolerate transients while still
catching blow-up).
"""

from __future__ import annotations

import math
import time

import numpy as np

from .errors import (
    BlowUpError,
    ConfigurationError,
    DomainError,
    IntegrationTimeout,
    NumericsError,
    UsageError,
)
from .fields import ScalarField, VectorField
from .rhs import qnsp_rhs
from .state import FluidState, Trajectory

DENSITY_FLOOR = 0.25
DENSITY_CEIL = 2.5
SCHEMES = ("rk4_explicit", "imex_cn")


# ---------------------------------------------------------------------------
# small algebra on (n, u, T) triples
# ---------------------------------------------------------------------------

def _axpy(state_fields, coef, tend):
    n, u, T = state_fields
    dn, du, dT = tend
    return (n + coef * dn, u + coef * du, T + coef * dT)


def _as_state(t, fields, eps):
    n, u, T = fields
    return FluidState.build(t, n, u, T, eps)


def _finalize(t, fields, eps):
    """Re-project mean(n)=1, refresh phi, run corridor and NaN checks."""
    n, u, T = fields
    n = n.with_mean(1.0)
    state = FluidState.build(t, n, u, T, eps)
    if not state.is_finite():
        raise NumericsError(t)
    lo, hi = state.density_range
    if lo <= DENSITY_FLOOR or hi >= DENSITY_CEIL:
        raise BlowUpError(t, lo, hi)
    return state


# ---------------------------------------------------------------------------
# explicit RK4
# ---------------------------------------------------------------------------

def rk4_step(state, dt, params, bohm_form="log_hessian"):
    eps = params.eps
    y0 = (state.n, state.u, state.T)
    t = state.t
    try:
        k1 = qnsp_rhs(state, params, bohm_form)
        k2 = qnsp_rhs(_as_state(t, _axpy(y0, dt / 2, k1), eps), params, bohm_form)
        k3 = qnsp_rhs(_as_state(t, _axpy(y0, dt / 2, k2), eps), params, bohm_form)
        k4 = qnsp_rhs(_as_state(t, _axpy(y0, dt, k3), eps), params, bohm_form)
    except DomainError:
        lo, hi = state.density_range
        raise BlowUpError(t, lo, hi) from None
    out = y0
    for coef, k in ((dt / 6, k1), (dt / 3, k2), (dt / 3, k3), (dt / 6, k4)):
        out = _axpy(out, coef, k)
    return _finalize(t + dt, out, eps)


# ---------------------------------------------------------------------------
# IMEX Crank-Nicolson with AB2-extrapolated nonlinear residual
# ---------------------------------------------------------------------------

def linear_block(grid, params, t_mean):
    """Per-mode linearization about (1, 0, t_mean), potential eliminated.

    Returns a complex array of shape (*grid.shape, s, s) with s = dim+2 and
    state ordering (n_hat, u_hat_1..dim, T_hat).  Mode 0 and the Nyquist
    modes carry zero symbols, so means and masked modes are untouched by the
    implicit solve.
    """
    dim = grid.dim
    s = dim + 2
    iks = [grid.ik(ax) for ax in range(dim)]
    k2 = grid.k_squared()
    inv_k2 = np.zeros_like(k2)
    nz = k2 > 0
    inv_k2[nz] = 1.0 / k2[nz]

    A = np.zeros(grid.shape + (s, s), dtype=complex)
    h2 = params.hbar**2
    for a in range(dim):
        ika = iks[a]
        # continuity: dn/dt = -div u
        A[..., 0, 1 + a] = -ika
        # momentum: pressure, dispersion, plasma coupling, temperature gradient
        A[..., 1 + a, 0] = -t_mean * ika - (h2 / 12.0) * ika * k2 - ika * inv_k2 / params.eps
        A[..., 1 + a, s - 1] = -ika
        # viscosity
        A[..., 1 + a, 1 + a] += -params.mu * k2
        for b in range(dim):
            A[..., 1 + a, 1 + b] += (params.mu + params.lam) * ika * iks[b]
        # temperature: adiabatic compression and quantum heat flux
        A[..., s - 1, 1 + a] = -(2.0 / 3.0) * t_mean * ika + (h2 / 36.0) * k2 * ika
    A[..., s - 1, s - 1] = -(2.0 * params.kappa / 3.0) * k2
    return A


def _pack(n, u, T):
    return np.stack([n.coeffs, *[c.coeffs for c in u], T.coeffs], axis=-1)


def _unpack(grid, y):
    dim = grid.dim
    n = ScalarField(grid, y[..., 0])
    u = VectorField(tuple(ScalarField(grid, y[..., 1 + a]) for a in range(dim)))
    T = ScalarField(grid, y[..., dim + 1])
    return n, u, T


class ImexCN:
    """Stateful stepper: Crank-Nicolson linear core + AB2 explicit residual.

    The first step bootstraps with a trapezoidal predictor-corrector so the
    scheme is second order from the start.
    """

    def __init__(self, grid, params, dt, bohm_form="log_hessian"):
        self.grid = grid
        self.params = params
        self.dt = dt
        self.bohm_form = bohm_form
        self.prev_residual = None
        self._eye = np.eye(grid.dim + 2, dtype=complex)

    def _residual(self, state, A):
        """Nonlinear residual N(y) = full_rhs(y) - A y, packed."""
        dn, du, dT = qnsp_rhs(state, self.params, self.bohm_form)
        y = _pack(state.n, state.u, state.T)
        lin = np.einsum("...ij,...j->...i", A, y)
        return _pack(dn, du, dT) - lin

    def _cn_solve(self, A, y, residual):
        dt = self.dt
        lhs = self._eye - (dt / 2.0) * A
        rhs = np.einsum("...ij,...j->...i", self._eye + (dt / 2.0) * A, y) + dt * residual
        s = A.shape[-1]
        sol = np.linalg.solve(lhs.reshape(-1, s, s), rhs.reshape(-1, s, 1))
        return sol.reshape(y.shape)

    def step(self, state):
        eps = self.params.eps
        t = state.t
        A = linear_block(self.grid, self.params, state.T.mean)
        y = _pack(state.n, state.u, state.T)
        try:
            current = self._residual(state, A)
            if self.prev_residual is None:
                # trapezoidal start: predict with N(y_n), correct with the average
                y_star = self._cn_solve(A, y, current)
                pred = _finalize(t + self.dt, _unpack(self.grid, y_star), eps)
                res_star = self._residual(pred, A)
                extrap = 0.5 * (current + res_star)
            else:
                extrap = 1.5 * current - 0.5 * self.prev_residual
            y_new = self._cn_solve(A, y, extrap)
        except DomainError:
            lo, hi = state.density_range
            raise BlowUpError(t, lo, hi) from None
        self.prev_residual = current
        return _finalize(t + self.dt, _unpack(self.grid, y_new), eps)


def imex_cn_step(state, dt, params, bohm_form="log_hessian"):
    """Single self-starting IMEX step (trapezoidal predictor-corrector)."""
    return ImexCN(state.grid, params, dt, bohm_form).step(state)


def step(state, dt, params, scheme="rk4_explicit", bohm_form="log_hessian"):
    """Advance one step with the named scheme."""
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if scheme == "rk4_explicit":
        return rk4_step(state, dt, params, bohm_form)
    if scheme == "imex_cn":
        return imex_cn_step(state, dt, params, bohm_form)
    raise UsageError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


# ---------------------------------------------------------------------------
# stability reports
# ---------------------------------------------------------------------------

def stability_report(state, params, scheme="rk4_explicit", safety=0.5):
    """Computed step-size limits for the chosen scheme.

    The spectral radius bound uses the dealiased wavenumber ball (states are
    band-limited by construction).  RK4 limits: |imag| <= 2.8/dt from the
    wave branch sqrt(Tbar k^2 + 1/eps + hbar^2 k^4 / 12) plus advection,
    real axis <= 2.79/dt from the parabolic operators.  For imex_cn only the
    explicitly treated advection constrains dt.

    The default safety factor of 0.5 covers the variable-coefficient
    amplification the frozen-coefficient analysis ignores: within the
    admissible density corridor the 1/n factors can double every parabolic
    rate (n as low as 1/2).
    """
    g = state.grid
    scale = 2.0 * math.pi / g.length
    k2max = g.dim * (scale * g.dealias_cutoff) ** 2
    umax = float(np.sqrt(sum(c.values**2 for c in state.u)).max())
    t_mean = state.T.mean

    omega = math.sqrt(t_mean * k2max + 1.0 / params.eps + (params.hbar**2 / 12.0) * k2max**2)
    adv = umax * math.sqrt(k2max)
    parabolic = max(2 * params.mu + params.lam, params.mu, 2 * params.kappa / 3.0) * k2max

    report = {
        "scheme": scheme,
        "dt_advection": safety * 2.8 / adv if adv > 0 else math.inf,
        "dt_wave": safety * 2.8 / (omega + adv),
        "dt_parabolic": safety * 2.79 / parabolic if parabolic > 0 else math.inf,
    }
    if scheme == "rk4_explicit":
        report["dt_max"] = min(report["dt_wave"], report["dt_parabolic"])
    elif scheme == "imex_cn":
        # explicit part is the advective/variable-coefficient residual only
        report["dt_max"] = safety * 0.5 / adv if adv > 0 else math.inf
    else:
        raise UsageError(f"unknown scheme {scheme!r}")
    return report


# ---------------------------------------------------------------------------
# integration driver
# ---------------------------------------------------------------------------

def integrate(
    state0,
    tau,
    params,
    dt,
    scheme="rk4_explicit",
    cadence=None,
    hook=None,
    bohm_form="log_hessian",
    max_wall_s=None,
    warn_stability=True,
):
    """Integrate to time state0.t + tau, sampling every `cadence` time units.

    Returns a Trajectory.  On blow-up/NaN/timeout the corresponding error is
    raised with the partial trajectory attached as ``err.partial``.
    """
    if tau <= 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    steps = max(1, math.ceil(tau / dt - 1e-9))
    dt_eff = tau / steps
    if cadence is None:
        stride = 1
    else:
        stride = max(1, round(cadence / dt_eff))
        if abs(stride * dt_eff - cadence) > 1e-8 * cadence:
            raise ConfigurationError(
                f"cadence {cadence} is not a multiple of dt {dt_eff}"
            )
    if warn_stability:
        rep = stability_report(state0, params, scheme)
        if dt_eff > rep["dt_max"] * 1.0000001:
            import warnings

            warnings.warn(
                f"dt={dt_eff:.3e} exceeds the {scheme} stability report "
                f"dt_max={rep['dt_max']:.3e}",
                stacklevel=2,
            )

    stepper = None
    if scheme == "imex_cn":
        stepper = ImexCN(state0.grid, params, dt_eff, bohm_form)
    elif scheme != "rk4_explicit":
        raise UsageError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")

    t_start = time.perf_counter()
    samples = [state0]
    if hook is not None:
        hook(state0)
    state = state0
    try:
        for i in range(1, steps + 1):
            if scheme == "rk4_explicit":
                state = rk4_step(state, dt_eff, params, bohm_form)
            else:
                state = stepper.step(state)
            # keep emitted times exact multiples of the cadence
            state = FluidState(
                state0.t + i * dt_eff, state.n, state.u, state.T, state.phi, params.eps
            )
            if i % stride == 0:
                samples.append(state)
                if hook is not None:
                    hook(state)
                if max_wall_s is not None and time.perf_counter() - t_start > max_wall_s:
                    raise IntegrationTimeout(state.t, max_wall_s)
    except (BlowUpError, NumericsError, IntegrationTimeout) as err:
        err.partial = Trajectory(tuple(samples), params, state0.grid)
        raise
    return Trajectory(tuple(samples), params, state0.grid)

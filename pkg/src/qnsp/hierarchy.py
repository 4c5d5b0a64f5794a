"""The asymptotic hierarchy: limit system, order-k corrections, composition.

Order 0 is the incompressible limit flow (div-free velocity, heat equation
with viscous heating, potential recovered as the Lagrange multiplier of the
divergence constraint).  Order k >= 1 solves the linearized correction
system driven by a forcing built from lower orders: in closed form at k = 1,
and by Taylor-coefficient extraction in the expansion parameter for k >= 2,
where no closed form is written down.

Profiles are parameter-independent in the expansion parameter and are shared
by every run of a ladder; trajectories are stored as physical-space samples
with cubic-spline interpolation in time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline

from .errors import ConfigurationError, DependencyError, NumericsError, UsageError
from .extraction import default_nodes, taylor_coefficient
from .fields import ScalarField, VectorField
from .grid import Grid
from .norms import l2_norm
from .operators import (
    advect,
    dealiased_divide,
    dealiased_product,
    div,
    dot,
    grad,
    inverse_laplacian,
    laplacian,
    leray_project,
)
from .params import PhysParams
from .rhs import bohm_force, strain_invariant
from .state import FluidState


# ---------------------------------------------------------------------------
# sampled trajectories with spline interpolation
# ---------------------------------------------------------------------------

SCALAR_KEYS = ("n", "T", "phi", "dT", "dphi", "divu", "g")
VECTOR_KEYS = ("u", "du", "f")


def _time_spline(times, arr):
    """Cubic interpolant in time, degrading gracefully for short series."""
    if len(times) >= 4:
        return CubicSpline(times, arr, axis=0)
    return make_interp_spline(times, arr, k=len(times) - 1, axis=0)


@dataclass
class Track:
    """Time samples of one hierarchy order, physical-space arrays.

    Scalar keys map to (T, *shape) float arrays, vector keys to
    (T, dim, *shape).  Interpolation between samples is cubic.
    """

    grid: Grid
    times: np.ndarray
    data: dict
    order: int
    _splines: dict = field(default_factory=dict, repr=False)

    def _check_time(self, t):
        t0, t1 = self.times[0], self.times[-1]
        if t < t0 - 1e-9 or t > t1 + 1e-9:
            raise UsageError(f"t={t} outside profile range [{t0}, {t1}]")

    def spline(self, key):
        if key not in self._splines:
            self._splines[key] = _time_spline(self.times, self.data[key])
        return self._splines[key]

    def values_at(self, key, t):
        self._check_time(t)
        if len(self.times) == 1:
            return self.data[key][0]
        return self.spline(key)(t)

    def scalar_at(self, key, t) -> ScalarField:
        return ScalarField.from_values(self.grid, self.values_at(key, t))

    def vector_at(self, key, t) -> VectorField:
        vals = self.values_at(key, t)
        return VectorField.from_values(self.grid, *vals)


def _spline_derivative_samples(times, arr):
    """d/dt of sampled data, evaluated back at the sample times."""
    return _time_spline(times, arr).derivative()(times)


def _stack_scalar(fields_list):
    return np.stack([f.values for f in fields_list])


def _stack_vector(fields_list):
    return np.stack([np.stack([c.values for c in v]) for v in fields_list])


# ---------------------------------------------------------------------------
# order 0: the incompressible limit flow
# ---------------------------------------------------------------------------

def limit_rhs(u, T, params):
    du = leray_project(-1.0 * advect(u, u) + params.mu * laplacian(u))
    dT = (
        -1.0 * advect(u, T)
        + (2.0 * params.kappa / 3.0) * laplacian(T)
        + (params.mu / 3.0) * strain_invariant(u)
    )
    return du, dT


def pressure_poisson(u0: VectorField, T0: ScalarField, params=None) -> ScalarField:
    """Limit potential: lap(phi - T) = div(u.grad u), mean-zero gauge.

    The multiplier is parameter-free; `params` is accepted for interface
    uniformity.
    """
    rel = l2_norm(div(u0)) / max(np.sqrt(sum(l2_norm(c) ** 2 for c in u0)), 1e-300)
    if rel > 1e-8:
        raise UsageError(f"pressure_poisson needs div u = 0, relative divergence {rel:.2e}")
    return T0.with_mean(0.0) + inverse_laplacian(div(advect(u0, u0)).with_mean(0.0))


def _limit_dphi(u, T, du, dT):
    """Exact time derivative of the limit potential via the differentiated
    multiplier identity."""
    pair = advect(du, u) + advect(u, du)
    return dT.with_mean(0.0) + inverse_laplacian(div(pair).with_mean(0.0))


class _DiagImex:
    """Crank-Nicolson on per-mode diagonal factors + AB2 explicit residual."""

    def __init__(self, dt, nus):
        self.dt = dt
        self.nus = nus  # one damping-factor array per state slot
        self.prev = None

    def _cn(self, fields, expl):
        out = []
        for f, nu, e in zip(fields, self.nus, expl):
            if isinstance(f, VectorField):
                comps = tuple(
                    ScalarField(
                        c.grid,
                        ((1.0 - self.dt * nu / 2.0) * c.coeffs + self.dt * ec.coeffs)
                        / (1.0 + self.dt * nu / 2.0),
                    )
                    for c, ec in zip(f, e)
                )
                out.append(VectorField(comps))
            else:
                out.append(
                    ScalarField(
                        f.grid,
                        ((1.0 - self.dt * nu / 2.0) * f.coeffs + self.dt * e.coeffs)
                        / (1.0 + self.dt * nu / 2.0),
                    )
                )
        return tuple(out)

    def advance(self, fields, t, explicit_rhs):
        cur = explicit_rhs(t, fields)
        if self.prev is None:
            pred = self._cn(fields, cur)
            res = explicit_rhs(t + self.dt, pred)
            mix = tuple(0.5 * (a + b) for a, b in zip(cur, res))
        else:
            mix = tuple(1.5 * a - 0.5 * b for a, b in zip(cur, self.prev))
        self.prev = cur
        return self._cn(fields, mix)


def _steps_and_stride(tau, dt, cadence):
    steps = max(1, int(np.ceil(tau / dt - 1e-9)))
    dt_eff = tau / steps
    if cadence is None:
        stride = 1
    else:
        stride = max(1, round(cadence / dt_eff))
        if abs(stride * dt_eff - cadence) > 1e-8 * cadence:
            raise ConfigurationError(f"cadence {cadence} is not a multiple of dt {dt_eff}")
    return steps, dt_eff, stride


def integrate_limit(u0, T0, tau, params, dt, cadence=None, scheme="rk4_explicit") -> Track:
    """Integrate the limit system; returns the order-0 Track.

    Stores (u, T, phi, du, dT, dphi) at the sample cadence, with the time
    derivatives evaluated exactly from the right-hand sides.
    """
    grid = u0.grid
    rel_div = l2_norm(div(u0)) / max(np.sqrt(sum(l2_norm(c) ** 2 for c in u0)), 1e-300)
    if rel_div > 1e-12:
        warnings.warn(f"projecting initial velocity (relative divergence {rel_div:.2e})")
        u0 = leray_project(u0)
    if T0.mean <= 0:
        raise ConfigurationError(f"mean temperature must be positive, got {T0.mean}")

    steps, dt_eff, stride = _steps_and_stride(tau, dt, cadence)

    samples = {"u": [], "T": [], "phi": [], "du": [], "dT": [], "dphi": []}
    times = []

    def emit(t, u, T):
        du, dT = limit_rhs(u, T, params)
        if not np.isfinite(u[0].coeffs).all() or not np.isfinite(T.coeffs).all():
            raise NumericsError(t, "limit profile")
        times.append(t)
        samples["u"].append(u)
        samples["T"].append(T)
        samples["phi"].append(pressure_poisson(u, T))
        samples["du"].append(du)
        samples["dT"].append(dT)
        samples["dphi"].append(_limit_dphi(u, T, du, dT))

    u, T = u0, T0
    emit(0.0, u, T)

    if scheme == "imex_cn":
        k2 = grid.k_squared()
        stepper = _DiagImex(dt_eff, [params.mu * k2, (2.0 * params.kappa / 3.0) * k2])

        def expl(t, fields):
            uu, tt = fields
            du = leray_project(-1.0 * advect(uu, uu))
            dT = -1.0 * advect(uu, tt) + (params.mu / 3.0) * strain_invariant(uu)
            return du, dT

    elif scheme != "rk4_explicit":
        raise UsageError(f"unknown scheme {scheme!r}")

    for i in range(1, steps + 1):
        if scheme == "rk4_explicit":
            k1 = limit_rhs(u, T, params)
            k2_ = limit_rhs(u + (dt_eff / 2) * k1[0], T + (dt_eff / 2) * k1[1], params)
            k3 = limit_rhs(u + (dt_eff / 2) * k2_[0], T + (dt_eff / 2) * k2_[1], params)
            k4 = limit_rhs(u + dt_eff * k3[0], T + dt_eff * k3[1], params)
            u = u + (dt_eff / 6) * (k1[0] + 2.0 * k2_[0] + 2.0 * k3[0] + k4[0])
            T = T + (dt_eff / 6) * (k1[1] + 2.0 * k2_[1] + 2.0 * k3[1] + k4[1])
        else:
            u, T = stepper.advance((u, T), (i - 1) * dt_eff, expl)
        u = leray_project(u)  # keep the constraint exact against rounding drift
        if i % stride == 0:
            emit(i * dt_eff, u, T)

    data = {
        "u": _stack_vector(samples["u"]),
        "T": _stack_scalar(samples["T"]),
        "phi": _stack_scalar(samples["phi"]),
        "du": _stack_vector(samples["du"]),
        "dT": _stack_scalar(samples["dT"]),
        "dphi": _stack_scalar(samples["dphi"]),
    }
    return Track(grid, np.array(times), data, order=0)


# ---------------------------------------------------------------------------
# profile container
# ---------------------------------------------------------------------------

@dataclass
class ProfileSet:
    """Hierarchy profiles through order N on a shared grid and time range."""

    tracks: list
    params: PhysParams
    grid: Grid

    @property
    def order(self):
        return len(self.tracks) - 1

    @property
    def times(self):
        return self.tracks[0].times

    def track(self, k) -> Track:
        if k >= len(self.tracks):
            raise DependencyError(f"order {k} not available (have 0..{self.order})")
        return self.tracks[k]

    def n_k(self, k, t) -> ScalarField:
        """Order-k density profile (slaved to the previous potential)."""
        if k == 0:
            return ScalarField.constant(self.grid, 1.0)
        return self.track(k).scalar_at("n", t)

    def tilde_sums(self, eps, t):
        """Profile sums (n~, u~, T~, phi~) weighting order k by eps^(k-1)."""
        N = self.order
        if N == 0:
            zs = ScalarField.zeros(self.grid)
            return zs, VectorField.zeros(self.grid), zs, zs
        n_t = self.track(1).scalar_at("n", t)
        u_t = self.track(1).vector_at("u", t)
        T_t = self.track(1).scalar_at("T", t)
        p_t = self.track(1).scalar_at("phi", t)
        for k in range(2, N + 1):
            w = eps ** (k - 1)
            n_t = n_t + w * self.track(k).scalar_at("n", t)
            u_t = u_t + w * self.track(k).vector_at("u", t)
            T_t = T_t + w * self.track(k).scalar_at("T", t)
            p_t = p_t + w * self.track(k).scalar_at("phi", t)
        return n_t, u_t, T_t, p_t

    def compose(self, eps, t) -> FluidState:
        """Composed state (1 + eps*n~, u0 + eps*u~, T0 + eps*T~, phi0 + eps*phi~)."""
        n_t, u_t, T_t, p_t = self.tilde_sums(eps, t)
        base = self.track(0)
        n = ScalarField.constant(self.grid, 1.0) + eps * n_t
        u = base.vector_at("u", t) + eps * u_t
        T = base.scalar_at("T", t) + eps * T_t
        phi = base.scalar_at("phi", t) + eps * p_t
        return FluidState(t, n, u, T, phi, eps)

    def continuity_overflow(self, eps, t) -> ScalarField:
        """Leftover of the composed continuity equation beyond order N:
        sum over 1 <= a,b <= N with a+b >= N+1 of eps^(a+b-N-1) div(n_a u_b)."""
        N = self.order
        out = ScalarField.zeros(self.grid)
        for a in range(1, N + 1):
            na = self.track(a).scalar_at("n", t)
            for b in range(1, N + 1):
                if a + b < N + 1:
                    continue
                ub = self.track(b).vector_at("u", t)
                out = out + eps ** (a + b - N - 1) * div(dealiased_product(na, ub))
        return out


def compose_profile(profiles: ProfileSet, eps, t) -> FluidState:
    return profiles.compose(eps, t)


def compose_initial_data(profiles: ProfileSet, eps, remainder0=None) -> FluidState:
    """Initial data on the expansion, plus eps^N times an optional remainder.

    The remainder triple (n_r0, u_r0, t_r0) must have mean-zero density part;
    the potential is re-derived from the Poisson coupling so solver states
    start fully consistent.
    """
    t0 = float(profiles.times[0])
    state = profiles.compose(eps, t0)
    n, u, T = state.n, state.u, state.T
    if remainder0 is not None:
        w = eps**profiles.order
        n = n + w * remainder0.n_r
        u = u + w * remainder0.u_r
        T = T + w * remainder0.t_r
    return FluidState.build(t0, n, u, T, eps)


# ---------------------------------------------------------------------------
# correction forcings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForcingPair:
    """Sampled forcing trajectories (f vector, g scalar) of one order."""

    order: int
    method: str
    times: np.ndarray
    f: np.ndarray  # (T, dim, *shape)
    g: np.ndarray  # (T, *shape)
    condition: float = 0.0

    def splines(self, grid):
        fs = _time_spline(self.times, self.f)
        gs = _time_spline(self.times, self.g)

        def f_at(t):
            return VectorField.from_values(grid, *fs(t))

        def g_at(t):
            return ScalarField.from_values(grid, gs(t))

        return f_at, g_at


def prescribed_divergence(profiles: ProfileSet, k, t) -> ScalarField:
    """div of the order-k velocity, fixed by the lower orders:
    -d/dt lap(phi_{k-1}) - sum_{i=1}^{k-1} div(n_i u_{k-i}) - u_0 . grad lap(phi_{k-1})."""
    prev = profiles.track(k - 1)
    lap_phi = laplacian(prev.scalar_at("phi", t))
    lap_dphi = laplacian(prev.scalar_at("dphi", t))
    u0 = profiles.track(0).vector_at("u", t)
    out = -1.0 * lap_dphi - dot(u0, grad(lap_phi))
    for i in range(1, k):
        ni = profiles.track(i).scalar_at("n", t)
        ui = profiles.track(k - i).vector_at("u", t)
        out = out - div(dealiased_product(ni, ui))
    return out.with_mean(0.0)  # mean vanishes analytically; drop rounding


def gradient_part(profiles, k, t) -> VectorField:
    return grad(inverse_laplacian(prescribed_divergence(profiles, k, t)))


def explicit_first_order_forcing(profiles: ProfileSet, params, t):
    """Closed-form first-order forcing pair, built from the limit flow only."""
    base = profiles.track(0)
    u0 = base.vector_at("u", t)
    T0 = base.scalar_at("T", t)
    phi0 = base.scalar_at("phi", t)
    dphi0 = base.scalar_at("dphi", t)

    lap_phi = laplacian(phi0)
    grad_lap_phi = grad(lap_phi)
    lap_dphi = laplacian(dphi0)
    adv_lap = dot(u0, grad_lap_phi)
    lap_u0 = laplacian(u0)
    h2 = params.hbar**2

    f = dealiased_product(T0, grad_lap_phi)
    f = f - (h2 / 12.0) * grad(laplacian(lap_phi))
    f = f + params.mu * dealiased_product(lap_phi, lap_u0)
    f = f + (params.mu + params.lam) * grad(lap_dphi + adv_lap)

    d1 = -1.0 * lap_dphi - adv_lap  # the prescribed first-order divergence
    g = (2.0 / 3.0) * dealiased_product(T0, d1)
    g = g + (2.0 * params.kappa / 3.0) * dealiased_product(lap_phi, laplacian(T0))
    g = g + (h2 / 36.0) * (laplacian(d1) + dot(grad_lap_phi, lap_u0))
    g = g + (2.0 * params.mu / 3.0) * dealiased_product(
        lap_phi, 0.5 * strain_invariant(u0)
    )
    return f, g


def system_residual(n, u, T, phi, du, dT, params):
    """Full-system momentum/temperature operators applied to given fields
    (zero exactly on solutions); used by the extraction machinery."""
    pres = dealiased_divide(grad(dealiased_product(n, T)), n)
    a_u = du + advect(u, u) + pres
    if params.hbar != 0.0:
        a_u = a_u - bohm_force(n, params.hbar)
    a_u = a_u - grad(phi)
    a_u = a_u - params.mu * dealiased_divide(laplacian(u), n)
    a_u = a_u - (params.mu + params.lam) * dealiased_divide(grad(div(u)), n)

    divu = div(u)
    a_t = dT + advect(u, T) + (2.0 / 3.0) * dealiased_product(T, divu)
    a_t = a_t - (2.0 * params.kappa / 3.0) * dealiased_divide(laplacian(T), n)
    if params.hbar != 0.0:
        lap_u = laplacian(u)
        qflux = VectorField(tuple(dealiased_product(n, c) for c in lap_u))
        a_t = a_t + (params.hbar**2 / 36.0) * dealiased_divide(div(qflux), n)
    heating = (params.mu / 2.0) * strain_invariant(u)
    if params.lam != 0.0:
        heating = heating + params.lam * dealiased_product(divu, divu)
    a_t = a_t - (2.0 / 3.0) * dealiased_divide(heating, n)
    return a_u, a_t


def extraction_forcing(profiles: ProfileSet, k, params, t, eps0=1e-2, extra=3):
    """Order-k forcing by Taylor extraction in the expansion parameter.

    The system operators are evaluated on the partial sum through order k-1,
    augmented with the known order-k density (slaved to the previous
    potential), at a ladder of expansion-parameter nodes; the k-th Taylor
    coefficient is the forcing up to the known divergence terms, which are
    added in closed form.
    """
    grid = profiles.grid
    base = profiles.track(0)
    fields = {}
    for i in range(k):
        tr = profiles.track(i)
        fields[i] = {
            "u": tr.vector_at("u", t),
            "T": tr.scalar_at("T", t),
            "phi": tr.scalar_at("phi", t),
            "du": tr.vector_at("du", t),
            "dT": tr.scalar_at("dT", t),
            "n": (
                ScalarField.constant(grid, 1.0)
                if i == 0
                else tr.scalar_at("n", t)
            ),
        }
    n_top = laplacian(profiles.track(k - 1).scalar_at("phi", t))  # order-k density

    nodes = default_nodes(k, eps0, extra)
    vals_u, vals_t = [], []
    for e in nodes:
        n_part = fields[0]["n"]
        u_part = fields[0]["u"]
        T_part = fields[0]["T"]
        phi_part = fields[0]["phi"]
        du_part = fields[0]["du"]
        dT_part = fields[0]["dT"]
        for i in range(1, k):
            w = e**i
            n_part = n_part + w * fields[i]["n"]
            u_part = u_part + w * fields[i]["u"]
            T_part = T_part + w * fields[i]["T"]
            phi_part = phi_part + w * fields[i]["phi"]
            du_part = du_part + w * fields[i]["du"]
            dT_part = dT_part + w * fields[i]["dT"]
        n_part = n_part + e**k * n_top
        a_u, a_t = system_residual(n_part, u_part, T_part, phi_part, du_part, dT_part, params)
        vals_u.append(np.stack([c.values for c in a_u]))
        vals_t.append(a_t.values)

    cu, cond_u = taylor_coefficient(vals_u, nodes, k)
    ct, cond_t = taylor_coefficient(vals_t, nodes, k)

    d_k = prescribed_divergence(profiles, k, t)
    f = VectorField.from_values(grid, *cu) - (params.mu + params.lam) * grad(d_k)
    g = ScalarField.from_values(grid, ct)
    g = g + (2.0 / 3.0) * dealiased_product(base.scalar_at("T", t), d_k)
    g = g + (params.hbar**2 / 36.0) * laplacian(d_k)
    return f, g, max(cond_u, cond_t)


def correction_forcing(k, profiles: ProfileSet, params, method="extraction") -> ForcingPair:
    """Forcing pair for order k, sampled on the shared profile cadence."""
    if method == "explicit" and k != 1:
        raise UsageError("the closed-form forcing exists only at order 1")
    if method not in ("explicit", "extraction"):
        raise UsageError(f"unknown forcing method {method!r}")
    if profiles.order < k - 1:
        raise DependencyError(
            f"order-{k} forcing needs profiles through {k - 1}, have {profiles.order}"
        )

    times = profiles.times
    fs, gs, cond = [], [], 0.0
    for t in times:
        if method == "explicit":
            f, g = explicit_first_order_forcing(profiles, params, t)
        else:
            f, g, c = extraction_forcing(profiles, k, params, t)
            cond = max(cond, c)
        fs.append(f)
        gs.append(g)
    return ForcingPair(
        order=k,
        method=method,
        times=times.copy(),
        f=_stack_vector(fs),
        g=_stack_scalar(gs),
        condition=cond,
    )


# ---------------------------------------------------------------------------
# order-k correction integration
# ---------------------------------------------------------------------------

def integrate_correction(
    k,
    profiles: ProfileSet,
    forcing: ForcingPair,
    tau,
    params,
    dt,
    cadence=None,
    init=None,
    scheme="rk4_explicit",
) -> Track:
    """Evolve the order-k correction and return its Track.

    The velocity splits into an evolved divergence-free part and a gradient
    part slaved to the prescribed divergence; the density is slaved to the
    previous potential; the order-k potential is recovered per sample as the
    Lagrange multiplier of the momentum equation.
    """
    if profiles.order != k - 1:
        raise DependencyError(
            f"integrating order {k} needs profiles exactly through {k - 1}"
        )
    if forcing.order != k:
        raise UsageError(f"forcing is for order {forcing.order}, not {k}")
    grid = profiles.grid
    base = profiles.track(0)
    f_at, g_at = forcing.splines(grid)

    def w_at(t):
        return gradient_part(profiles, k, t)

    if init is None:
        omega = VectorField.zeros(grid)
        t_corr = ScalarField.zeros(grid)
    else:
        n0, u0, t_corr = init
        omega = leray_project(u0)
        w0 = w_at(0.0)
        mismatch = np.sqrt(sum(l2_norm(a - b) ** 2 for a, b in zip(u0 - omega, w0)))
        scale = max(np.sqrt(sum(l2_norm(c) ** 2 for c in w0)), 1e-300)
        if mismatch > 1e-8 * scale:
            warnings.warn(
                f"order-{k} initial velocity violates the divergence constraint "
                f"(relative mismatch {mismatch / scale:.2e}); projecting onto it"
            )
        n_slaved = laplacian(profiles.track(k - 1).scalar_at("phi", 0.0))
        if n0 is not None and l2_norm(n0 - n_slaved) > 1e-8 * max(l2_norm(n_slaved), 1e-300):
            warnings.warn(f"order-{k} initial density is re-slaved to the previous potential")

    def rhs(t, fields):
        om, tk = fields
        u_k = om + w_at(t)
        u0 = base.vector_at("u", t)
        T0 = base.scalar_at("T", t)
        dom = leray_project(
            -1.0 * advect(u0, u_k)
            - advect(u_k, u0)
            + params.mu * laplacian(u_k)
            - f_at(t)
        )
        s_coupling = _strain_coupling(u0, u_k)
        dtk = (
            -1.0 * advect(u_k, T0)
            - advect(u0, tk)
            + (2.0 * params.kappa / 3.0) * laplacian(tk)
            + (2.0 * params.mu / 3.0) * s_coupling
            - g_at(t)
        )
        return dom, dtk

    steps, dt_eff, stride = _steps_and_stride(tau, dt, cadence)

    times = []
    samples = {key: [] for key in ("u", "T", "divu", "domega", "dT", "f", "g")}

    def emit(t, om, tk):
        if not np.isfinite(om[0].coeffs).all() or not np.isfinite(tk.coeffs).all():
            raise NumericsError(t, f"order-{k} correction")
        dom, dtk = rhs(t, (om, tk))
        d_k = prescribed_divergence(profiles, k, t)
        times.append(t)
        samples["u"].append(om + grad(inverse_laplacian(d_k)))
        samples["T"].append(tk)
        samples["divu"].append(d_k)
        samples["domega"].append(dom)
        samples["dT"].append(dtk)
        samples["f"].append(f_at(t))
        samples["g"].append(g_at(t))

    om, tk = omega, t_corr
    emit(0.0, om, tk)

    if scheme == "imex_cn":
        k2 = grid.k_squared()
        stepper = _DiagImex(dt_eff, [params.mu * k2, (2.0 * params.kappa / 3.0) * k2])

        def expl(t, fields):
            dom, dtk = rhs(t, fields)
            omf, tkf = fields
            return (
                dom - params.mu * laplacian(omf),
                dtk - (2.0 * params.kappa / 3.0) * laplacian(tkf),
            )

    elif scheme != "rk4_explicit":
        raise UsageError(f"unknown scheme {scheme!r}")

    for i in range(1, steps + 1):
        t = (i - 1) * dt_eff
        if scheme == "rk4_explicit":
            y = (om, tk)
            k1 = rhs(t, y)
            k2_ = rhs(t + dt_eff / 2, _pair_axpy(y, dt_eff / 2, k1))
            k3 = rhs(t + dt_eff / 2, _pair_axpy(y, dt_eff / 2, k2_))
            k4 = rhs(t + dt_eff, _pair_axpy(y, dt_eff, k3))
            om = om + (dt_eff / 6) * (k1[0] + 2.0 * k2_[0] + 2.0 * k3[0] + k4[0])
            tk = tk + (dt_eff / 6) * (k1[1] + 2.0 * k2_[1] + 2.0 * k3[1] + k4[1])
        else:
            om, tk = stepper.advance((om, tk), t, expl)
        om = leray_project(om)
        if i % stride == 0:
            emit(i * dt_eff, om, tk)

    return _assemble_correction_track(
        grid, np.array(times), samples, profiles, params, k
    )


def _pair_axpy(y, c, d):
    return (y[0] + c * d[0], y[1] + c * d[1])


def _strain_coupling(u0, uk):
    """Frobenius contraction of the symmetrized gradients of two velocities."""
    g = u0.grid
    p0 = [[grad(u0[j])[i] for j in range(g.dim)] for i in range(g.dim)]
    pk = [[grad(uk[j])[i] for j in range(g.dim)] for i in range(g.dim)]
    out = ScalarField.zeros(g)
    for i in range(g.dim):
        for j in range(g.dim):
            s0 = p0[i][j] + p0[j][i]
            sk = pk[i][j] + pk[j][i]
            out = out + dealiased_product(s0, sk)
    return out


def _assemble_correction_track(grid, times, samples, profiles, params, k):
    """Post-process stored samples into a full Track: density slaving,
    potential recovery, and time derivatives of the slaved pieces."""
    base = profiles.track(0)
    prev = profiles.track(k - 1)

    divu_arr = _stack_scalar(samples["divu"])
    ddivu_arr = _spline_derivative_samples(times, divu_arr)

    n_list, u_full, du_list, phi_list = [], [], [], []
    for idx, t in enumerate(times):
        n_list.append(laplacian(prev.scalar_at("phi", t)))
        ddiv = ScalarField.from_values(grid, ddivu_arr[idx])
        dw = grad(inverse_laplacian(ddiv.with_mean(0.0)))
        du_full = samples["domega"][idx] + dw
        du_list.append(du_full)
        u_k = samples["u"][idx]
        u0 = base.vector_at("u", t)
        mult_rhs = (
            ddiv.with_mean(0.0)
            + laplacian(samples["T"][idx])
            + div(
                advect(u0, u_k)
                + advect(u_k, u0)
                - params.mu * laplacian(u_k)
                + samples["f"][idx]
            )
        )
        phi_list.append(inverse_laplacian(mult_rhs.with_mean(0.0)))
        u_full.append(u_k)

    phi_arr = _stack_scalar(phi_list)
    dphi_arr = _spline_derivative_samples(times, phi_arr)

    data = {
        "n": _stack_scalar(n_list),
        "u": _stack_vector(u_full),
        "T": _stack_scalar(samples["T"]),
        "phi": phi_arr,
        "dphi": dphi_arr,
        "du": _stack_vector(du_list),
        "dT": _stack_scalar(samples["dT"]),
        "divu": divu_arr,
        "f": _stack_vector(samples["f"]),
        "g": _stack_scalar(samples["g"]),
    }
    return Track(grid, times, data, order=k)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def build_profiles(
    u0,
    T0,
    order,
    tau,
    params,
    dt,
    cadence=None,
    scheme="rk4_explicit",
    forcing_method=None,
) -> ProfileSet:
    """Solve the hierarchy through `order` over [0, tau].

    Forcing policy: closed form at order 1, extraction beyond (overridable
    with `forcing_method` for cross-validation).
    """
    limit = integrate_limit(u0, T0, tau, params, dt, cadence, scheme)
    pset = ProfileSet([limit], params, u0.grid)
    for k in range(1, order + 1):
        method = forcing_method or ("explicit" if k == 1 else "extraction")
        forcing = correction_forcing(k, pset, params, method)
        track = integrate_correction(
            k, pset, forcing, tau, params, dt, cadence, scheme=scheme
        )
        pset = ProfileSet(pset.tracks + [track], params, u0.grid)
    return pset

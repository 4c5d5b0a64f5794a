"""Remainder extraction and verification diagnostics.

Remainders are always extracted from their definitions (full state minus
composed profiles, rescaled by the expansion order), never evolved from the
remainder system: only the continuity-side source term of that system is
fully explicit, so only the continuity and potential identities are checked
as residuals.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .fields import ScalarField, VectorField
from .hierarchy import ProfileSet
from .norms import l2_norm, sobolev_norm, sobolev_norm_sq, triple_norm
from .operators import dealiased_product, div, dot, grad, laplacian
from .state import FluidState, Trajectory, potential_consistency

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


@dataclass(frozen=True)
class RemainderSet:
    """Rescaled deviation of a full state from the composed profiles.

    phi_big_r is the weighted potential remainder sqrt(eps) * phi_r entering
    the energy norm and the potential identity.
    """

    t: float
    n_r: ScalarField
    u_r: VectorField
    t_r: ScalarField
    phi_r: ScalarField
    phi_big_r: ScalarField
    eps: float
    order: int

    def scaled(self, c):
        return RemainderSet(
            self.t,
            c * self.n_r,
            c * self.u_r,
            c * self.t_r,
            c * self.phi_r,
            c * self.phi_big_r,
            self.eps,
            self.order,
        )


def compute_remainders(full: FluidState, profiles: ProfileSet, eps=None) -> RemainderSet:
    """Extract (N_R, U_R, T_R, phi_R) at the state's time.

    The full state's potential must satisfy the Poisson coupling (solver
    states do); the construction is checked against the potential identity
    and complains if grossly inconsistent.
    """
    if eps is None:
        eps = full.params_eps
    N = profiles.order
    comp = profiles.compose(eps, full.t)
    scale = eps ** (-N)
    rem = RemainderSet(
        t=full.t,
        n_r=scale * (full.n - comp.n),
        u_r=scale * (full.u - comp.u),
        t_r=scale * (full.T - comp.T),
        phi_r=scale * (full.phi - comp.phi),
        phi_big_r=(scale * np.sqrt(eps)) * (full.phi - comp.phi),
        eps=eps,
        order=N,
    )
    res = potential_residual(rem, profiles.track(N).scalar_at("phi", full.t), eps)
    if res > 1e-3:
        raise UsageError(
            f"remainder extraction inconsistent with the Poisson coupling "
            f"(identity residual {res:.2e}); was the state produced with these profiles?"
        )
    if res > 1e-6:
        warnings.warn(f"potential identity residual {res:.2e} at t={full.t:.4g}")
    return rem


def potential_residual(rem: RemainderSet, phi_top: ScalarField, eps) -> float:
    """Residual of sqrt(eps)*lap(Phi_R) = -eps*lap(phi_N) + N_R, normalized
    by max(||N_R||, eps)."""
    lhs = np.sqrt(eps) * laplacian(rem.phi_big_r)
    rhs = -eps * laplacian(phi_top) + rem.n_r
    return l2_norm(lhs - rhs) / max(l2_norm(rem.n_r), eps)


def continuity_residual(rem_series, profiles: ProfileSet, eps):
    """L2 residual of the remainder continuity equation per interior sample.

    Uses second-order centered time differences of the stored remainders;
    needs at least three consecutive samples.  Returns (times, residuals).
    """
    if len(rem_series) < 3:
        raise UsageError("continuity residual needs at least 3 consecutive samples")
    times = np.array([r.t for r in rem_series])
    gaps = np.diff(times)
    if np.max(np.abs(gaps - gaps[0])) > 1e-9 * gaps[0]:
        raise UsageError("remainder samples must be uniformly spaced")
    N = profiles.order

    out_t, out_r = [], []
    for i in range(1, len(rem_series) - 1):
        prev_r, cur, next_r = rem_series[i - 1], rem_series[i], rem_series[i + 1]
        t = float(times[i])
        dn_r = (0.5 / gaps[0]) * (next_r.n_r - prev_r.n_r)

        comp = profiles.compose(eps, t)
        n_full = comp.n + eps**N * cur.n_r
        u_full = comp.u + eps**N * cur.u_r

        n_t, u_t, _, _ = profiles.tilde_sums(eps, t)
        frak1 = profiles.continuity_overflow(eps, t)

        res = dn_r + dot(u_full, grad(cur.n_r)) + dealiased_product(n_full, div(cur.u_r))
        res = res + eps * dot(cur.u_r, grad(n_t))
        res = res + eps * dealiased_product(div(u_t), cur.n_r)
        res = res + eps * frak1
        out_t.append(t)
        out_r.append(l2_norm(res))
    return np.array(out_t), np.array(out_r)


def bohm_dual_agreement(state, hbar) -> float:
    """Relative L2 split between the two quantum-force evaluation routes."""
    from .rhs import bohm_force

    if hbar == 0.0:
        return 0.0
    a = bohm_force(state.n, hbar, "log_hessian")
    b = bohm_force(state.n, hbar, "expanded")
    num = np.sqrt(sum(l2_norm(p - q) ** 2 for p, q in zip(a, b)))
    den = np.sqrt(sum(l2_norm(p) ** 2 for p in a))
    return num / max(den, 1e-300)


@dataclass
class DiagnosticsSeries:
    """Per-sample verification series of one run."""

    times: np.ndarray
    triple: np.ndarray
    err_n_h3: np.ndarray
    err_u_h3: np.ndarray
    err_t_h3: np.ndarray
    mass_drift: np.ndarray
    pot_residual: np.ndarray
    cont_residual: np.ndarray
    c_tilde: float | None = None
    crossed_at: float | None = None
    bohm_split_max: float | None = None

    @property
    def err_joint_h3(self):
        return np.sqrt(self.err_n_h3**2 + self.err_u_h3**2 + self.err_t_h3**2)

    @property
    def max_triple(self):
        return float(np.max(self.triple))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(DIAGNOSTICS_COLUMNS)
            for i, t in enumerate(self.times):
                w.writerow(
                    [
                        repr(float(t)),
                        repr(float(self.triple[i])),
                        repr(float(self.err_n_h3[i])),
                        repr(float(self.err_u_h3[i])),
                        repr(float(self.err_t_h3[i])),
                        repr(float(self.mass_drift[i])),
                        repr(float(self.pot_residual[i])),
                        repr(float(self.cont_residual[i])),
                    ]
                )


def triple_norm_series(rem_series, hbar, c_tilde=None) -> DiagnosticsSeries:
    """Energy-norm time series of a remainder sequence, flagging the first
    crossing of the threshold c_tilde when one is configured."""
    times = np.array([r.t for r in rem_series])
    triple = np.array([triple_norm(r, hbar) for r in rem_series])
    eps = rem_series[0].eps
    N = rem_series[0].order
    scale = eps**N
    err_n = scale * np.array([sobolev_norm(r.n_r, 3.0) for r in rem_series])
    err_u = scale * np.array(
        [np.sqrt(sum(sobolev_norm_sq(c, 3.0) for c in r.u_r)) for r in rem_series]
    )
    err_t = scale * np.array([sobolev_norm(r.t_r, 3.0) for r in rem_series])
    drift = scale * np.array([abs(r.n_r.mean) for r in rem_series])
    crossed = None
    if c_tilde is not None:
        above = np.nonzero(triple > c_tilde)[0]
        if len(above):
            crossed = float(times[above[0]])
    return DiagnosticsSeries(
        times=times,
        triple=triple,
        err_n_h3=err_n,
        err_u_h3=err_u,
        err_t_h3=err_t,
        mass_drift=drift,
        pot_residual=np.zeros_like(times),
        cont_residual=np.full_like(times, np.nan),
        c_tilde=c_tilde,
        crossed_at=crossed,
    )


def run_diagnostics(
    traj: Trajectory, profiles: ProfileSet, c_tilde=None, check_bohm=False
) -> DiagnosticsSeries:
    """Full diagnostics of a trajectory against shared profiles.

    `check_bohm` additionally monitors the dual-route quantum-force split
    at every emitted sample.
    """
    eps = traj.params.eps
    hbar = traj.params.hbar
    N = profiles.order
    rems = [compute_remainders(s, profiles, eps) for s in traj]
    series = triple_norm_series(rems, hbar, c_tilde)
    if check_bohm:
        series.bohm_split_max = max(bohm_dual_agreement(s, hbar) for s in traj)
    phi_tops = [profiles.track(N).scalar_at("phi", s.t) for s in traj]
    series.pot_residual = np.array(
        [potential_residual(r, p, eps) for r, p in zip(rems, phi_tops)]
    )
    series.mass_drift = np.array([abs(s.n.mean - 1.0) for s in traj])
    cont = np.full(len(traj), np.nan)
    if len(rems) >= 3:
        _, res = continuity_residual(rems, profiles, eps)
        cont[1:-1] = res
    series.cont_residual = cont
    return series


@dataclass
class ConservationReport:
    times: np.ndarray
    mass_drift: np.ndarray
    n_min: np.ndarray
    n_max: np.ndarray
    pot_residual: np.ndarray
    corridor: tuple = (0.5, 1.5)

    @property
    def max_drift(self):
        return float(np.max(self.mass_drift))

    @property
    def corridor_violations(self):
        lo, hi = self.corridor
        return [
            float(t)
            for t, a, b in zip(self.times, self.n_min, self.n_max)
            if a <= lo or b >= hi
        ]


def conservation_report(traj: Trajectory, corridor=(0.5, 1.5)) -> ConservationReport:
    """Mass, density-corridor and potential-consistency audit of a run."""
    if len(traj) == 0:
        raise UsageError("empty trajectory")
    times, drift, nmin, nmax, pres = [], [], [], [], []
    for s in traj:
        lo, hi = s.density_range
        times.append(s.t)
        drift.append(abs(s.n.mean - 1.0))
        nmin.append(lo)
        nmax.append(hi)
        pres.append(potential_consistency(s))
    return ConservationReport(
        np.array(times), np.array(drift), np.array(nmin), np.array(nmax),
        np.array(pres), corridor,
    )

"""Fluid state containers and the Poisson coupling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SolvabilityError, UsageError
from .fields import ScalarField, VectorField
from .grid import Grid
from .norms import l2_norm
from .operators import inverse_laplacian, laplacian


def poisson_solve(n: ScalarField, eps) -> ScalarField:
    """Mean-zero potential phi with eps * laplacian(phi) = n - 1.

    The source must have unit mean; the potential's gauge is fixed by
    mean(phi) = 0.
    """
    if abs(n.mean - 1.0) > 1e-12:
        raise SolvabilityError(
            f"poisson_solve needs mean(n) = 1, got {n.mean!r}", mean=n.mean
        )
    rhs = (1.0 / eps) * n.with_mean(0.0)
    return inverse_laplacian(rhs)


def potential_consistency(state) -> float:
    """||eps*lap(phi) - (n-1)|| / max(||n-1||, eps), the Poisson residual."""
    dev = state.n.with_mean(0.0)
    res = state.params_eps * laplacian(state.phi) - dev
    return l2_norm(res) / max(l2_norm(dev), state.params_eps)


@dataclass(frozen=True)
class FluidState:
    """One time slice (n, u, T, phi) of the full system.

    Solver-produced states always carry the derived potential
    (eps*lap(phi) = n-1); states composed from expansion profiles carry the
    profile potential instead, which differs at the first neglected order.
    """

    t: float
    n: ScalarField
    u: VectorField
    T: ScalarField
    phi: ScalarField
    params_eps: float

    def __post_init__(self):
        g = self.grid
        for f in (self.u.grid, self.T.grid, self.phi.grid):
            if not f.compatible(g):
                raise UsageError("state fields live on incompatible grids")
        if abs(self.n.mean - 1.0) > 1e-12:
            raise DomainError(f"mean density must be 1, got {self.n.mean!r}")
        if self.T.mean <= 0:
            raise DomainError(f"mean temperature must be positive, got {self.T.mean!r}")

    @property
    def grid(self) -> Grid:
        return self.n.grid

    @property
    def density_range(self):
        vals = self.n.values
        return float(vals.min()), float(vals.max())

    def is_finite(self):
        return all(
            np.all(np.isfinite(f.coeffs))
            for f in (self.n, *self.u, self.T, self.phi)
        )

    @classmethod
    def build(cls, t, n, u, T, eps, phi=None):
        """Assemble a state, deriving phi from the Poisson coupling if absent."""
        if phi is None:
            phi = poisson_solve(n, eps)
        return cls(t, n, u, T, phi, eps)


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered state samples at uniform cadence."""

    states: tuple
    params: object
    grid: Grid

    def __post_init__(self):
        times = self.times
        if len(times) >= 2:
            gaps = np.diff(times)
            if np.any(gaps <= 0):
                raise UsageError("trajectory times must be strictly increasing")
            if np.max(np.abs(gaps - gaps[0])) > 1e-9 * max(gaps[0], 1e-300):
                raise UsageError("trajectory cadence must be uniform")

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)

    @property
    def final(self):
        return self.states[-1]

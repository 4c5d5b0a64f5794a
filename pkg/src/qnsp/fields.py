"""Scalar and vector fields stored as spectral coefficients.

Coefficients use the numpy ``fftn`` layout, unnormalized.  Fields are
immutable values: every operation returns a new field, so they are safe to
share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .grid import Grid


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField:
    """A real scalar field on a torus, held as complex spectral coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise UsageError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", _frozen(self.coeffs.astype(complex, copy=False)))

    # -- construction ------------------------------------------------------

    @classmethod
    def from_values(cls, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise UsageError(
                f"value shape {values.shape} does not match grid {grid.shape}"
            )
        return cls(grid, np.fft.fftn(values))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def constant(cls, grid, value):
        c = np.zeros(grid.shape, dtype=complex)
        c[(0,) * grid.dim] = value * grid.npoints
        return cls(grid, c)

    # -- views -------------------------------------------------------------

    @property
    def values(self):
        """Physical-space samples (real part of the inverse transform)."""
        return np.fft.ifftn(self.coeffs).real

    @property
    def mean(self):
        return (self.coeffs[(0,) * self.grid.dim] / self.grid.npoints).real

    def conjugate_symmetry_defect(self):
        """Relative magnitude of the imaginary part left by ifftn (0 for real fields)."""
        phys = np.fft.ifftn(self.coeffs)
        scale = np.max(np.abs(phys)) or 1.0
        return np.max(np.abs(phys.imag)) / scale

    # -- arithmetic (linear only; products go through operators.dealiased_product)

    def __add__(self, other):
        self._check(other)
        return ScalarField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return ScalarField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return ScalarField(self.grid, -self.coeffs)

    def __rmul__(self, scalar):
        return ScalarField(self.grid, scalar * self.coeffs)

    def shift_mean(self, delta):
        c = self.coeffs.copy()
        c[(0,) * self.grid.dim] += delta * self.grid.npoints
        return ScalarField(self.grid, c)

    def with_mean(self, value):
        c = self.coeffs.copy()
        c[(0,) * self.grid.dim] = value * self.grid.npoints
        return ScalarField(self.grid, c)

    def _check(self, other):
        if not isinstance(other, ScalarField):
            raise UsageError(f"expected ScalarField, got {type(other).__name__}")
        if not self.grid.compatible(other.grid):
            raise UsageError("fields live on incompatible grids")


@dataclass(frozen=True)
class VectorField:
    """dim scalar components sharing one grid."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise UsageError("vector field needs at least one component")
        g = comps[0].grid
        if len(comps) != g.dim:
            raise UsageError(f"expected {g.dim} components, got {len(comps)}")
        for c in comps:
            if not c.grid.compatible(g):
                raise UsageError("vector components live on incompatible grids")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_values(cls, grid, *value_arrays):
        return cls(tuple(ScalarField.from_values(grid, v) for v in value_arrays))

    @classmethod
    def zeros(cls, grid):
        return cls(tuple(ScalarField.zeros(grid) for _ in range(grid.dim)))

    @property
    def grid(self):
        return self.components[0].grid

    @property
    def dim(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other):
        return VectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return VectorField(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return VectorField(tuple(-a for a in self.components))

    def __rmul__(self, scalar):
        return VectorField(tuple(scalar * a for a in self.components))

    @property
    def values(self):
        """Stacked physical-space samples, shape (dim, *grid.shape)."""
        return np.stack([c.values for c in self.components])

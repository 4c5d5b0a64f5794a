"""Periodic torus grids and their Fourier mode tables.

All fields live on a d-dimensional torus [0, L)^d sampled at n points per
axis.  Spectral coefficients follow the numpy ``fftn`` layout and are kept
unnormalized; norms and means apply the Plancherel weights explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: `dim` axes, `n` points per axis, box length `length`.

    Integer mode numbers run over fftfreq order; physical wavenumbers are
    (2*pi/length) * mode.  The Nyquist mode (-n/2) is tracked explicitly and
    zeroed by every derivative operator; the dealias mask keeps |mode| <= n//3
    per axis (2/3 rule).
    """

    dim: int
    n: int
    length: float = TWO_PI
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2 != 0:
            raise ConfigurationError(
                f"points_per_axis must be an even integer >= 8, got {self.n}"
            )
        if not (self.length > 0):
            raise ConfigurationError(f"box_length must be positive, got {self.length}")

    # -- basic shapes ------------------------------------------------------

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def npoints(self):
        return self.n**self.dim

    @property
    def volume(self):
        return self.length**self.dim

    @property
    def dx(self):
        return self.length / self.n

    @property
    def dealias_cutoff(self):
        """Largest integer mode kept by the 2/3-rule mask."""
        return self.n // 3

    def axes(self):
        """Physical coordinates along one axis (shared by all axes)."""
        return np.arange(self.n) * self.dx

    def meshgrid(self):
        """Physical coordinate arrays, one per axis, each of full shape."""
        x = self.axes()
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    # -- mode tables (cached, treated as immutable) ------------------------

    def _cached(self, key, builder):
        if key not in self._cache:
            arr = builder()
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)
            self._cache[key] = arr
        return self._cache[key]

    def modes_1d(self):
        """Integer mode numbers along one axis in fftfreq order."""
        return self._cached(
            "modes_1d", lambda: np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        )

    def mode_axis(self, axis):
        """Integer modes along `axis`, broadcast to rank-`dim` shape."""
        def build():
            m = self.modes_1d().astype(float)
            shape = [1] * self.dim
            shape[axis] = self.n
            return m.reshape(shape)

        return self._cached(("mode_axis", axis), build)

    def ik(self, axis):
        """Derivative symbol i*k along `axis`, Nyquist mode zeroed."""
        def build():
            m = self.modes_1d().astype(float).copy()
            m[self.n // 2] = 0.0  # Nyquist: odd-derivative symbol is ambiguous
            k = (TWO_PI / self.length) * m
            shape = [1] * self.dim
            shape[axis] = self.n
            return (1j * k).reshape(shape)

        return self._cached(("ik", axis), build)

    def k_squared(self):
        """|k|^2 with the Nyquist modes zeroed, full broadcast shape."""
        def build():
            out = np.zeros(self.shape)
            for ax in range(self.dim):
                out = out + np.abs(self.ik(ax)) ** 2
            return out

        return self._cached("k2", build)

    def k_squared_full(self):
        """|k|^2 over all modes including Nyquist (used by norms)."""
        def build():
            out = np.zeros(self.shape)
            scale = TWO_PI / self.length
            for ax in range(self.dim):
                m = self.modes_1d().astype(float)
                shape = [1] * self.dim
                shape[ax] = self.n
                out = out + (scale * m.reshape(shape)) ** 2
            return out

        return self._cached("k2_full", build)

    def dealias_mask(self):
        """Boolean 2/3-rule mask: True where |mode| <= n//3 on every axis."""
        def build():
            cut = self.dealias_cutoff
            mask = np.ones(self.shape, dtype=bool)
            for ax in range(self.dim):
                m = self.modes_1d()
                shape = [1] * self.dim
                shape[ax] = self.n
                mask = mask & (np.abs(m.reshape(shape)) <= cut)
            return mask

        return self._cached("dealias", build)

    def compatible(self, other):
        return (
            self.dim == other.dim
            and self.n == other.n
            and math.isclose(self.length, other.length, rel_tol=1e-14)
        )


def make_grid(dim, points_per_axis, box_length=TWO_PI):
    """Build a Grid; rejects odd or too-small point counts."""
    return Grid(dim, points_per_axis, box_length)

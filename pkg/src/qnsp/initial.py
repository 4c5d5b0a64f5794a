"""Initial-data constructors used by the harness and tests."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .fields import ScalarField, VectorField
from .grid import Grid


def taylor_green_velocity(grid: Grid, amplitude=1.0) -> VectorField:
    """Divergence-free Taylor-Green vortex, the standard verification flow.

    2-D: a (sin x cos y, -cos x sin y); 3-D: a (sin x cos y cos z,
    -cos x sin y cos z, 0), with coordinates scaled to the box.
    """
    if grid.dim == 1:
        raise ConfigurationError("Taylor-Green data needs dim >= 2")
    scale = 2.0 * np.pi / grid.length
    xs = [scale * x for x in grid.meshgrid()]
    if grid.dim == 2:
        x, y = xs
        return VectorField.from_values(
            grid,
            amplitude * np.sin(x) * np.cos(y),
            -amplitude * np.cos(x) * np.sin(y),
        )
    x, y, z = xs
    return VectorField.from_values(
        grid,
        amplitude * np.sin(x) * np.cos(y) * np.cos(z),
        -amplitude * np.cos(x) * np.sin(y) * np.cos(z),
        np.zeros(grid.shape),
    )


def random_smooth_scalar(grid: Grid, rng, kmax=6, decay=2.0, mean=0.0, amplitude=1.0):
    """Band-limited random field with Gaussian spectral decay, max-norm `amplitude`."""
    spec = np.zeros(grid.shape, dtype=complex)
    mods = [grid.mode_axis(ax) for ax in range(grid.dim)]
    kk = sum(m**2 for m in mods)
    band = (kk <= kmax**2) & (kk > 0)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spec[band] = noise[band] * np.exp(-kk[band] / (2.0 * decay**2))
    vals = np.fft.ifftn(spec).real
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals = vals * (amplitude / peak)
    return ScalarField.from_values(grid, vals + mean)


def random_smooth_vector(grid: Grid, rng, kmax=6, decay=2.0, amplitude=1.0):
    return VectorField(
        tuple(
            random_smooth_scalar(grid, rng, kmax, decay, 0.0, amplitude)
            for _ in range(grid.dim)
        )
    )

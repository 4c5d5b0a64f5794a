import numpy as np
import pytest

from qnsp.fields import ScalarField
from qnsp.grid import make_grid
from qnsp.initial import random_smooth_scalar

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def grid2d():
    return make_grid(2, 64)


@pytest.fixture
def grid1d():
    return make_grid(1, 64)


def smooth_scalar(grid, rng, kmax=6, mean=0.0, amplitude=1.0):
    return random_smooth_scalar(grid, rng, kmax=kmax, mean=mean, amplitude=amplitude)


def rel_l2(a, b):
    """Relative L2 distance between two value arrays."""
    denom = np.linalg.norm(b)
    return np.linalg.norm(a - b) / (denom if denom > 0 else 1.0)


def fd_derivative_6(values, axis, dx):
    """6th-order centered first derivative on periodic samples."""
    c = (-1.0 / 60, 3.0 / 20, -3.0 / 4, 3.0 / 4, -3.0 / 20, 1.0 / 60)
    shifts = (3, 2, 1, -1, -2, -3)
    out = np.zeros_like(values)
    for coef, sh in zip(c, shifts):
        out += coef * np.roll(values, sh, axis=axis)
    return out / dx


def refine_values(field: ScalarField, factor):
    """Spectrally interpolate a band-limited field onto a `factor`x finer grid."""
    g = field.grid
    n, dim = g.n, g.dim
    fine_n = factor * n
    spec = np.fft.fftshift(field.coeffs)
    pad = (fine_n - n) // 2
    widths = [(pad, pad)] * dim
    fine = np.fft.ifftshift(np.pad(spec, widths))
    return np.fft.ifftn(fine).real * factor**dim

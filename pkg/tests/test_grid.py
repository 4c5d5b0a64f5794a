import numpy as np
import pytest

from qnsp.errors import ConfigurationError
from qnsp.grid import make_grid


def test_dealias_cutoff_64():
    g = make_grid(2, 64)
    assert g.dealias_cutoff == 21  # 2/3 of the Nyquist mode 32
    mask = g.dealias_mask()
    m = g.modes_1d()
    kept = np.abs(m) <= 21
    assert np.array_equal(mask, kept[:, None] & kept[None, :])


def test_smallest_legal_grid_modes():
    g = make_grid(1, 8)
    assert list(g.modes_1d()) == [0, 1, 2, 3, -4, -3, -2, -1]
    # Nyquist (-4) carries a zero derivative symbol
    ik = g.ik(0).ravel()
    assert ik[4] == 0.0
    assert ik[1] == 1j


def test_odd_size_rejected():
    with pytest.raises(ConfigurationError):
        make_grid(3, 7)


@pytest.mark.parametrize("n", [6, 4, 2, 9])
def test_small_or_odd_rejected(n):
    with pytest.raises(ConfigurationError):
        make_grid(2, n)


def test_bad_dim_rejected():
    with pytest.raises(ConfigurationError):
        make_grid(4, 16)


def test_wavenumber_scaling_with_box_length():
    g = make_grid(1, 16, box_length=4.0)
    # physical wavenumber of mode 1 is 2*pi/L
    assert np.isclose(g.ik(0).ravel()[1].imag, 2 * np.pi / 4.0)


def test_grid_geometry():
    g = make_grid(2, 16, box_length=2 * np.pi)
    assert g.shape == (16, 16)
    assert np.isclose(g.volume, (2 * np.pi) ** 2)
    assert np.isclose(g.dx, 2 * np.pi / 16)
    x, y = g.meshgrid()
    assert x.shape == (16, 16)
    assert np.isclose(x[3, 0], 3 * g.dx)
    assert np.isclose(y[0, 3], 3 * g.dx)

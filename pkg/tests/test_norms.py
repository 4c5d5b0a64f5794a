import numpy as np
import pytest

from qnsp.errors import UsageError
from qnsp.fields import ScalarField, VectorField
from qnsp.grid import make_grid
from qnsp.norms import NormSpec, h3_group_norm, sobolev_norm, triple_norm

from conftest import smooth_scalar


class Rem:
    """Minimal remainder quadruple for norm tests."""

    def __init__(self, n_r, u_r, t_r, phi_big_r):
        self.n_r, self.u_r, self.t_r, self.phi_big_r = n_r, u_r, t_r, phi_big_r


def zero_rem(grid):
    z = ScalarField.zeros(grid)
    return Rem(z, VectorField.zeros(grid), z, z)


def test_constant_field_l2(grid2d):
    f = ScalarField.constant(grid2d, -2.5)
    # |c| * sqrt(box volume)
    assert sobolev_norm(f, 0.0) == pytest.approx(2.5 * 2 * np.pi, rel=1e-14)


def test_single_mode_h1(grid1d):
    x = grid1d.meshgrid()[0]
    f = ScalarField.from_values(grid1d, np.sin(x))
    # one mode pair at |k|=1: ((1+1) * pi)^(1/2)
    assert sobolev_norm(f, 1.0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-13)
    assert sobolev_norm(f, 0.0) == pytest.approx(np.sqrt(np.pi), rel=1e-13)


def test_sobolev_termwise_oracle(rng, grid2d):
    # (1+|k|^2)^2 = 1 + 2|k|^2 + |k|^4 termwise:
    # ||f||_2^2 = ||f||^2 + 2||grad f||^2 + ||lap f||^2
    from qnsp.operators import grad, laplacian

    f = smooth_scalar(grid2d, rng, kmax=10)
    lhs = sobolev_norm(f, 2.0) ** 2
    gf = grad(f)
    rhs = (
        sobolev_norm(f, 0.0) ** 2
        + 2.0 * sum(sobolev_norm(c, 0.0) ** 2 for c in gf)
        + sobolev_norm(laplacian(f), 0.0) ** 2
    )
    assert abs(lhs - rhs) <= 1e-10 * rhs


def test_sobolev_monotone_in_s(rng, grid2d):
    f = smooth_scalar(grid2d, rng)
    values = [sobolev_norm(f, s) for s in (0.0, 0.5, 1.0, 2.0, 3.0)]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def test_negative_s_rejected(grid2d, rng):
    with pytest.raises(UsageError):
        sobolev_norm(smooth_scalar(grid2d, rng), -1.0)
    with pytest.raises(UsageError):
        NormSpec(s=-2.0)


def test_triple_norm_zero(grid2d):
    assert triple_norm(zero_rem(grid2d), 1.0) == 0.0


def test_triple_norm_hbar_zero_is_h3_group(rng, grid2d):
    from qnsp.operators import grad

    n_r = smooth_scalar(grid2d, rng)
    u_r = VectorField((smooth_scalar(grid2d, rng), smooth_scalar(grid2d, rng)))
    t_r = smooth_scalar(grid2d, rng)
    phi = smooth_scalar(grid2d, rng)
    rem = Rem(n_r, u_r, t_r, phi)
    expect = h3_group_norm(n_r, u_r, t_r, grad(phi))
    assert triple_norm(rem, 0.0) == pytest.approx(expect, rel=1e-14)


def test_triple_norm_single_mode_closed_form():
    # N_R = sin(x) on the unit 1-D torus, everything else zero, hbar = 1.
    # Hand expansion of the mode sum at |k| = 1 with weight (1+|k|^2)^3 = 8:
    #   ||N_R||_{H3}^2         = 8 * pi
    #   ||h grad N_R||_{H3}^2  = 8 * pi      (cos x, same single pair)
    #   ||h^2 lap N_R||_{H3}^2 = 8 * pi      (-sin x)
    # all other members vanish, so the norm is sqrt(24 pi).
    g = make_grid(1, 64)
    x = g.meshgrid()[0]
    n_r = ScalarField.from_values(g, np.sin(x))
    rem = Rem(n_r, VectorField.zeros(g), ScalarField.zeros(g), ScalarField.zeros(g))
    assert triple_norm(rem, 1.0) == pytest.approx(np.sqrt(24 * np.pi), rel=1e-13)


def test_triple_norm_scaling(rng, grid2d):
    n_r = smooth_scalar(grid2d, rng)
    u_r = VectorField((smooth_scalar(grid2d, rng), smooth_scalar(grid2d, rng)))
    t_r = smooth_scalar(grid2d, rng)
    phi = smooth_scalar(grid2d, rng)
    rem = Rem(n_r, u_r, t_r, phi)
    scaled = Rem(-3.0 * n_r, -3.0 * u_r, -3.0 * t_r, -3.0 * phi)
    assert triple_norm(scaled, 0.05) == pytest.approx(3.0 * triple_norm(rem, 0.05), rel=1e-13)


def test_triple_norm_negative_hbar_rejected(grid2d):
    with pytest.raises(UsageError):
        triple_norm(zero_rem(grid2d), -0.1)

"""Sobolev norms and the hbar-weighted energy norm of the remainder system.

H^s uses the Bessel-potential convention: ||f||_s^2 = sum over all modes of
(1 + |k|^2)^s |f_hat(k)|^2, Plancherel-normalized so s=0 is the L^2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .fields import VectorField
from .operators import div, grad, laplacian


@dataclass(frozen=True)
class NormSpec:
    """Sobolev index and Planck constant entering the energy norm."""

    s: float = 3.0
    hbar: float = 0.0

    def __post_init__(self):
        if self.s < 0:
            raise UsageError(f"Sobolev index must be >= 0, got {self.s}")
        if self.hbar < 0:
            raise UsageError(f"hbar must be >= 0, got {self.hbar}")


def sobolev_norm_sq(f, s):
    if s < 0:
        raise UsageError(f"Sobolev index must be >= 0, got {s}")
    if isinstance(f, VectorField):
        return sum(sobolev_norm_sq(c, s) for c in f)
    g = f.grid
    w = (1.0 + g.k_squared_full()) ** s
    total = np.sum(w * np.abs(f.coeffs) ** 2)
    return total * g.volume / g.npoints**2


def sobolev_norm(f, s):
    """H^s norm of a scalar or vector field (group norm over components)."""
    return float(np.sqrt(sobolev_norm_sq(f, s)))


def l2_norm(f):
    return sobolev_norm(f, 0.0)


def h3_group_norm(*fields):
    """sqrt of the summed squared H^3 norms of the given fields."""
    return float(np.sqrt(sum(sobolev_norm_sq(f, 3.0) for f in fields)))


def triple_norm(rem, hbar):
    """Energy norm of a remainder quadruple.

    Square root of

        ||(N_R, U_R, T_R, grad Phi_R)||_{H3}^2
      + ||(h grad N_R, h grad U_R, h div U_R, h lap Phi_R)||_{H3}^2
      + ||h^2 lap N_R||_{H3}^2

    with h = hbar.  The hbar groups share the code path, so hbar = 0 reduces
    exactly to the plain H^3 group norm of the first block.

    `rem` needs attributes n_r (scalar), u_r (vector), t_r (scalar),
    phi_big_r (scalar).
    """
    if hbar < 0:
        raise UsageError(f"hbar must be >= 0, got {hbar}")
    n_r, u_r, t_r, phi_r = rem.n_r, rem.u_r, rem.t_r, rem.phi_big_r
    total = sobolev_norm_sq(n_r, 3.0)
    total += sobolev_norm_sq(u_r, 3.0)
    total += sobolev_norm_sq(t_r, 3.0)
    total += sobolev_norm_sq(grad(phi_r), 3.0)

    h2 = hbar * hbar
    total += h2 * sobolev_norm_sq(grad(n_r), 3.0)
    total += h2 * sum(sobolev_norm_sq(grad(c), 3.0) for c in u_r)
    total += h2 * sobolev_norm_sq(div(u_r), 3.0)
    total += h2 * sobolev_norm_sq(laplacian(phi_r), 3.0)

    total += h2 * h2 * sobolev_norm_sq(laplacian(n_r), 3.0)
    return float(np.sqrt(total))

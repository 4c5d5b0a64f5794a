"""Spectral calculus on torus fields.

Derivatives are exact Fourier-symbol multiplications with the Nyquist modes
zeroed.  Every nonlinear pointwise operation (products, quotients, log) is
evaluated on the 2/3-dealiased grid: inputs are masked, the operation runs in
physical space, and the result is masked again.  Cubic and higher
nonlinearities are built from nested binary operations.
"""

from __future__ import annotations

import numpy as np

from .errors import SolvabilityError, UsageError
from .fields import ScalarField, VectorField


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

def grad(f: ScalarField) -> VectorField:
    g = f.grid
    return VectorField(tuple(ScalarField(g, g.ik(ax) * f.coeffs) for ax in range(g.dim)))


def div(v: VectorField) -> ScalarField:
    g = v.grid
    out = np.zeros(g.shape, dtype=complex)
    for ax, comp in enumerate(v):
        out += g.ik(ax) * comp.coeffs
    return ScalarField(g, out)


def laplacian(f):
    if isinstance(f, VectorField):
        return VectorField(tuple(laplacian(c) for c in f))
    g = f.grid
    return ScalarField(g, -g.k_squared() * f.coeffs)


def hessian(f: ScalarField):
    """All second partials of a scalar as a dim x dim tuple of ScalarFields."""
    g = f.grid
    rows = []
    for i in range(g.dim):
        row = []
        for j in range(g.dim):
            row.append(ScalarField(g, g.ik(i) * g.ik(j) * f.coeffs))
        rows.append(tuple(row))
    return tuple(rows)


def grad_laplacian(f: ScalarField) -> VectorField:
    return grad(laplacian(f))


_KINDS = {
    "grad": (ScalarField, grad),
    "div": (VectorField, div),
    "laplacian": ((ScalarField, VectorField), laplacian),
    "hessian": (ScalarField, hessian),
    "grad_laplacian": (ScalarField, grad_laplacian),
}


def differentiate(f, kind):
    """Dispatch derivative by name; rejects rank mismatches."""
    try:
        want, fn = _KINDS[kind]
    except KeyError:
        raise UsageError(f"unknown derivative kind {kind!r}") from None
    if not isinstance(f, want):
        raise UsageError(f"derivative kind {kind!r} does not accept {type(f).__name__}")
    return fn(f)


# ---------------------------------------------------------------------------
# elliptic solves and projection
# ---------------------------------------------------------------------------

def _l2(coeffs, grid):
    return np.linalg.norm(coeffs) * np.sqrt(grid.volume) / grid.npoints


def inverse_laplacian(f: ScalarField) -> ScalarField:
    """Mean-zero g with laplacian(g) = f; rejects sources with non-zero mean."""
    g = f.grid
    norm = _l2(f.coeffs, g)
    if abs(f.mean) > 1e-12 * max(norm, 1e-300):
        raise SolvabilityError(
            f"inverse laplacian needs a mean-zero source, got mean {f.mean:.3e}",
            mean=f.mean,
        )
    k2 = g.k_squared_full()
    inv = np.zeros(g.shape)
    nz = k2 > 0
    inv[nz] = -1.0 / k2[nz]
    out = inv * f.coeffs
    out[(0,) * g.dim] = 0.0
    return ScalarField(g, out)


def leray_project(v: VectorField) -> VectorField:
    """Remove the gradient part: v - grad(inverse_laplacian(div v)).

    Mode-by-mode this is u_hat - k (k.u_hat)/|k|^2; the k=0 (mean) component
    is untouched.  Requires dim >= 2.
    """
    g = v.grid
    if g.dim < 2:
        raise UsageError("Leray projection needs dim >= 2")
    k2 = g.k_squared()
    inv = np.zeros(g.shape)
    nz = k2 > 0
    inv[nz] = 1.0 / k2[nz]
    ks = [g.ik(ax) for ax in range(g.dim)]
    kdotu = np.zeros(g.shape, dtype=complex)
    for ax, comp in enumerate(v):
        kdotu += ks[ax] * comp.coeffs
    # gradient part is -(ik)(ik.u)/|k|^2, so the projection adds (ik)(ik.u)/|k|^2
    phi = inv * kdotu
    comps = []
    for ax, comp in enumerate(v):
        comps.append(ScalarField(g, comp.coeffs + ks[ax] * phi))
    return VectorField(tuple(comps))


# ---------------------------------------------------------------------------
# dealiased pointwise algebra
# ---------------------------------------------------------------------------

def _masked_values(f: ScalarField):
    g = f.grid
    return np.fft.ifftn(np.where(g.dealias_mask(), f.coeffs, 0.0)).real


def dealiased_map(fn, *fields):
    """Apply `fn` pointwise to masked physical values; mask the output."""
    g = fields[0].grid
    for f in fields[1:]:
        if not f.grid.compatible(g):
            raise UsageError("fields live on incompatible grids")
    vals = fn(*[_masked_values(f) for f in fields])
    out = np.where(g.dealias_mask(), np.fft.fftn(vals), 0.0)
    return ScalarField(g, out)


def dealiased_product(f, g):
    """2/3-dealiased pointwise product; accepts scalar*scalar or scalar*vector."""
    if isinstance(f, VectorField) and isinstance(g, ScalarField):
        f, g = g, f
    if isinstance(f, ScalarField) and isinstance(g, VectorField):
        return VectorField(tuple(dealiased_product(f, c) for c in g))
    if not (isinstance(f, ScalarField) and isinstance(g, ScalarField)):
        raise UsageError("dealiased_product expects scalar*scalar or scalar*vector")
    return dealiased_map(np.multiply, f, g)


def dealiased_divide(f, g):
    """Pointwise f/g on the dealiased grid (g must be bounded away from zero)."""
    if isinstance(f, VectorField):
        return VectorField(tuple(dealiased_divide(c, g) for c in f))
    return dealiased_map(np.divide, f, g)


def dot(u: VectorField, v: VectorField) -> ScalarField:
    """Dealiased u . v."""
    out = dealiased_product(u[0], v[0])
    for a, b in zip(u.components[1:], v.components[1:]):
        out = out + dealiased_product(a, b)
    return out


def advect(u: VectorField, f):
    """Dealiased u . grad(f) for scalar or vector f."""
    if isinstance(f, VectorField):
        return VectorField(tuple(advect(u, c) for c in f))
    return dot(u, grad(f))

"""Tendencies of the full quantum Navier-Stokes-Poisson system.

All non-time-derivative terms of the primitive-variable system are moved to
the right-hand side:

    dn/dt = -div(n u)
    du/dt = -u.grad u - grad(nT)/n + bohm + grad(phi)
            + mu*lap(u)/n + (mu+lam)*grad(div u)/n
    dT/dt = -u.grad T - (2/3) T div u + (2/(3n)) div(kappa grad T)
            - (hbar^2/(36 n)) div(n lap u)
            + (2/(3n)) [ (mu/2)|grad u + (grad u)^T|^2 + lam (div u)^2 ]

with eps*lap(phi) = n - 1 re-solved from n before use.  Every product is a
2/3-dealiased binary product; cubic terms are nested binaries.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .fields import ScalarField, VectorField
from .operators import (
    advect,
    dealiased_divide,
    dealiased_map,
    dealiased_product,
    div,
    dot,
    grad,
    hessian,
    laplacian,
)
from .state import poisson_solve


def _check_positive(n: ScalarField):
    lo = float(n.values.min())
    if lo <= 0:
        raise DomainError(f"density must be positive, min(n) = {lo:.6g}")


def bohm_force(n: ScalarField, hbar, form="log_hessian") -> VectorField:
    """Quantum acceleration (1/n) * (hbar^2/12) div{ n grad^2 log n }.

    `form="expanded"` evaluates the same field through the Bohm-potential
    route, (1/(3n)) * (hbar^2/4) [ lap grad n - (lap n grad n
    + grad^2 n . grad n)/n + (grad n . grad n) grad n / n^2 ]; the two forms
    agree analytically and serve as a mutual cross-check.
    """
    g = n.grid
    if hbar == 0.0:
        return VectorField.zeros(g)
    _check_positive(n)

    if form == "log_hessian":
        logn = dealiased_map(np.log, n)
        hess = hessian(logn)
        comps = []
        for i in range(g.dim):
            flux = VectorField(tuple(dealiased_product(n, hess[i][j]) for j in range(g.dim)))
            comps.append(div(flux))
        force = VectorField(tuple(comps))
        return (hbar * hbar / 12.0) * dealiased_divide(force, n)

    if form == "expanded":
        gn = grad(n)
        lap_n = laplacian(n)
        hess_n = hessian(n)
        term1 = grad(lap_n)
        # (lap n) grad n + grad^2 n . grad n, divided by n
        comps2 = []
        for i in range(g.dim):
            s = dealiased_product(lap_n, gn[i])
            for j in range(g.dim):
                s = s + dealiased_product(hess_n[i][j], gn[j])
            comps2.append(dealiased_divide(s, n))
        term2 = VectorField(tuple(comps2))
        # (grad n . grad n) grad n / n^2, as nested binaries
        gn2 = dot(gn, gn)
        n2 = dealiased_product(n, n)
        term3 = VectorField(
            tuple(dealiased_divide(dealiased_product(gn2, gn[i]), n2) for i in range(g.dim))
        )
        minus_n_grad_q = (hbar * hbar / 4.0) * (term1 - term2 + term3)
        return dealiased_divide((1.0 / 3.0) * minus_n_grad_q, n)

    raise DomainError(f"unknown bohm form {form!r}")


def strain_invariant(u: VectorField) -> ScalarField:
    """|grad u + (grad u)^T|^2, the Frobenius square of the symmetrized gradient."""
    g = u.grid
    partials = [[grad(u[j])[i] for j in range(g.dim)] for i in range(g.dim)]
    out = ScalarField.zeros(g)
    for i in range(g.dim):
        for j in range(g.dim):
            s = partials[i][j] + partials[j][i]
            out = out + dealiased_product(s, s)
    return out


def qnsp_rhs(state, params, bohm_form="log_hessian"):
    """Tendencies (dn/dt, du/dt, dT/dt); phi is re-derived from n."""
    n, u, T = state.n, state.u, state.T
    _check_positive(n)
    phi = poisson_solve(n, params.eps)

    # continuity
    flux = VectorField(tuple(dealiased_product(n, c) for c in u))
    dn = -1.0 * div(flux)

    # momentum
    du = -1.0 * advect(u, u)
    du = du - dealiased_divide(grad(dealiased_product(n, T)), n)
    if params.hbar != 0.0:
        du = du + bohm_force(n, params.hbar, bohm_form)
    du = du + grad(phi)
    du = du + params.mu * dealiased_divide(laplacian(u), n)
    du = du + (params.mu + params.lam) * dealiased_divide(grad(div(u)), n)

    # temperature
    divu = div(u)
    dT = -1.0 * advect(u, T)
    dT = dT - (2.0 / 3.0) * dealiased_product(T, divu)
    dT = dT + (2.0 * params.kappa / 3.0) * dealiased_divide(laplacian(T), n)
    if params.hbar != 0.0:
        lap_u = laplacian(u)
        qflux = VectorField(tuple(dealiased_product(n, c) for c in lap_u))
        dT = dT - (params.hbar**2 / 36.0) * dealiased_divide(div(qflux), n)
    heating = (params.mu / 2.0) * strain_invariant(u)
    if params.lam != 0.0:
        heating = heating + params.lam * dealiased_product(divu, divu)
    dT = dT + (2.0 / 3.0) * dealiased_divide(heating, n)

    return dn, du, dT

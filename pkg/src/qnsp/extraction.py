"""Taylor-coefficient extraction from samples at small parameter nodes.

Given samples F(e_0), ..., F(e_{m-1}) of a smooth (array-valued) function at
distinct nodes, the degree-(m-1) Newton interpolant is expanded into monomial
coefficients; coefficient k approximates the k-th Taylor coefficient of F at
0 with error O(span^{m-k} * max|F^(m)|/m!).  Exact (to rounding) whenever F
is a polynomial of degree < m.
"""

from __future__ import annotations

import numpy as np

from .errors import ExtractionError


def default_nodes(k, eps0=1e-2, extra=3):
    """Geometric node ladder eps0 * 2^-j with m = k + extra points."""
    m = k + extra
    return eps0 * 0.5 ** np.arange(m)


def _divided_differences(values, nodes):
    """Newton divided-difference coefficients f[e_0..e_j]."""
    m = len(nodes)
    table = list(values)
    coeffs = [table[0]]
    for level in range(1, m):
        new = []
        for i in range(m - level):
            num = table[i + 1] - table[i]
            den = nodes[i + level] - nodes[i]
            new.append(num / den)
        table = new
        coeffs.append(table[0])
    return coeffs


def _monomial_from_newton(newton_coeffs, nodes):
    """Expand Newton-form coefficients into monomial coefficients (low->high)."""
    m = len(newton_coeffs)
    poly = [np.zeros_like(newton_coeffs[0]) for _ in range(m)]
    basis = np.zeros(m)
    basis[0] = 1.0  # coefficients of Pi_{i<j} (x - e_i)
    for j in range(m):
        for p in range(j + 1):
            poly[p] = poly[p] + newton_coeffs[j] * basis[p]
        if j < m - 1:
            new = np.zeros(m)
            new[1 : j + 2] = basis[: j + 1]
            new[: j + 1] -= nodes[j] * basis[: j + 1]
            basis = new
    return poly


def coefficient_weights(nodes, k):
    """Weights w_j with sum_j w_j F(e_j) = monomial coefficient k of the interpolant."""
    m = len(nodes)
    weights = []
    for j in range(m):
        ind = [np.array(1.0 if i == j else 0.0) for i in range(m)]
        newtons = _divided_differences(ind, nodes)
        weights.append(float(_monomial_from_newton(newtons, nodes)[k]))
    return np.array(weights)


def taylor_coefficient(values, nodes, k, condition_limit=1e13):
    """k-th Taylor coefficient of an array-valued function from node samples.

    Returns (coefficient, condition) where `condition` is the rounding
    amplification sum |w_j|.  Raises ExtractionError for degenerate node sets
    or when the amplification exceeds `condition_limit`.
    """
    nodes = np.asarray(nodes, dtype=float)
    m = len(nodes)
    if len(values) != m:
        raise ExtractionError(f"{len(values)} samples for {m} nodes")
    if k >= m:
        raise ExtractionError(f"need more than {k} nodes to extract coefficient {k}")
    span = float(np.ptp(nodes))
    if span == 0.0:
        raise ExtractionError("nodes are all identical")
    gaps = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(m) * span
    if gaps.min() < 1e-13 * span:
        raise ExtractionError(f"nearly coincident nodes (min gap {gaps.min():.3e})")

    weights = coefficient_weights(nodes, k)
    condition = float(np.sum(np.abs(weights)))
    if condition > condition_limit:
        raise ExtractionError(
            f"ill-conditioned node set for coefficient {k} "
            f"(amplification {condition:.3e})",
            condition=condition,
        )

    arrays = [np.asarray(v) for v in values]
    newtons = _divided_differences(arrays, nodes)
    coeff = _monomial_from_newton(newtons, nodes)[k]
    return coeff, condition

"""Radial collocation grid on (0, 1] and the operators built on it.

Nodes are the Chebyshev-Lobatto points mapped to [0, 1] with the axis node
removed, so every factor 1/r and 1/r^2 is finite at the nodes. Values at the
axis are reached through the barycentric interpolant (see ``axis_row``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DiscretizationError

MIN_POINTS = 8
ULP_REPAIR_MAX = 128


@dataclass(frozen=True, eq=False)
class RadialOperators:
    n_points: int
    nodes: np.ndarray
    weights: np.ndarray  # barycentric weights of the interpolant
    d1: np.ndarray
    d2: np.ndarray
    l_op: np.ndarray
    quad_r: np.ndarray
    quad_inv_r: np.ndarray
    quad_dr: np.ndarray
    axis_row: np.ndarray  # evaluates the interpolant at r = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def l2_op(self) -> np.ndarray:
        """Matrix of L applied twice; cached since every stream solve needs it."""
        if "l2" not in self._cache:
            self._cache["l2"] = self.l_op @ self.l_op
        return self._cache["l2"]

    def interp_matrix(self, targets) -> np.ndarray:
        return barycentric_matrix(self.nodes, self.weights, np.atleast_1d(targets))

    def interpolate(self, values, targets) -> np.ndarray:
        return self.interp_matrix(targets) @ np.asarray(values)


def _chebyshev_moments(n: int) -> np.ndarray:
    """Integrals of T_k over [-1, 1] for k < n."""
    k = np.arange(n)
    mom = np.zeros(n)
    even = k % 2 == 0
    mom[even] = 2.0 / (1.0 - k[even] ** 2)
    return mom


def barycentric_matrix(nodes, weights, targets) -> np.ndarray:
    """Rows evaluating the barycentric interpolant through ``nodes`` at ``targets``."""
    diff = targets[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = weights[None, :] / diff
    mat = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if hit.any():
        mat[hit] = exact[hit].astype(float)
    return mat


def _diff_matrices(x: np.ndarray, w: np.ndarray):
    n = len(x)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    d1 = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(d1, 0.0)
    np.fill_diagonal(d1, -d1.sum(axis=1))
    # Welfert's recursion for the second derivative avoids forming d1 @ d1
    d2 = 2.0 * d1 * (np.diag(d1)[:, None] - 1.0 / dx)
    np.fill_diagonal(d2, 0.0)
    np.fill_diagonal(d2, -d2.sum(axis=1))
    assert d1.shape == (n, n)
    return d1, d2


def _pin_null_vector(mat: np.ndarray, vec: np.ndarray, tol: float = 1e-11, span: int = 64) -> None:
    """Nudge entries by a few ulps so that ``mat @ vec`` rounds to ~0 row by row.

    The diagonal correction leaves a residue at the level of the ulp of the
    partial sums; moving the largest term of an offending row by a handful of
    ulps lets the final addition cancel. Changes are O(1e-15) relative.
    """
    res = mat @ vec
    for i in np.flatnonzero(np.abs(res) > tol):
        terms = np.abs(mat[i] * vec)
        best_val, best_j, best_entry = abs(res[i]), None, None
        for j in np.argsort(-terms)[:4]:
            base = mat[i, j]
            step = np.spacing(base)
            for k in range(-span, span + 1):
                mat[i, j] = base + k * step
                val = abs((mat @ vec)[i])
                if val < best_val:
                    best_val, best_j, best_entry = val, j, mat[i, j]
            mat[i, j] = base
            if best_val <= tol:
                break
        if best_j is not None:
            mat[i, best_j] = best_entry


@lru_cache(maxsize=32)
def build_radial_operators(n_points: int) -> RadialOperators:
    """Build the collocation operators on ``n_points`` nodes in (0, 1]."""
    if not isinstance(n_points, (int, np.integer)) or n_points < MIN_POINTS:
        raise DiscretizationError(
            f"n_points must be an integer >= {MIN_POINTS}, got {n_points!r}"
        )
    n = int(n_points)
    j = np.arange(n + 1)
    # Lobatto points on [0, 1]; sin form keeps the small radii accurate
    full = np.sin(np.pi * (2 * j - n) / (2 * n)) * 0.5 + 0.5
    full[0] = 0.0
    full[-1] = 1.0
    w_full = (-1.0) ** j
    w_full[0] = 0.5
    w_full[-1] *= 0.5
    nodes = full[1:].copy()
    # dropping the axis node multiplies every remaining weight by (x_j - 0)
    weights = w_full[1:] * nodes
    weights /= np.abs(weights).max()

    d1, d2 = _diff_matrices(nodes, weights)
    inv_r = 1.0 / nodes
    l_op = d2 + inv_r[:, None] * d1 - np.diag(inv_r**2)
    # L r = 0 exactly; absorb the rounding residue into the diagonal
    l_op[np.diag_indices(n)] -= (l_op @ nodes) * inv_r
    if n <= ULP_REPAIR_MAX:
        _pin_null_vector(l_op, nodes)

    # interpolatory rule for plain dr, built from Chebyshev moments
    x = 2.0 * nodes - 1.0
    vander = np.polynomial.chebyshev.chebvander(x, n - 1)
    quad_dr = np.linalg.solve(vander.T, _chebyshev_moments(n)) * 0.5

    axis_row = barycentric_matrix(nodes, weights, np.array([0.0]))[0]
    return RadialOperators(
        n_points=n,
        nodes=nodes,
        weights=weights,
        d1=d1,
        d2=d2,
        l_op=l_op,
        quad_r=quad_dr * nodes,
        quad_inv_r=quad_dr / nodes,
        quad_dr=quad_dr,
        axis_row=axis_row,
    )


def quad_r(ops: RadialOperators, f):
    """Integral of f(r) r dr over (0, 1) from nodal samples."""
    return ops.quad_r @ np.asarray(f)


def quad_inv_r(ops: RadialOperators, f):
    """Integral of f(r) / r dr over (0, 1).

    Only meaningful when f vanishes at least linearly at the axis; the rule is
    exact when f / r is a polynomial of degree below ``n_points``.
    """
    return ops.quad_inv_r @ np.asarray(f)


def resolution_for(beta: float, minimum: int = 48) -> int:
    """Grid size resolving a wall layer of width beta**-1/2 with 8 points per e-fold."""
    if beta <= 0.0:
        return minimum
    return max(minimum, 8 * math.ceil(4.0 * beta**0.25))


def chebyshev_lobatto(n_points: int, a: float = 0.0, b: float = 1.0):
    """Lobatto nodes on [a, b] (increasing) with first and second derivative matrices."""
    if n_points < 3:
        raise DiscretizationError("need at least 3 Lobatto points")
    m = n_points - 1
    j = np.arange(n_points)
    x = np.sin(np.pi * (2 * j - m) / (2 * m)) * 0.5 + 0.5
    w = (-1.0) ** j
    w[0] *= 0.5
    w[-1] *= 0.5
    d1, d2 = _diff_matrices(x, w)
    h = b - a
    return a + h * x, d1 / h, d2 / h**2

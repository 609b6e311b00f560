"""Per-mode Sobolev-type norms of axisymmetric velocity fields.

For a mode e^{i xi z} with radial samples (v^r, v^theta, v^z), with r dr as the
measure:

    L2^2 = sum_c int |v_c|^2 r
    H1^2 = L2^2 + sum_c [int |v_c'|^2 r + xi^2 int |v_c|^2 r] + int (|v^r|^2 + |v^theta|^2) / r
    H2^2 = H1^2 + sum_c int |Delta_c v_c|^2 r

where Delta_c = d^2/dr^2 + (1/r) d/dr - xi^2, minus 1/r^2 for the r and theta
components. The fractional norms are geometric interpolants per mode,
H^{5/4} = H1^{3/4} H2^{1/4} and H^{1/4} = L2^{3/4} H1^{1/4}, summed in
quadrature over modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radial import RadialOperators


@dataclass(frozen=True)
class ModeNorms:
    l2_sq: float
    h1_sq: float
    h2_sq: float

    @property
    def h54_sq(self) -> float:
        return self.h1_sq**0.75 * self.h2_sq**0.25

    @property
    def h14_sq(self) -> float:
        return self.l2_sq**0.75 * self.h1_sq**0.25

    def as_dict(self) -> dict:
        return {
            "l2": math.sqrt(self.l2_sq),
            "h1": math.sqrt(self.h1_sq),
            "h2": math.sqrt(self.h2_sq),
            "h54": math.sqrt(self.h54_sq),
            "h14": math.sqrt(self.h14_sq),
        }


def _component_terms(v, xi, ops: RadialOperators, vector_like: bool):
    v = np.asarray(v, dtype=complex)
    r = ops.nodes
    abs2 = np.abs(v) ** 2
    dv = ops.d1 @ v
    l2 = float(ops.quad_r @ abs2)
    grad = float(ops.quad_r @ np.abs(dv) ** 2) + xi * xi * l2
    lap = ops.d2 @ v + dv / r - xi * xi * v
    if vector_like:
        grad += float(ops.quad_inv_r @ abs2)
        lap = lap - v / r**2
    return l2, grad, float(ops.quad_r @ np.abs(lap) ** 2)


def mode_norms(v_r, v_theta, v_z, xi: float, ops: RadialOperators) -> ModeNorms:
    l2 = grad = lap = 0.0
    for comp, vector_like in ((v_r, True), (v_theta, True), (v_z, False)):
        if comp is None:
            continue
        a, b, c = _component_terms(comp, xi, ops, vector_like)
        l2 += a
        grad += b
        lap += c
    return ModeNorms(l2_sq=l2, h1_sq=l2 + grad, h2_sq=l2 + grad + lap)


def combine(mode_list, weight: float = 1.0) -> dict:
    """Quadrature sum of per-mode norms, each square scaled by ``weight``."""
    keys = ("l2_sq", "h1_sq", "h2_sq", "h54_sq", "h14_sq")
    totals = dict.fromkeys(keys, 0.0)
    for m in mode_list:
        for key in keys:
            totals[key] += getattr(m, key)
    return {key[:-3]: math.sqrt(weight * totals[key]) for key in keys}

"""Azimuthal (swirl) component of the linearized problem.

Per frequency: i xi U v - (L - xi^2) v = F with v(0) = 0 and
v'(1) = (1 - alpha) v(1). At xi = 0, alpha = 0 the operator has the
rigid-rotation kernel v = r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base_flow import PoiseuilleProfile
from .errors import SolverError
from .radial import RadialOperators


@dataclass(frozen=True, eq=False)
class SwirlSolution:
    xi: float
    alpha: float
    v_theta_hat: np.ndarray
    ops: RadialOperators = field(repr=False)
    norm_report: dict = field(default_factory=dict)
    residual: float = 0.0

    @property
    def boundary_trace(self) -> complex:
        return complex(self.v_theta_hat[-1])


def assemble_swirl_operator(xi: float, profile: PoiseuilleProfile, ops: RadialOperators, alpha: float) -> np.ndarray:
    n = ops.n_points
    eye = np.eye(n)
    mat = np.asarray(1j * xi * np.diag(profile.u_bar) - (ops.l_op - xi * xi * eye), dtype=complex)
    mat[0] = ops.axis_row
    mat[-1] = ops.d1[-1] - (1.0 - alpha) * eye[-1]
    return mat


def _equilibrate(mat):
    scale = np.abs(mat).max(axis=1)
    scale[scale == 0.0] = 1.0
    return mat / scale[:, None], scale


def swirl_norm_report(v, xi: float, profile: PoiseuilleProfile, ops: RadialOperators) -> dict:
    r = ops.nodes
    rv_p = ops.d1 @ (r * v)
    v_sq = float(ops.quad_r @ np.abs(v) ** 2)
    return {
        "grad_rv_sq": float(ops.quad_inv_r @ np.abs(rv_p) ** 2),
        "xi2_v_sq": xi * xi * v_sq,
        "u_weighted_v_sq": float(ops.quad_r @ (profile.u_bar * np.abs(v) ** 2)),
        "v_sq": v_sq,
        "wall_trace_sq": float(abs(v[-1]) ** 2),
        "dz_v_theta_norm": abs(xi) * math.sqrt(max(v_sq, 0.0)),
    }


def solve_swirl_mode(xi: float, f_theta_hat, profile: PoiseuilleProfile, ops: RadialOperators, alpha: float | None = None) -> SwirlSolution:
    """Solve one frequency of the swirl problem; requires alpha > 0."""
    if alpha is None:
        alpha = profile.params.alpha
    if not alpha > 0.0:
        raise ValueError(
            "the swirl problem needs alpha > 0: at alpha = 0 rigid rotation v = r "
            "solves the homogeneous problem at xi = 0; use nullspace_probe instead"
        )
    xi = float(xi)
    f = np.asarray(f_theta_hat, dtype=complex)
    mat = assemble_swirl_operator(xi, profile, ops, alpha)
    rhs = f.copy()
    rhs[0] = 0.0
    rhs[-1] = 0.0
    a, scale = _equilibrate(mat)
    try:
        v = np.linalg.solve(a, rhs / scale)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"singular swirl operator: {exc}", phi=profile.params.phi, xi=xi, alpha=alpha,
            n_points=ops.n_points, cond=float(np.linalg.cond(a)),
        ) from exc
    res = (mat @ v - rhs)[1:-1]
    size = (np.abs(mat[1:-1]) @ np.abs(v) + np.abs(f[1:-1])).max()
    return SwirlSolution(
        xi=xi,
        alpha=float(alpha),
        v_theta_hat=v,
        ops=ops,
        norm_report=swirl_norm_report(v, xi, profile, ops),
        residual=float(np.abs(res).max() / size) if size > 0 else 0.0,
    )


def swirl_boundary_residuals(sol: SwirlSolution) -> dict:
    ops, v = sol.ops, sol.v_theta_hat
    scale = max(np.abs(v).max(), np.finfo(float).tiny)
    return {
        "axis": abs(ops.axis_row @ v) / scale,
        "robin": abs(ops.d1[-1] @ v - (1.0 - sol.alpha) * v[-1]) / scale,
    }


def swirl_identity_residuals(sol: SwirlSolution, f_theta_hat, profile: PoiseuilleProfile, ops: RadialOperators):
    """Relative gaps in

        int |(r v)'|^2 / r + (alpha - 2)|v(1)|^2 + xi^2 int |v|^2 r = Re int F conj(v) r
        xi int U |v|^2 r = Im int F conj(v) r
    """
    rep = sol.norm_report
    f = np.asarray(f_theta_hat, dtype=complex)
    pair = complex(ops.quad_r @ (f * np.conj(sol.v_theta_hat)))
    terms = [rep["grad_rv_sq"], (sol.alpha - 2.0) * rep["wall_trace_sq"], rep["xi2_v_sq"]]
    real_scale = max([abs(t) for t in terms] + [abs(pair.real)])
    imag_lhs = sol.xi * rep["u_weighted_v_sq"]
    imag_scale = max(abs(imag_lhs), abs(pair.imag))
    real_gap = abs(sum(terms) - pair.real) / real_scale if real_scale > 0 else 0.0
    imag_gap = abs(imag_lhs - pair.imag) / imag_scale if imag_scale > 0 else 0.0
    return float(real_gap), float(imag_gap)


@dataclass(frozen=True, eq=False)
class NullspaceProbe:
    sigma_min: float
    null_vector: np.ndarray
    cosine_with_r: float

    def __float__(self):
        return self.sigma_min


def nullspace_probe(xi: float, alpha: float, profile: PoiseuilleProfile, ops: RadialOperators) -> NullspaceProbe:
    """Smallest singular value of the row-equilibrated homogeneous swirl operator."""
    a, _ = _equilibrate(assemble_swirl_operator(float(xi), profile, ops, float(alpha)))
    _, s, vh = np.linalg.svd(a)
    vec = np.conj(vh[-1])
    r_unit = ops.nodes / np.linalg.norm(ops.nodes)
    cosine = abs(np.vdot(r_unit, vec)) / np.linalg.norm(vec)
    return NullspaceProbe(sigma_min=float(s[-1]), null_vector=vec, cosine_with_r=float(cosine))

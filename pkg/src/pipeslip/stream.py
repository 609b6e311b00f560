"""Per-frequency meridional problem for the stream function.

For a fixed axial frequency xi the stream function solves

    i xi U (L - xi^2) psi - (L - xi^2)^2 psi = f,   f = i xi F^r - (F^z)'

with psi(0) = psi(1) = L psi(0) = 0 and L psi(1) + alpha psi'(1) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base_flow import FlowParams, PoiseuilleProfile, poiseuille_profile
from .errors import SolverError
from .radial import RadialOperators, build_radial_operators

BC_ROWS = (0, 1, -2, -1)


@dataclass(frozen=True, eq=False)
class ModeForcing:
    xi: float
    f_r_hat: np.ndarray
    f_z_hat: np.ndarray
    # analytic d(F^z)/dr samples; when None the collocation derivative is used
    df_z_hat: np.ndarray | None = None

    def __post_init__(self):
        for name in ("f_r_hat", "f_z_hat", "df_z_hat"):
            value = getattr(self, name)
            if value is None:
                continue
            value = np.asarray(value, dtype=complex)
            if not np.all(np.isfinite(value)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "xi", float(self.xi))

    def scalar(self, ops: RadialOperators) -> np.ndarray:
        """The right side f = i xi F^r - (F^z)'."""
        dfz = self.df_z_hat if self.df_z_hat is not None else ops.d1 @ self.f_z_hat
        return 1j * self.xi * self.f_r_hat - dfz

    def l2_norm(self, ops: RadialOperators) -> float:
        """sqrt of int (|F^r|^2 + |F^z|^2) r dr."""
        dens = np.abs(self.f_r_hat) ** 2 + np.abs(self.f_z_hat) ** 2
        return math.sqrt(max(float(ops.quad_r @ dens), 0.0))

    @classmethod
    def zero(cls, xi: float, ops: RadialOperators) -> "ModeForcing":
        z = np.zeros(ops.n_points, dtype=complex)
        return cls(xi, z, z.copy(), z.copy())


@dataclass(frozen=True, eq=False)
class StreamSolution:
    xi: float
    alpha: float
    psi_hat: np.ndarray
    v_r_hat: np.ndarray
    v_z_hat: np.ndarray
    omega_hat: np.ndarray
    ops: RadialOperators = field(repr=False)
    norm_report: dict = field(default_factory=dict)
    residual: float = 0.0

    @property
    def n_points(self) -> int:
        return self.ops.n_points


def assemble_mode_operator(xi: float, profile: PoiseuilleProfile, ops: RadialOperators) -> np.ndarray:
    """Collocation matrix of the mode equation with the four boundary rows in place.

    Rows 0 and 1 carry the axis conditions psi(0) = 0 and L psi(0) = 0, rows
    n-2 and n-1 carry the Robin row and psi(1) = 0. The matrix is returned
    unscaled; ``solve_mode`` equilibrates it.
    """
    n = ops.n_points
    eye = np.eye(n)
    lop = ops.l_op
    xi2 = xi * xi
    shifted = lop - xi2 * eye
    mat = 1j * xi * profile.u_bar[:, None] * shifted - (ops.l2_op - 2.0 * xi2 * lop + xi2 * xi2 * eye)
    mat = np.asarray(mat, dtype=complex)
    alpha = profile.params.alpha
    mat[0] = ops.axis_row
    mat[1] = ops.axis_row @ lop
    mat[-2] = lop[-1] + alpha * ops.d1[-1]
    mat[-1] = eye[-1]
    return mat


def _equilibrated_solve(mat, rhs, *, context):
    scale = np.abs(mat).max(axis=1)
    scale[scale == 0.0] = 1.0
    a = mat / scale[:, None]
    b = rhs / scale
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular mode operator: {exc}", cond=float(np.linalg.cond(a)), **context) from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite mode solution", cond=float(np.linalg.cond(a)), **context)
    return x


def recover_velocity(sol_or_psi, xi: float | None = None, ops: RadialOperators | None = None):
    """Velocity and vorticity samples from a stream function.

    Accepts a StreamSolution or the triple (psi, xi, ops).
    """
    if isinstance(sol_or_psi, StreamSolution):
        psi, xi, ops = sol_or_psi.psi_hat, sol_or_psi.xi, sol_or_psi.ops
    else:
        psi = np.asarray(sol_or_psi, dtype=complex)
    r = ops.nodes
    v_r = 1j * xi * psi
    v_z = -(ops.d1 @ (r * psi)) / r
    omega = ops.l_op @ psi - xi * xi * psi
    return v_r, v_z, omega


def stream_norm_report(psi, xi: float, profile: PoiseuilleProfile, ops: RadialOperators) -> dict:
    r = ops.nodes
    alpha = profile.params.alpha
    lpsi = ops.l_op @ psi
    rpsi_p = ops.d1 @ (r * psi)
    psi_sq = float(ops.quad_r @ np.abs(psi) ** 2)
    grad_sq = float(ops.quad_inv_r @ np.abs(rpsi_p) ** 2)
    l_sq = float(ops.quad_r @ np.abs(lpsi) ** 2)
    xi2 = xi * xi
    report = {
        "l_psi_sq": l_sq,
        "xi2_grad_rpsi_sq": xi2 * grad_sq,
        "xi4_psi_sq": xi2 * xi2 * psi_sq,
        "wall_term": alpha * abs(rpsi_p[-1]) ** 2,
        "psi_sq": psi_sq,
        "grad_rpsi_sq": grad_sq,
        "u_weighted_grad": xi * float(ops.quad_inv_r @ (profile.u_bar * np.abs(rpsi_p) ** 2)),
        "u_weighted_psi": xi**3 * float(ops.quad_r @ (profile.u_bar * np.abs(psi) ** 2)),
        # velocity-level norms used by the scaling harness
        "v_r_norm": abs(xi) * math.sqrt(max(psi_sq, 0.0)),
        "dz_v_z_norm": abs(xi) * math.sqrt(max(grad_sq, 0.0)),
    }
    return report


def solve_mode(forcing: ModeForcing, profile: PoiseuilleProfile, ops: RadialOperators) -> StreamSolution:
    """Solve one frequency of the stream problem."""
    xi = forcing.xi
    params = profile.params
    context = dict(phi=params.phi, xi=xi, alpha=params.alpha, n_points=ops.n_points)
    mat = assemble_mode_operator(xi, profile, ops)
    f = forcing.scalar(ops)
    rhs = f.astype(complex)
    rhs[list(BC_ROWS)] = 0.0
    psi = _equilibrated_solve(mat, rhs, context=context)

    interior = np.ones(ops.n_points, dtype=bool)
    interior[list(BC_ROWS)] = False
    res = (mat @ psi - rhs)[interior]
    # backward error: residual against the size of the terms it balances
    size = (np.abs(mat[interior]) @ np.abs(psi) + np.abs(f[interior])).max()
    residual = float(np.abs(res).max() / size) if size > 0 else 0.0

    v_r, v_z, omega = recover_velocity(psi, xi, ops)
    return StreamSolution(
        xi=xi,
        alpha=params.alpha,
        psi_hat=psi,
        v_r_hat=v_r,
        v_z_hat=v_z,
        omega_hat=omega,
        ops=ops,
        norm_report=stream_norm_report(psi, xi, profile, ops),
        residual=residual,
    )


def boundary_residuals(sol: StreamSolution) -> dict:
    """Residuals of the four conditions, each relative to the size of the terms it involves."""
    ops, psi = sol.ops, sol.psi_hat
    tiny = np.finfo(float).tiny
    lpsi = ops.l_op @ psi
    dpsi = ops.d1 @ psi
    axis_abs = np.abs(ops.axis_row)
    return {
        "psi_axis": abs(ops.axis_row @ psi) / max(axis_abs @ np.abs(psi), tiny),
        "psi_wall": abs(psi[-1]) / max(np.abs(psi).max(), tiny),
        "l_psi_axis": abs(ops.axis_row @ lpsi) / max(axis_abs @ np.abs(lpsi), tiny),
        "robin": abs(lpsi[-1] + sol.alpha * dpsi[-1]) / max(np.abs(lpsi).max() + sol.alpha * np.abs(dpsi).max(), tiny),
    }


def divergence_residual(sol: StreamSolution) -> float:
    """|| dr v^r + v^r / r + i xi v^z || relative to || dr v^r || + || xi v^z ||, norms in L2(r dr)."""
    ops = sol.ops
    r = ops.nodes
    dvr = ops.d1 @ sol.v_r_hat
    div = dvr + sol.v_r_hat / r + 1j * sol.xi * sol.v_z_hat

    def norm(f):
        return math.sqrt(max(float(ops.quad_r @ np.abs(f) ** 2), 0.0))

    scale = norm(dvr) + abs(sol.xi) * norm(sol.v_z_hat)
    return norm(div) / scale if scale > 0 else 0.0


def mode_flux(sol: StreamSolution) -> complex:
    """int v^z r dr; vanishes because psi(1) = 0."""
    return complex(sol.ops.quad_r @ sol.v_z_hat)


def energy_identity_residuals(sol: StreamSolution, forcing: ModeForcing, profile: PoiseuilleProfile, ops: RadialOperators):
    """Relative gaps in the two energy identities of the mode problem.

    Real part:
        int |L psi|^2 r + 2 xi^2 int |(r psi)'|^2 / r + xi^4 int |psi|^2 r
        + alpha |(r psi)'(1)|^2
        = -Re int f conj(psi) r - c xi Im int (r psi)' r conj(psi) dr
    with c = (4 phi / pi) alpha / (4 + alpha).

    Imaginary part:
        xi int (U / r) |(r psi)'|^2 + xi^3 int U |psi|^2 r = -Im int f conj(psi) r.
    """
    psi = sol.psi_hat
    r = ops.nodes
    xi = sol.xi
    rep = sol.norm_report
    f = forcing.scalar(ops)
    rpsi_p = ops.d1 @ (r * psi)
    f_pair = complex(ops.quad_r @ (f * np.conj(psi)))
    coupling = profile.params.shear_coupling * xi * complex(ops.quad_r @ (rpsi_p * np.conj(psi))).imag

    real_terms = [rep["l_psi_sq"], 2.0 * rep["xi2_grad_rpsi_sq"], rep["xi4_psi_sq"], rep["wall_term"]]
    real_lhs = sum(real_terms)
    real_rhs = -f_pair.real - coupling
    real_scale = max([abs(t) for t in real_terms] + [abs(f_pair.real), abs(coupling)])

    imag_lhs = rep["u_weighted_grad"] + rep["u_weighted_psi"]
    imag_rhs = -f_pair.imag
    imag_scale = max(abs(rep["u_weighted_grad"]), abs(rep["u_weighted_psi"]), abs(imag_rhs))

    real_gap = abs(real_lhs - real_rhs) / real_scale if real_scale > 0 else 0.0
    imag_gap = abs(imag_lhs - imag_rhs) / imag_scale if imag_scale > 0 else 0.0
    return float(real_gap), float(imag_gap)


def solve_mode_gated(
    xi: float,
    params: FlowParams,
    forcing_at,
    n_points: int,
    *,
    tol: float = 1e-7,
):
    """Solve on n and 2n points and compare.

    ``forcing_at(ops)`` must return the ModeForcing sampled on ``ops``.
    Returns (solution on n points, relative difference, passed flag).
    """
    ops = build_radial_operators(n_points)
    fine = build_radial_operators(2 * n_points)
    sol = solve_mode(forcing_at(ops), poiseuille_profile(params, ops), ops)
    sol_fine = solve_mode(forcing_at(fine), poiseuille_profile(params, fine), fine)
    on_coarse = fine.interpolate(sol_fine.psi_hat, ops.nodes)
    scale = np.abs(on_coarse).max()
    diff = float(np.abs(sol.psi_hat - on_coarse).max() / scale) if scale > 0 else 0.0
    return sol, diff, diff <= tol

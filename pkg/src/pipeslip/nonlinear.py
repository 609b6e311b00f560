"""Picard iteration for the steady axisymmetric perturbation on a periodic pipe.

The axial direction is truncated to a period L and represented by the modes
k = -K..K with frequencies xi_k = 2 pi k / L. Every iterate is
v_{j+1} = T F + T N(v_j), where T solves the linearized problem mode by mode
and N is the convective nonlinearity evaluated pseudo-spectrally with 3/2
zero padding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Chebyshev

from .base_flow import FlowParams, PoiseuilleProfile, poiseuille_profile
from .norms import combine, mode_norms
from .radial import RadialOperators, build_radial_operators, resolution_for
from .regimes import beta_theta
from .stream import ModeForcing, solve_mode
from .swirl import solve_swirl_mode

R, THETA, Z = 0, 1, 2


@dataclass(eq=False)
class AxisymField:
    """Axisymmetric vector field stored as radial samples of axial Fourier modes.

    ``data[c, m, :]`` holds component c (r, theta, z) of mode k = m - K.
    ``stream`` optionally carries the stream function of the meridional part.
    """

    period_length: float
    data: np.ndarray
    stream: np.ndarray | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 3 or self.data.shape[0] != 3 or self.data.shape[1] % 2 != 1:
            raise ValueError("field data must have shape (3, 2K+1, n_r)")
        if not self.period_length > 0:
            raise ValueError("period_length must be positive")

    @classmethod
    def zeros(cls, period_length: float, n_modes: int, n_points: int) -> "AxisymField":
        return cls(period_length, np.zeros((3, n_modes, n_points), dtype=complex), np.zeros((n_modes, n_points), dtype=complex))

    @property
    def n_modes(self) -> int:
        return self.data.shape[1]

    @property
    def k_max(self) -> int:
        return self.n_modes // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    @property
    def xis(self) -> np.ndarray:
        return 2.0 * math.pi * self.wavenumbers / self.period_length

    def mode(self, k: int) -> np.ndarray:
        return self.data[:, k + self.k_max]

    def symmetry_defect(self) -> float:
        """max |v_{-k} - conj(v_k)|."""
        return float(np.abs(self.data - np.conj(self.data[:, ::-1])).max()) if self.data.size else 0.0

    def symmetrize(self) -> "AxisymField":
        sym = 0.5 * (self.data + np.conj(self.data[:, ::-1]))
        stream = None if self.stream is None else 0.5 * (self.stream + np.conj(self.stream[::-1]))
        return AxisymField(self.period_length, sym, stream)

    def __add__(self, other: "AxisymField") -> "AxisymField":
        stream = None if self.stream is None or other.stream is None else self.stream + other.stream
        return AxisymField(self.period_length, self.data + other.data, stream)

    def __sub__(self, other: "AxisymField") -> "AxisymField":
        stream = None if self.stream is None or other.stream is None else self.stream - other.stream
        return AxisymField(self.period_length, self.data - other.data, stream)

    def scaled(self, factor: float) -> "AxisymField":
        stream = None if self.stream is None else self.stream * factor
        return AxisymField(self.period_length, self.data * factor, stream)

    def norms(self, ops: RadialOperators) -> dict:
        """L2, H1, H2 and interpolated norms over one period cell."""
        modes = [mode_norms(*self.data[:, m], xi, ops) for m, xi in enumerate(self.xis)]
        return combine(modes, weight=2.0 * math.pi * self.period_length)

    def component_l2(self, c: int, ops: RadialOperators, dz: bool = False) -> float:
        vals = self.data[c] * (1j * self.xis[:, None] if dz else 1.0)
        total = float((np.abs(vals) ** 2 @ ops.quad_r).sum())
        return math.sqrt(2.0 * math.pi * self.period_length * total)

    def divergence_defect(self, ops: RadialOperators) -> float:
        r = ops.nodes
        vr, vz = self.data[R], self.data[Z]
        div = vr @ ops.d1.T + vr / r + 1j * self.xis[:, None] * vz
        scale = max(np.abs(vr @ ops.d1.T).max(), np.abs(self.xis[:, None] * vz).max(), np.finfo(float).tiny)
        return float(np.abs(div).max() / scale)

    def mode_zero_flux(self, ops: RadialOperators) -> float:
        return float(abs(ops.quad_r @ self.mode(0)[Z]))

    def to_physical(self, n_z: int | None = None):
        """Real samples on a uniform z grid; returns (z, values with shape (3, n_z, n_r))."""
        n_z = n_z or 2 * self.n_modes
        return _to_physical(self.data, n_z, self.period_length)


def _to_physical(coeffs: np.ndarray, n_z: int, period: float):
    k_max = coeffs.shape[-2] // 2
    buf = np.zeros(coeffs.shape[:-2] + (n_z, coeffs.shape[-1]), dtype=complex)
    buf[..., : k_max + 1, :] = coeffs[..., k_max:, :]
    buf[..., n_z - k_max :, :] = coeffs[..., :k_max, :]
    phys = np.fft.ifft(buf, axis=-2).real * n_z
    z = np.arange(n_z) * period / n_z
    return z, phys


def _to_modes(phys: np.ndarray, k_max: int) -> np.ndarray:
    n_z = phys.shape[-2]
    spec = np.fft.fft(phys, axis=-2) / n_z
    return np.concatenate([spec[..., n_z - k_max :, :], spec[..., : k_max + 1, :]], axis=-2)


def padded_size(k_max: int) -> int:
    """Grid size that resolves products of modes |k| <= K without aliasing (3/2 rule)."""
    return 2 * ((3 * k_max + 2) // 2 + 1)


def nonlinear_terms(v: AxisymField, ops: RadialOperators, *, check_axis: bool = True) -> AxisymField:
    """Convective terms -(v . grad) v in cylindrical form, including the swirl couplings.

    F^r = -(v^r d_r v^r + v^z d_z v^r) + (v^theta)^2 / r
    F^z = -(v^r d_r v^z + v^z d_z v^z)
    F^theta = -(v^r d_r v^theta + v^z d_z v^theta) - v^r v^theta / r
    """
    k_max = v.k_max
    if check_axis:
        for c in (R, THETA):
            axis = np.abs(v.data[c] @ ops.axis_row).max()
            if axis > 1e-8 * max(np.abs(v.data[c]).max(), np.finfo(float).tiny):
                warnings.warn("radial or swirl velocity does not vanish at the axis", RuntimeWarning, stacklevel=2)
    d_r = v.data @ ops.d1.T
    d_z = v.data * (1j * v.xis[None, :, None])
    n_z = padded_size(k_max)
    _, u = _to_physical(v.data, n_z, v.period_length)
    _, ur = _to_physical(d_r, n_z, v.period_length)
    _, uz = _to_physical(d_z, n_z, v.period_length)
    inv_r = 1.0 / ops.nodes
    vr, vt, vz = u
    out = np.empty_like(u)
    out[R] = -(vr * ur[R] + vz * uz[R]) + vt * vt * inv_r
    out[Z] = -(vr * ur[Z] + vz * uz[Z])
    out[THETA] = -(vr * ur[THETA] + vz * uz[THETA]) - vr * vt * inv_r
    modes = _to_modes(out, k_max)
    return AxisymField(v.period_length, modes).symmetrize()


def apply_T(forcing: AxisymField, profile: PoiseuilleProfile, ops: RadialOperators) -> AxisymField:
    """Solve the linearized problem for every mode of ``forcing``."""
    alpha = profile.params.alpha
    if alpha <= 0.0 and np.any(forcing.data[THETA]):
        raise ValueError(
            "swirl forcing with alpha = 0 is not admissible: rigid rotation v = r "
            "solves the homogeneous swirl problem"
        )
    out = AxisymField.zeros(forcing.period_length, forcing.n_modes, ops.n_points)
    k_max = forcing.k_max
    for k, xi in zip(forcing.wavenumbers, forcing.xis):
        if k < 0:
            continue
        m = k + k_max
        fr, ft, fz = forcing.data[:, m]
        if np.any(fr) or np.any(fz):
            sol = solve_mode(ModeForcing(xi, fr, fz), profile, ops)
            out.data[R, m] = sol.v_r_hat
            out.data[Z, m] = sol.v_z_hat
            out.stream[m] = sol.psi_hat
        if np.any(ft):
            out.data[THETA, m] = solve_swirl_mode(xi, ft, profile, ops, alpha).v_theta_hat
        if k == 0:
            # mode 0 is real for a real field
            out.data[:, m] = out.data[:, m].real
            out.stream[m] = out.stream[m].real
        else:
            mirror = k_max - k
            out.data[:, mirror] = np.conj(out.data[:, m])
            out.stream[mirror] = np.conj(out.stream[m])
    return out


def _test_functions(ops: RadialOperators, count: int):
    """Samples of phi_j = r (1 - r)^2 T_j(2r - 1) and of L phi_j, evaluated exactly.

    Each phi_j satisfies phi(0) = phi(1) = phi'(1) = 0, so for psi with
    psi(1) = 0 one has <L^2 psi, phi> = <L psi, L phi> in the r dr product and
    the weak residual never forms a fourth derivative of psi.
    """
    key = ("weak_tests", count)
    if key not in ops._cache:
        r = Chebyshev.identity(domain=[0.0, 1.0])
        wall = (1.0 - r) ** 2
        phis, lphis = [], []
        for j in range(count):
            q = Chebyshev.basis(j, domain=[0.0, 1.0]) * wall
            phis.append((r * q)(ops.nodes))
            # L (r q) = r q'' + 3 q'
            lphis.append((r * q.deriv(2) + 3.0 * q.deriv())(ops.nodes))
        ops._cache[key] = (np.array(phis), np.array(lphis))
    return ops._cache[key]


def momentum_residual(v: AxisymField, forcing: AxisymField, profile: PoiseuilleProfile, ops: RadialOperators, nonlinear: AxisymField | None = None, n_tests: int = 24) -> float:
    """Relative weak residual of the curl-form meridional equation and the swirl equation.

    Pressure drops out of the curl form. Each mode is tested against smooth
    stream-function test fields phi_j:
        <i xi U (L - xi^2) psi - (L - xi^2)^2 psi - (i xi G^r - (G^z)'), phi_j>
        <i xi U v^theta - (L - xi^2) v^theta - G^theta, phi_j>
    with G = F + N(v). The result is the root-sum-square of all tests divided
    by that of the forcing pairings.
    """
    if v.stream is None:
        raise ValueError("the residual needs the stream function carried by the field")
    nonlinear = nonlinear if nonlinear is not None else nonlinear_terms(v, ops)
    total = forcing.data + nonlinear.data
    count = max(1, min(n_tests, ops.n_points - 4))
    phi, lphi = _test_functions(ops, count)
    wphi = np.conj(phi) * ops.quad_r
    wlphi = np.conj(lphi) * ops.quad_r
    u = profile.u_bar
    res_sq = 0.0
    ref_sq = 0.0
    for m, xi in enumerate(v.xis):
        psi = v.stream[m]
        lpsi = ops.l_op @ psi
        xi2 = xi * xi
        f = 1j * xi * total[R, m] - ops.d1 @ total[Z, m]
        low_order = 1j * xi * u * (lpsi - xi2 * psi) + 2.0 * xi2 * lpsi - xi2 * xi2 * psi - f
        weak = wphi @ low_order - wlphi @ lpsi
        res_sq += float(np.sum(np.abs(weak) ** 2))
        ref_sq += float(np.sum(np.abs(wphi @ f) ** 2))
        if profile.params.alpha > 0.0:
            vt = v.data[THETA, m]
            g = total[THETA, m]
            swirl = 1j * xi * u * vt - (ops.l_op @ vt - xi2 * vt) - g
            res_sq += float(np.sum(np.abs(wphi @ swirl) ** 2))
            ref_sq += float(np.sum(np.abs(wphi @ g) ** 2))
    if ref_sq == 0.0:
        return math.sqrt(res_sq)
    return math.sqrt(res_sq / ref_sq)


@dataclass
class PicardConfig:
    max_iters: int = 50
    tol: float = 1e-10
    period_length: float = 8.0 * math.pi
    n_modes: int = 17
    n_points: int | None = None
    divergence_window: int = 5
    c1: float = 1.0  # stands in for the unquantified constant in the smallness sets


@dataclass
class IterationTrace:
    residual: list = field(default_factory=list)
    increment: list = field(default_factory=list)
    relative_increment: list = field(default_factory=list)
    norm_h54: list = field(default_factory=list)
    j_quantity: list = field(default_factory=list)
    j_bound: float = float("nan")
    k_quantity: list = field(default_factory=list)
    k_bound: float = float("nan")
    termination: str = ""
    diverged: bool = False

    def __len__(self):
        return len(self.increment)

    def ratios(self) -> list:
        inc = self.increment
        return [inc[i] / inc[i - 1] if inc[i - 1] > 0 else 0.0 for i in range(1, len(inc))]

    def as_dict(self) -> dict:
        return {
            "iterations": len(self),
            "residual": self.residual,
            "increment": self.increment,
            "relative_increment": self.relative_increment,
            "norm_h54": self.norm_h54,
            "j_quantity": self.j_quantity,
            "j_bound": self.j_bound,
            "k_quantity": self.k_quantity,
            "k_bound": self.k_bound,
            "termination": self.termination,
            "diverged": self.diverged,
        }


def grid_size_for(params: FlowParams, period_length: float, n_modes: int) -> int:
    xi_max = 2.0 * math.pi * (n_modes // 2) / period_length
    beta, _ = beta_theta(params, xi_max) if xi_max > 0 else (0.0, 0.0)
    return resolution_for(beta)


def forcing_field(profiles, ops: RadialOperators, period_length: float, n_modes: int, amplitude: float | None = None, *, swirl: bool = True) -> AxisymField:
    """F(r, z) = F_hat(r) (cos(xi_1 z) + 0.5 sin(2 xi_1 z)), optionally scaled to L2 norm ``amplitude``.

    ``profiles`` is any object with a ``profiles(r)`` method returning
    (F^r, F^z, F^theta, dF^z/dr) samples, e.g. harness.PolynomialForcing.
    """
    fr, fz, ft, _ = profiles.profiles(ops.nodes)
    if not swirl:
        ft = np.zeros_like(ft)
    field_ = AxisymField.zeros(period_length, n_modes, ops.n_points)
    k_max = n_modes // 2
    radial = np.stack([fr, ft, fz]).real
    coeffs = {1: 0.5, -1: 0.5, 2: -0.25j, -2: 0.25j}
    for k, c in coeffs.items():
        if abs(k) <= k_max:
            field_.data[:, k + k_max] = c * radial
    if amplitude is not None:
        current = field_.norms(ops)["l2"]
        if current > 0:
            field_ = field_.scaled(amplitude / current)
    return field_


def picard_iterate(forcing: AxisymField, params: FlowParams, config: PicardConfig | None = None, *, v_init: AxisymField | None = None, ops: RadialOperators | None = None):
    """Fixed-point iteration v_{j+1} = T F + T N(v_j), starting from ``v_init`` or T F.

    Stops when the H^{5/4} increment falls below tol times the iterate norm,
    after max_iters, or when increments grow for ``divergence_window``
    consecutive iterations (reported, not raised).
    """
    config = config or PicardConfig(period_length=forcing.period_length, n_modes=forcing.n_modes)
    if ops is None:
        ops = build_radial_operators(forcing.data.shape[-1])
    profile = poiseuille_profile(params, ops)
    trace = IterationTrace()
    f_norm = forcing.norms(ops)["l2"]
    trace.j_bound = 2.0 * config.c1 * params.phi ** (1.0 / 16.0) * f_norm
    trace.k_bound = params.phi ** (-0.1) * f_norm if params.phi > 0 else float("inf")

    base = apply_T(forcing, profile, ops)
    v = v_init if v_init is not None else base
    growth = 0
    for _ in range(config.max_iters):
        nl = nonlinear_terms(v, ops)
        v_new = base + apply_T(nl, profile, ops)
        if not np.all(np.isfinite(v_new.data)):
            trace.termination = "non-finite iterate"
            trace.diverged = True
            break
        diff_norms = (v_new - v).norms(ops)
        new_norms = v_new.norms(ops)
        inc = diff_norms["h54"]
        rel = inc / new_norms["h54"] if new_norms["h54"] > 0 else inc
        if trace.increment and inc > trace.increment[-1]:
            growth += 1
        else:
            growth = 0
        trace.increment.append(inc)
        trace.relative_increment.append(rel)
        trace.norm_h54.append(new_norms["h54"])
        trace.j_quantity.append(new_norms["h54"])
        trace.k_quantity.append(v_new.component_l2(R, ops) + v_new.component_l2(Z, ops, dz=True))
        trace.residual.append(momentum_residual(v_new, forcing, profile, ops))
        v = v_new
        if rel <= config.tol:
            trace.termination = "converged"
            break
        if growth >= config.divergence_window:
            trace.termination = "diverged"
            trace.diverged = True
            break
    else:
        trace.termination = "max_iters"
    return v, trace


def fixed_point_defect(v: AxisymField, forcing: AxisymField, params: FlowParams, ops: RadialOperators) -> float:
    """|| T(F + N(v)) - v || / ||v|| in the H^{5/4} proxy."""
    profile = poiseuille_profile(params, ops)
    image = apply_T(forcing, profile, ops) + apply_T(nonlinear_terms(v, ops), profile, ops)
    den = v.norms(ops)["h54"]
    num = (image - v).norms(ops)["h54"]
    return num / den if den > 0 else num


__all__ = [
    "AxisymField",
    "IterationTrace",
    "PicardConfig",
    "apply_T",
    "fixed_point_defect",
    "forcing_field",
    "grid_size_for",
    "momentum_residual",
    "nonlinear_terms",
    "padded_size",
    "picard_iterate",
]

"""Regime classification, wall-layer comparison profiles and decay fits."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .base_flow import FlowParams
from .errors import ResolutionError
from .radial import RadialOperators, barycentric_matrix, chebyshev_lobatto


@dataclass(frozen=True)
class RegimeThresholds:
    eps1: float = 0.1
    delta: float = 0.1

    def __post_init__(self):
        for name in ("eps1", "delta"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


class RegimeLabel(str, enum.Enum):
    LOW_FREQUENCY = "LowFrequency"
    HIGH_FREQUENCY = "HighFrequency"
    MID_SMALL_SLIP = "MidSmallSlip"
    MID_LARGE_SLIP = "MidLargeSlip"
    MID_INTERMEDIATE_SLIP = "MidIntermediateSlip"

    def __str__(self):
        return self.value


def classify(params: FlowParams, xi: float, thresholds: RegimeThresholds = RegimeThresholds()) -> RegimeLabel:
    """Label a parameter triple; ties go to the earlier regime in declaration order."""
    phi, alpha = params.phi, params.alpha
    a = abs(float(xi))
    eps1, delta = thresholds.eps1, thresholds.delta
    if a == 0.0 or phi == 0.0 or a <= 1.0 / (eps1 * phi):
        return RegimeLabel.LOW_FREQUENCY
    if a >= eps1 * math.sqrt(phi):
        return RegimeLabel.HIGH_FREQUENCY
    scale = (phi * a) ** (1.0 / 3.0)
    if 4.0 + alpha <= delta * scale:
        return RegimeLabel.MID_SMALL_SLIP
    if 4.0 + alpha >= scale / delta:
        return RegimeLabel.MID_LARGE_SLIP
    return RegimeLabel.MID_INTERMEDIATE_SLIP


def beta_theta(params: FlowParams, xi: float) -> tuple[float, float]:
    """beta = |(phi xi / pi)(4 / (4 + alpha)) + i xi^2| and its argument measured from the xi^2 axis."""
    drive = 4.0 * params.phi * xi / (math.pi * (4.0 + params.alpha))
    return math.hypot(drive, xi * xi), math.atan2(drive, xi * xi)


def cutoff(t):
    """Smooth nondecreasing bridge: 0 on [0, 1/4], 1 on [1/2, 1]."""
    s = np.clip((np.asarray(t, dtype=float) - 0.25) * 4.0, 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def bessel_i1(rho):
    """Modified Bessel function I_1."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be nonnegative")
    out = special.i1(rho)
    return float(out) if out.ndim == 0 else out


def bessel_i1_scaled(rho):
    """exp(-rho) I_1(rho); finite for every rho."""
    out = special.i1e(np.asarray(rho, dtype=float))
    return float(out) if out.ndim == 0 else out


def bessel_i1_ratio(k: float, r):
    """I_1(k r) / I_1(k) without overflow; the k -> 0 limit is r."""
    r = np.asarray(r, dtype=float)
    k = abs(float(k))
    if k == 0.0:
        return r.copy()
    return np.exp(k * (r - 1.0)) * special.i1e(k * r) / special.i1e(k)


class ProfileKind(str, enum.Enum):
    SMALL_SLIP = "small_slip_exponential"
    LARGE_SLIP = "large_slip_airy"


@dataclass(frozen=True, eq=False)
class BoundaryLayerProfile:
    beta: float
    theta: float
    samples: np.ndarray
    kind: ProfileKind
    nodes: np.ndarray


def bl_profile_small_slip(params: FlowParams, xi: float, ops: RadialOperators, thresholds: RegimeThresholds = RegimeThresholds()) -> BoundaryLayerProfile:
    """exp(-sqrt(beta) e^{i theta/2} (1 - r)) sampled on the grid."""
    if classify(params, xi, thresholds) is not RegimeLabel.MID_SMALL_SLIP:
        warnings.warn("small-slip profile evaluated outside its regime", stacklevel=2)
    beta, theta = beta_theta(params, abs(xi))
    s = 1.0 - ops.nodes
    root = math.sqrt(beta)
    samples = np.exp(-root * math.cos(theta / 2.0) * s) * np.exp(-1j * math.copysign(1.0, xi) * root * math.sin(theta / 2.0) * s)
    return BoundaryLayerProfile(beta, theta, samples, ProfileKind.SMALL_SLIP, ops.nodes)


LAYER_RHO_MAX = 30.0
LAYER_POINTS = 96
LAYER_GROWTH_LIMIT = 20.0


def large_slip_layer(kappa: float, sign: float = 1.0, rho_max: float = LAYER_RHO_MAX, n: int = LAYER_POINTS):
    """Decaying solution of the reduced wall-layer problem in the stretched variable rho.

    phi'' = (i sign rho + kappa) phi with phi(0) = 1, phi(rho_max) = 0, then
    psi'' - kappa psi = phi with psi = psi' = 0 at rho_max, scaled to psi(0) = 1.
    Returns (rho nodes, psi, phi), nodes increasing from 0.

    The terminal conditions amplify rounding by about exp(sqrt(kappa) rho_max),
    so the construction is refused once that factor passes exp(20).
    """
    if math.sqrt(max(kappa, 0.0)) * rho_max > LAYER_GROWTH_LIMIT:
        raise ResolutionError(
            f"wall-layer construction ill-conditioned: sqrt(kappa) * rho_max = "
            f"{math.sqrt(kappa) * rho_max:.3g} exceeds {LAYER_GROWTH_LIMIT}"
        )
    rho, d1, d2 = chebyshev_lobatto(n, 0.0, rho_max)
    eye = np.eye(len(rho))
    a = np.asarray(d2 - np.diag(1j * sign * rho + kappa), dtype=complex)
    b = np.zeros(len(rho), dtype=complex)
    a[0] = eye[0]
    b[0] = 1.0
    a[-1] = eye[-1]
    phi = np.linalg.solve(a, b)

    m = np.asarray(d2 - kappa * eye, dtype=complex)
    rhs = phi.copy()
    m[0] = d1[-1]
    rhs[0] = 0.0
    m[-1] = eye[-1]
    rhs[-1] = 0.0
    psi = np.linalg.solve(m, rhs)
    if psi[0] == 0:
        raise ResolutionError("wall-layer construction degenerated")
    return rho, psi / psi[0], phi


def bl_profile_large_slip(params: FlowParams, xi: float, ops: RadialOperators) -> BoundaryLayerProfile:
    """Airy-type layer of width (4 phi |xi| / pi)^(-1/3), value 1 at the wall."""
    a = abs(float(xi))
    if params.phi <= 0.0 or a == 0.0:
        raise ValueError("the large-slip layer needs phi > 0 and xi != 0")
    width_inv = (4.0 * params.phi * a / math.pi) ** (1.0 / 3.0)
    kappa = a * a / width_inv**2
    rho_max = min(LAYER_RHO_MAX, width_inv)
    rho, psi, _ = large_slip_layer(kappa, math.copysign(1.0, xi), rho_max)
    target = width_inv * (1.0 - ops.nodes)
    inside = target <= rho_max
    samples = np.zeros(ops.n_points, dtype=complex)
    _, w = _lobatto_weights(len(rho))
    samples[inside] = barycentric_matrix(rho, w, target[inside]) @ psi
    tail = target >= 5.0
    if tail.any() and np.abs(samples[tail]).max() >= 0.05:
        raise ResolutionError("wall layer does not decay within 5 widths; increase resolution")
    beta, theta = beta_theta(params, a)
    return BoundaryLayerProfile(beta, theta, samples, ProfileKind.LARGE_SLIP, ops.nodes)


def _lobatto_weights(n_points: int):
    j = np.arange(n_points)
    w = (-1.0) ** j
    w[0] *= 0.5
    w[-1] *= 0.5
    return j, w


def airy_layer_reference(rho, kappa: float, sign: float = 1.0):
    """Closed-form decaying solution of phi'' = (i sign rho + kappa) phi, scaled to 1 at rho = 0."""
    c = np.exp(1j * sign * math.pi / 6.0)
    z = c * (np.asarray(rho) - 1j * sign * kappa)
    z0 = c * (-1j * sign * kappa)
    return special.airy(z)[0] / special.airy(z0)[0]


class DecayFit(NamedTuple):
    fitted_rate: float
    predicted_rate: float
    flat: bool
    window_points: int


def bl_decay_fit(sol, params: FlowParams, xi: float, min_points: int = 4, ops: RadialOperators | None = None) -> DecayFit:
    """Fit the near-wall e-folding rate of psi'' against sqrt(beta) cos(theta / 2).

    psi'' removes any linear interior trend, so the slope of log|psi''| over
    1 - r in [0.2, 2] / sqrt(beta) measures the wall layer alone. ``sol`` is a
    StreamSolution or an array of samples on ``ops``.
    """
    beta, theta = beta_theta(params, abs(xi))
    predicted = math.sqrt(beta) * math.cos(theta / 2.0)
    if hasattr(sol, "psi_hat"):
        ops, psi = sol.ops, sol.psi_hat
    elif ops is None:
        raise ValueError("pass ops when fitting a bare array of samples")
    else:
        psi = np.asarray(sol)
    if not np.any(psi):
        return DecayFit(float("nan"), predicted, True, 0)
    signal = np.abs(ops.d2 @ psi)
    s = 1.0 - ops.nodes
    root = math.sqrt(beta)
    window = (s >= 0.2 / root) & (s <= 2.0 / root) & (signal > 0)
    count = int(window.sum())
    if count < min_points:
        raise ResolutionError(f"decay-fit window holds {count} nodes; need {min_points}")
    slope = np.polyfit(s[window], np.log(signal[window]), 1)[0]
    return DecayFit(float(-slope), predicted, False, count)

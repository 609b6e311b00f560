"""Poiseuille base flow in the unit pipe with Navier slip at the wall."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radial import RadialOperators


@dataclass(frozen=True)
class FlowParams:
    phi: float
    alpha: float

    def __post_init__(self):
        for name in ("phi", "alpha"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")
        object.__setattr__(self, "phi", float(self.phi))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def slip_factor(self) -> float:
        """4 / (4 + alpha), the wall value of U / (2 phi / pi)."""
        return 4.0 / (4.0 + self.alpha)

    @property
    def shear_coupling(self) -> float:
        """(4 phi / pi) * alpha / (4 + alpha); equals -U'(r) / r."""
        return 4.0 * self.phi / math.pi * self.alpha / (4.0 + self.alpha)


def u_bar(params: FlowParams, r):
    r = np.asarray(r, dtype=float)
    a = params.alpha
    return (4.0 + 2.0 * a) / (4.0 + a) * (1.0 - 2.0 * a / (4.0 + 2.0 * a) * r**2) * params.phi / math.pi


def du_bar(params: FlowParams, r):
    r = np.asarray(r, dtype=float)
    return -params.shear_coupling * r


@dataclass(frozen=True, eq=False)
class PoiseuilleProfile:
    params: FlowParams
    u_bar: np.ndarray
    du_bar: np.ndarray
    nodes: np.ndarray

    def flux(self, ops: RadialOperators) -> float:
        return 2.0 * math.pi * float(ops.quad_r @ self.u_bar)


def poiseuille_profile(params: FlowParams, ops: RadialOperators) -> PoiseuilleProfile:
    r = ops.nodes
    return PoiseuilleProfile(params=params, u_bar=u_bar(params, r), du_bar=du_bar(params, r), nodes=r)

"""Axisymmetric perturbations of Poiseuille flow in a pipe with Navier slip."""

from .base_flow import FlowParams, PoiseuilleProfile, poiseuille_profile
from .errors import ConfigError, DiscretizationError, PipeSlipError, ResolutionError, SolverError
from .harness import SlopeFit, SweepRecord, bound_report, fit_scaling, inequality_suite, run_linear_sweep
from .nonlinear import AxisymField, IterationTrace, PicardConfig, apply_T, nonlinear_terms, picard_iterate
from .radial import RadialOperators, build_radial_operators, quad_inv_r, quad_r
from .regimes import (
    BoundaryLayerProfile,
    RegimeLabel,
    RegimeThresholds,
    beta_theta,
    bessel_i1,
    bl_decay_fit,
    bl_profile_large_slip,
    bl_profile_small_slip,
    classify,
)
from .stream import ModeForcing, StreamSolution, assemble_mode_operator, energy_identity_residuals, recover_velocity, solve_mode
from .swirl import SwirlSolution, nullspace_probe, solve_swirl_mode, swirl_identity_residuals

__all__ = [
    "AxisymField", "BoundaryLayerProfile", "ConfigError", "DiscretizationError", "FlowParams",
    "IterationTrace", "ModeForcing", "PicardConfig", "PipeSlipError", "PoiseuilleProfile",
    "RadialOperators", "RegimeLabel", "RegimeThresholds", "ResolutionError", "SlopeFit",
    "SolverError", "StreamSolution", "SweepRecord", "SwirlSolution", "apply_T",
    "assemble_mode_operator", "beta_theta", "bessel_i1", "bl_decay_fit", "bl_profile_large_slip",
    "bl_profile_small_slip", "bound_report", "build_radial_operators", "classify",
    "energy_identity_residuals", "fit_scaling", "inequality_suite", "nonlinear_terms",
    "nullspace_probe", "picard_iterate", "poiseuille_profile", "quad_inv_r", "quad_r",
    "recover_velocity", "run_linear_sweep", "solve_mode", "solve_swirl_mode",
    "swirl_identity_residuals",
]

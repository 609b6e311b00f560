"""Parameter sweeps through the linear solvers, scaling fits and the inequality suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .base_flow import FlowParams, poiseuille_profile
from .errors import PipeSlipError
from .norms import mode_norms
from .radial import RadialOperators, build_radial_operators, resolution_for
from .regimes import RegimeLabel, RegimeThresholds, beta_theta, classify
from .stream import ModeForcing, energy_identity_residuals, solve_mode_gated
from .swirl import solve_swirl_mode, swirl_identity_residuals

GAP_TOL = 1e-6
GATE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class PolynomialForcing:
    """Forcing profiles F^r = r P_r(r), F^z = P_z(r), F^theta = r P_theta(r).

    Coefficients are in increasing powers of r and may be complex. The factor
    r on the r and theta components keeps the forcing regular at the axis.
    """

    p_r: np.ndarray
    p_z: np.ndarray
    p_theta: np.ndarray
    name: str = "polynomial"

    def __post_init__(self):
        for key in ("p_r", "p_z", "p_theta"):
            object.__setattr__(self, key, np.atleast_1d(np.asarray(getattr(self, key), dtype=complex)))

    def profiles(self, r):
        r = np.asarray(r, dtype=float)
        return (
            r * P.polyval(r, self.p_r),
            P.polyval(r, self.p_z),
            r * P.polyval(r, self.p_theta),
            P.polyval(r, P.polyder(self.p_z)) if len(self.p_z) > 1 else np.zeros_like(r, dtype=complex),
        )

    def norm(self) -> float:
        """sqrt of int (|F^r|^2 + |F^z|^2 + |F^theta|^2) r dr, exact for the polynomial degrees used."""
        deg = 2 * max(len(self.p_r), len(self.p_z), len(self.p_theta)) + 4
        ops = build_radial_operators(max(16, deg))
        fr, fz, ft, _ = self.profiles(ops.nodes)
        return math.sqrt(float(ops.quad_r @ (np.abs(fr) ** 2 + np.abs(fz) ** 2 + np.abs(ft) ** 2)))

    def normalized(self) -> "PolynomialForcing":
        s = self.norm()
        if s == 0.0:
            return self
        return PolynomialForcing(self.p_r / s, self.p_z / s, self.p_theta / s, self.name)

    def mode(self, ops: RadialOperators, xi: float) -> ModeForcing:
        fr, fz, _, dfz = self.profiles(ops.nodes)
        return ModeForcing(xi, fr, fz, dfz)

    def theta(self, ops: RadialOperators) -> np.ndarray:
        return self.profiles(ops.nodes)[2]

    def scaled(self, factor: float) -> "PolynomialForcing":
        return PolynomialForcing(self.p_r * factor, self.p_z * factor, self.p_theta * factor, self.name)


def default_forcing() -> PolynomialForcing:
    """F^r = r(1 - r^2), F^z = 1 - r^2, F^theta = r(1 - r), scaled to unit norm."""
    return PolynomialForcing([1.0, 0.0, -1.0], [1.0, 0.0, -1.0], [1.0, -1.0], name="default").normalized()


def random_forcing(rng: np.random.Generator, degree: int = 4) -> PolynomialForcing:
    """Random smooth forcing with complex coefficients, unit norm."""
    def coeffs():
        return rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    return PolynomialForcing(coeffs(), coeffs(), coeffs(), name="random").normalized()


FORCING_FAMILIES = {"default": default_forcing}


@dataclass(eq=False)
class SweepRecord:
    params: FlowParams
    xi: float
    n_points: int
    regime: RegimeLabel
    thresholds: RegimeThresholds
    norms: dict
    identity_gaps: tuple
    forcing_norm: float
    gate_difference: float
    converged: bool
    swirl_norms: dict | None = None
    swirl_gaps: tuple | None = None

    @property
    def phi(self) -> float:
        return self.params.phi

    @property
    def alpha(self) -> float:
        return self.params.alpha

    def key(self):
        return (self.params.phi, self.xi, self.params.alpha)

    def as_dict(self) -> dict:
        return {
            "phi": self.params.phi,
            "xi": self.xi,
            "alpha": self.params.alpha,
            "n_points": self.n_points,
            "regime": self.regime.value,
            "eps1": self.thresholds.eps1,
            "delta": self.thresholds.delta,
            "norms": dict(sorted(self.norms.items())),
            "identity_gaps": list(self.identity_gaps),
            "forcing_norm": self.forcing_norm,
            "gate_difference": self.gate_difference,
            "converged": self.converged,
            "swirl_norms": None if self.swirl_norms is None else dict(sorted(self.swirl_norms.items())),
            "swirl_gaps": None if self.swirl_gaps is None else list(self.swirl_gaps),
        }


@dataclass
class SweepResult:
    records: list = field(default_factory=list)
    rejected: list = field(default_factory=list)  # (phi, xi, alpha, reason)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def solve_record(
    params: FlowParams,
    xi: float,
    forcing: PolynomialForcing,
    thresholds: RegimeThresholds = RegimeThresholds(),
    n_points: int | None = None,
    *,
    include_swirl: bool = True,
    gate_tol: float = GATE_TOL,
) -> SweepRecord:
    beta, _ = beta_theta(params, abs(xi))
    n = n_points if n_points is not None else resolution_for(beta)
    sol, diff, ok = solve_mode_gated(xi, params, lambda o: forcing.mode(o, xi), n, tol=gate_tol)
    ops = sol.ops
    profile = poiseuille_profile(params, ops)
    gaps = energy_identity_residuals(sol, forcing.mode(ops, xi), profile, ops)

    v_theta = None
    swirl_norms = swirl_gaps = None
    f_theta = forcing.theta(ops)
    if include_swirl and params.alpha > 0.0:
        swirl = solve_swirl_mode(xi, f_theta, profile, ops, params.alpha)
        v_theta = swirl.v_theta_hat
        swirl_norms = dict(swirl.norm_report)
        sw = mode_norms(None, v_theta, None, xi, ops)
        swirl_norms.update({f"{k}": v for k, v in sw.as_dict().items()})
        swirl_gaps = swirl_identity_residuals(swirl, f_theta, profile, ops)

    norms = dict(sol.norm_report)
    meridional = mode_norms(sol.v_r_hat, None, sol.v_z_hat, xi, ops)
    full = mode_norms(sol.v_r_hat, v_theta, sol.v_z_hat, xi, ops)
    norms.update({f"meridional_{k}": v for k, v in meridional.as_dict().items()})
    norms.update(full.as_dict())
    # the meridional gradient also equals the vorticity norm: |grad v|^2 = |omega|^2
    norms["omega_l2"] = math.sqrt(float(ops.quad_r @ np.abs(sol.omega_hat) ** 2))

    return SweepRecord(
        params=params,
        xi=float(xi),
        n_points=n,
        regime=classify(params, xi, thresholds),
        thresholds=thresholds,
        norms=norms,
        identity_gaps=gaps,
        forcing_norm=forcing.norm(),
        gate_difference=diff,
        converged=ok,
        swirl_norms=swirl_norms,
        swirl_gaps=swirl_gaps,
    )


def _rejection(rec: SweepRecord, gap_tol: float):
    if not rec.converged:
        return f"convergence gate failed: n vs 2n difference {rec.gate_difference:.3e}"
    if max(rec.identity_gaps) > gap_tol:
        return f"energy identity gap {max(rec.identity_gaps):.3e} exceeds {gap_tol:g}"
    if rec.swirl_gaps is not None and max(rec.swirl_gaps) > gap_tol:
        return f"swirl identity gap {max(rec.swirl_gaps):.3e} exceeds {gap_tol:g}"
    return None


def run_linear_sweep(
    phis: Sequence[float],
    xis: Sequence[float],
    alphas: Sequence[float],
    forcing_family: PolynomialForcing | str = "default",
    thresholds: RegimeThresholds = RegimeThresholds(),
    *,
    n_points: int | None = None,
    include_swirl: bool = True,
    gap_tol: float = GAP_TOL,
    gate_tol: float = GATE_TOL,
) -> SweepResult:
    """Solve every (phi, xi, alpha) triple; failures are recorded, never raised."""
    forcing = FORCING_FAMILIES[forcing_family]() if isinstance(forcing_family, str) else forcing_family
    result = SweepResult()
    triples = sorted({(float(p), float(x), float(a)) for p in phis for x in xis for a in alphas})
    for phi, xi, alpha in triples:
        try:
            rec = solve_record(
                FlowParams(phi, alpha), xi, forcing, thresholds, n_points,
                include_swirl=include_swirl, gate_tol=gate_tol,
            )
        except (PipeSlipError, ValueError, np.linalg.LinAlgError) as exc:
            result.rejected.append((phi, xi, alpha, f"{type(exc).__name__}: {exc}"))
            continue
        reason = _rejection(rec, gap_tol)
        if reason is None:
            result.records.append(rec)
        else:
            result.rejected.append((phi, xi, alpha, reason))
    return result


class SlopeFit(NamedTuple):
    exponent: float
    intercept: float
    r_squared: float
    window: tuple


def _selector(sel) -> Callable:
    if callable(sel):
        return sel
    if sel in ("phi", "xi", "alpha", "forcing_norm"):
        return lambda rec: getattr(rec, sel)
    if isinstance(sel, str) and sel.startswith("swirl."):
        key = sel.split(".", 1)[1]
        return lambda rec: rec.swirl_norms[key]
    return lambda rec: rec.norms[sel]


def fit_log_log(x, y) -> SlopeFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("a scaling fit needs at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0.0:
        raise ValueError("degenerate fit: x has no spread")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float((resid**2).sum()) / ss_tot)
    return SlopeFit(float(slope), float(intercept), min(r2, 1.0), (float(x.min()), float(x.max())))


def fit_scaling(records, x="phi", y="v_r_norm") -> SlopeFit:
    recs = sorted(records, key=lambda rec: rec.key())
    fx, fy = _selector(x), _selector(y)
    return fit_log_log([fx(rec) for rec in recs], [fy(rec) for rec in recs])


class BoundReport(NamedTuple):
    sup_constant: float
    monotone_flag: bool
    normalized: tuple
    phi_monotone_from: float


def bound_report(records, quantity="h1", exponent: float = 0.0, scale: Callable | None = None) -> BoundReport:
    """Empirical constant sup quantity / (scale(phi) * |F|), scale defaulting to phi**exponent.

    The flag is True when the last normalized value is at most twice the median.
    ``phi_monotone_from`` is the smallest swept phi beyond which the normalized
    sequence no longer increases.
    """
    recs = sorted(records, key=lambda rec: rec.key())
    if not recs:
        return BoundReport(float("nan"), True, (), float("nan"))
    fq = _selector(quantity)
    if scale is None:
        scale = lambda phi: phi**exponent  # noqa: E731
    vals = np.array([fq(rec) / (scale(rec.phi) * rec.forcing_norm) for rec in recs])
    flag = bool(vals[-1] <= 2.0 * np.median(vals))
    start = len(vals) - 1
    while start > 0 and vals[start - 1] >= vals[start]:
        start -= 1
    return BoundReport(float(vals.max()), flag, tuple(float(v) for v in vals), float(recs[start].phi))


# ---- inequality suite ------------------------------------------------------


def _poly_fn(coeffs, ops, factor):
    r = ops.nodes
    g = factor(r) * P.polyval(r, coeffs)
    return g


def _lemma_quantities(g, ops: RadialOperators):
    r = ops.nodes
    rg_p = ops.d1 @ (r * g)
    lg = ops.l_op @ g
    w = 1.0 - r**2
    return {
        "g_r": float(ops.quad_r @ np.abs(g) ** 2),
        "g_dr": float(ops.quad_dr @ np.abs(g) ** 2),
        "dg_w": float(ops.quad_dr @ (np.abs(ops.d1 @ g) ** 2 * w)),
        "grad": float(ops.quad_inv_r @ np.abs(rg_p) ** 2),
        "grad_w": float(ops.quad_inv_r @ (np.abs(rg_p) ** 2 * w)),
        "lap": float(ops.quad_r @ np.abs(lg) ** 2),
        "g_rw": float(ops.quad_r @ (np.abs(g) ** 2 * w)),
    }


@dataclass
class LemmaReport:
    name: str
    samples: int = 0
    violations: int = 0
    max_ratio: float = 0.0
    explicit_constant: float | None = None

    def add(self, lhs: float, rhs: float):
        self.samples += 1
        if rhs > 0:
            self.max_ratio = max(self.max_ratio, lhs / rhs)
        elif lhs > 0:
            self.max_ratio = float("inf")
        if self.explicit_constant is not None and lhs > rhs * (1.0 + 1e-8) + 1e-300:
            self.violations += 1

    def as_dict(self):
        return {
            "samples": self.samples,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
            "explicit_constant": self.explicit_constant,
        }


def check_lemmas(q: dict, reports: dict, *, vanish_at_wall: bool):
    """Feed one admissible function's integrals to the lemma reports.

    Explicit-constant inequalities record violations; the rest track the
    largest LHS / RHS ratio (the empirical C with C set to 1 on the right).
    """
    reports["poincare"].add(q["g_r"], q["grad"])
    reports["hlp"].add(q["g_dr"], 0.5 * q["dg_w"])
    reports["hlp_weighted"].add(q["g_r"], q["grad_w"])
    reports["weight1"].add(q["g_r"], q["g_rw"] ** (2 / 3) * q["grad"] ** (1 / 3) + q["g_rw"])
    reports["weight2"].add(q["grad"], q["grad_w"] ** (2 / 3) * q["lap"] ** (1 / 3) + q["grad_w"])
    if vanish_at_wall:
        geo = math.sqrt(q["lap"] * q["g_r"])
        reports["poincare_l_first"].add(q["grad"], geo)
        reports["poincare_l_second"].add(geo, q["lap"])


LEMMAS = {
    "poincare": 1.0,
    "poincare_l_first": 1.0,
    "poincare_l_second": 1.0,
    "hlp": 0.5,
    "hlp_weighted": None,
    "weight1": None,
    "weight2": None,
}


def inequality_suite(n_samples: int, seed: int, ops: RadialOperators | None = None, max_degree: int = 6) -> dict:
    """Check the appendix inequalities on random polynomials g = r p(r) and g = r (1 - r) p(r)."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    ops = ops or build_radial_operators(48)
    rng = np.random.default_rng(seed)
    reports = {name: LemmaReport(name, explicit_constant=c) for name, c in LEMMAS.items()}
    for _ in range(n_samples):
        deg = int(rng.integers(0, max_degree + 1))
        coeffs = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1) * rng.integers(0, 2)
        g = _poly_fn(coeffs, ops, lambda r: r)
        check_lemmas(_lemma_quantities(g, ops), reports, vanish_at_wall=False)
        g0 = _poly_fn(coeffs, ops, lambda r: r * (1.0 - r))
        check_lemmas(_lemma_quantities(g0, ops), reports, vanish_at_wall=True)
    return {name: rep.as_dict() for name, rep in reports.items()}

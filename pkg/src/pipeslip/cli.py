"""Batch command line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 identity gate failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import harness
from .base_flow import FlowParams, poiseuille_profile
from .config import ConfigError, RunConfig, load_config
from .errors import DiscretizationError, PipeSlipError
from .nonlinear import PicardConfig, forcing_field, grid_size_for, picard_iterate
from .radial import build_radial_operators, resolution_for
from .regimes import RegimeThresholds, beta_theta, classify
from .stream import boundary_residuals, divergence_residual, mode_flux, solve_mode
from .swirl import solve_swirl_mode, swirl_boundary_residuals, swirl_identity_residuals

log = logging.getLogger("pipeslip")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_GATE = 0, 2, 3, 4


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict, config: RunConfig):
    doc = {"config": config.as_dict(), "schema_version": config.schema_version, **payload}
    path.write_text(json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header: list, rows, config: RunConfig):
    buf = io.StringIO()
    buf.write(f"# schema_version: {config.schema_version}\n")
    buf.write("# config: " + json.dumps(_clean(config.as_dict()), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue())


def _forcing(block: dict) -> harness.PolynomialForcing:
    if block["forcing"] == "default":
        return harness.default_forcing()
    f = harness.PolynomialForcing(block["p_r"] or [0.0], block["p_z"] or [0.0], block["p_theta"] or [0.0], name="polynomial")
    return f.normalized() if block["normalize"] else f


def _complex_columns(name, values):
    return [(f"re_{name}", values.real), (f"im_{name}", values.imag)]


def cmd_solve_linear(cfg: RunConfig, out: Path, threads: int) -> int:
    block = cfg["linear"]
    params = FlowParams(block["phi"], block["alpha"])
    forcing = _forcing(block)
    if block["n_points"] is not None:
        build_radial_operators(block["n_points"])  # validates early
    rec = harness.solve_record(params, block["xi"], forcing, n_points=block["n_points"], gate_tol=block["gate_tol"])
    ops = build_radial_operators(rec.n_points)
    sol = solve_mode(forcing.mode(ops, block["xi"]), poiseuille_profile(params, ops), ops)
    payload = {
        "record": rec.as_dict(),
        "boundary_residuals": boundary_residuals(sol),
        "divergence_residual": divergence_residual(sol),
        "mode_flux": abs(mode_flux(sol)),
        "interior_residual": sol.residual,
    }
    write_json(out / "record.json", payload, cfg)
    if block["profiles"]:
        cols = [("r", ops.nodes)]
        for name, values in (("psi", sol.psi_hat), ("v_r", sol.v_r_hat), ("v_z", sol.v_z_hat), ("omega", sol.omega_hat)):
            cols += _complex_columns(name, values)
        write_csv(out / "profiles.csv", [c[0] for c in cols], zip(*[c[1] for c in cols]), cfg)
    gaps = list(rec.identity_gaps) + list(rec.swirl_gaps or [])
    if max(gaps) > block["gap_tol"]:
        log.error("identity gap %.3e exceeds %.1e", max(gaps), block["gap_tol"])
        return EXIT_GATE
    return EXIT_OK


def cmd_solve_swirl(cfg: RunConfig, out: Path, threads: int) -> int:
    block = cfg["swirl"]
    params = FlowParams(block["phi"], block["alpha"])
    xi = block["xi"]
    n = block["n_points"] or resolution_for(beta_theta(params, abs(xi))[0])
    ops = build_radial_operators(n)
    profile = poiseuille_profile(params, ops)
    f_theta = _forcing(block).theta(ops)
    sol = solve_swirl_mode(xi, f_theta, profile, ops, params.alpha)
    gaps = swirl_identity_residuals(sol, f_theta, profile, ops)
    payload = {
        "phi": params.phi,
        "xi": xi,
        "alpha": params.alpha,
        "n_points": n,
        "norms": sol.norm_report,
        "boundary_trace": [sol.boundary_trace.real, sol.boundary_trace.imag],
        "boundary_residuals": swirl_boundary_residuals(sol),
        "identity_gaps": list(gaps),
        "interior_residual": sol.residual,
    }
    write_json(out / "swirl.json", payload, cfg)
    if block["profiles"]:
        cols = [("r", ops.nodes)] + _complex_columns("v_theta", sol.v_theta_hat)
        write_csv(out / "swirl_profile.csv", [c[0] for c in cols], zip(*[c[1] for c in cols]), cfg)
    return EXIT_GATE if max(gaps) > block["gap_tol"] else EXIT_OK


BOUND_SPECS = (
    ("h1", "h1", lambda phi: 1.0),
    ("h2_vs_1_plus_phi_quarter", "h2", lambda phi: 1.0 + phi**0.25),
    ("v_r_phi_4_5", "v_r_norm", lambda phi: phi ** (-0.8)),
    ("dz_v_z_phi_3_7", "dz_v_z_norm", lambda phi: phi ** (-3.0 / 7.0)),
)

SWIRL_BOUND = ("dz_v_theta_phi_1_2", "swirl.dz_v_theta_norm", lambda phi: phi ** (-0.5))


def _sweep_groups(records):
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.xi, rec.alpha), []).append(rec)
    return [(key, sorted(groups[key], key=lambda r: r.phi)) for key in sorted(groups)]


def cmd_sweep(cfg: RunConfig, out: Path, threads: int) -> int:
    block = cfg["sweep"]
    if not (block["phis"] and block["xis"] and block["alphas"]):
        raise ConfigError("[sweep] phis, xis and alphas must be non-empty")
    thresholds = RegimeThresholds(**cfg["thresholds"])
    forcing = _forcing(block)
    triples = sorted({(p, x, a) for p in block["phis"] for x in block["xis"] for a in block["alphas"]})

    def run(triple):
        p, x, a = triple
        return harness.run_linear_sweep(
            [p], [x], [a], forcing, thresholds, n_points=block["n_points"],
            include_swirl=block["include_swirl"], gap_tol=block["gap_tol"], gate_tol=block["gate_tol"],
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, triples))
    else:
        parts = [run(t) for t in triples]
    records = sorted((r for part in parts for r in part.records), key=lambda r: r.key())
    rejected = sorted(item for part in parts for item in part.rejected)

    fits, bounds = [], []
    for (xi, alpha), recs in _sweep_groups(records):
        if len({r.phi for r in recs}) >= 3 and all(r.phi > 0 for r in recs):
            for quantity in ("v_r_norm", "dz_v_z_norm", "h1", "h2"):
                try:
                    fit = harness.fit_scaling(recs, "phi", quantity)
                except ValueError as exc:
                    log.warning("fit skipped for %s: %s", quantity, exc)
                    continue
                fits.append({"xi": xi, "alpha": alpha, "quantity": quantity, "exponent": fit.exponent,
                             "intercept": fit.intercept, "r_squared": fit.r_squared,
                             "phi_min": fit.window[0], "phi_max": fit.window[1]})
        specs = list(BOUND_SPECS) + ([SWIRL_BOUND] if all(r.swirl_norms for r in recs) else [])
        for name, quantity, scale in specs:
            if any(r.phi <= 0 for r in recs):
                continue
            rep = harness.bound_report(recs, quantity, scale=scale)
            bounds.append({"xi": xi, "alpha": alpha, "bound": name, "sup_constant": rep.sup_constant,
                           "monotone_flag": rep.monotone_flag, "phi_monotone_from": rep.phi_monotone_from})

    write_json(out / "records.json", {
        "records": [r.as_dict() for r in records],
        "rejected": [{"phi": p, "xi": x, "alpha": a, "reason": why} for p, x, a, why in rejected],
    }, cfg)
    write_json(out / "fits.json", {"fits": fits, "bounds": bounds}, cfg)
    header = ["xi", "alpha", "quantity", "exponent", "intercept", "r_squared", "phi_min", "phi_max"]
    write_csv(out / "fits.csv", header, ([f[h] for h in header] for f in fits), cfg)
    return EXIT_OK


def cmd_inequalities(cfg: RunConfig, out: Path, threads: int) -> int:
    block = cfg["inequalities"]
    ops = build_radial_operators(block["n_points"])
    report = harness.inequality_suite(block["n_samples"], cfg["run"]["seed"], ops, max_degree=block["max_degree"])
    write_json(out / "inequalities.json", {"lemmas": report}, cfg)
    if any(rep["violations"] for rep in report.values()):
        log.error("explicit-constant inequality violated")
        return EXIT_GATE
    return EXIT_OK


def cmd_regimes(cfg: RunConfig, out: Path, threads: int) -> int:
    block = cfg["regimes"]
    thresholds = RegimeThresholds(**cfg["thresholds"])
    rows = []
    for phi in block["phis"]:
        for xi in block["xis"]:
            for alpha in block["alphas"]:
                params = FlowParams(phi, alpha)
                beta, theta = beta_theta(params, abs(xi))
                rows.append((phi, xi, alpha, classify(params, xi, thresholds).value, beta, theta))
    header = ["phi", "xi", "alpha", "regime", "beta", "theta"]
    write_csv(out / "regimes.csv", header, rows, cfg)
    write_json(out / "regimes.json", {"table": [dict(zip(header, row)) for row in rows]}, cfg)
    return EXIT_OK


def cmd_solve_nonlinear(cfg: RunConfig, out: Path, threads: int) -> int:
    block = cfg["nonlinear"]
    params = FlowParams(block["phi"], block["alpha"])
    n = block["n_points"] or grid_size_for(params, block["period_length"], block["n_modes"])
    if block["n_modes"] % 2 == 0:
        raise ConfigError("[nonlinear] n_modes must be odd (modes -K..K)")
    ops = build_radial_operators(n)
    swirl = block["swirl"] and params.alpha > 0.0
    forcing = forcing_field(_forcing(block), ops, block["period_length"], block["n_modes"], block["amplitude"], swirl=swirl)
    picard = PicardConfig(max_iters=block["max_iters"], tol=block["tol"], period_length=block["period_length"],
                          n_modes=block["n_modes"], n_points=n)
    v, trace = picard_iterate(forcing, params, picard, ops=ops)
    norms = v.norms(ops)
    write_json(out / "trace.json", {
        "trace": trace.as_dict(),
        "n_points": n,
        "field_norms": norms,
        "forcing_l2": forcing.norms(ops)["l2"],
        "symmetry_defect": v.symmetry_defect(),
        "divergence_defect": v.divergence_defect(ops),
        "mode_zero_flux": v.mode_zero_flux(ops),
    }, cfg)
    if block["field_output"]:
        rows = []
        for m, k in enumerate(v.wavenumbers):
            for i, r in enumerate(ops.nodes):
                vals = v.data[:, m, i]
                rows.append((int(k), r, vals[0].real, vals[0].imag, vals[1].real, vals[1].imag, vals[2].real, vals[2].imag))
        header = ["k", "r", "re_v_r", "im_v_r", "re_v_theta", "im_v_theta", "re_v_z", "im_v_z"]
        write_csv(out / "field.csv", header, rows, cfg)
    return EXIT_NUMERICAL if trace.termination == "non-finite iterate" else EXIT_OK


COMMANDS = {
    "solve-linear": cmd_solve_linear,
    "solve-swirl": cmd_solve_swirl,
    "sweep": cmd_sweep,
    "inequalities": cmd_inequalities,
    "regimes": cmd_regimes,
    "solve-nonlinear": cmd_solve_nonlinear,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pipeslip", description="Slip-pipe perturbation solvers and estimate harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI or JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        p.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.threads)
    except (ConfigError, DiscretizationError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (PipeSlipError, ValueError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

import math

import numpy as np
import pytest
import sympy as sp

from pipeslip.base_flow import FlowParams
from pipeslip.harness import (
    LEMMAS,
    PolynomialForcing,
    _lemma_quantities,
    bound_report,
    default_forcing,
    fit_log_log,
    fit_scaling,
    inequality_suite,
    random_forcing,
    run_linear_sweep,
    solve_record,
)
from pipeslip.radial import build_radial_operators

r = sp.symbols("r", positive=True)


def test_default_forcing_normalization():
    raw = sp.integrate(((r * (1 - r**2)) ** 2 + (1 - r**2) ** 2 + (r * (1 - r)) ** 2) * r, (r, 0, 1))
    assert raw == sp.Rational(9, 40)
    pf = PolynomialForcing([1.0, 0.0, -1.0], [1.0, 0.0, -1.0], [1.0, -1.0])
    assert pf.norm() ** 2 == pytest.approx(9 / 40, rel=1e-14)
    assert default_forcing().norm() == pytest.approx(1.0, rel=1e-14)


def test_random_forcing_unit_norm(rng):
    for _ in range(5):
        assert random_forcing(rng).norm() == pytest.approx(1.0, rel=1e-12)


def test_singleton_sweep():
    res = run_linear_sweep([1.0], [1.0], [1.0])
    assert len(res) == 1 and not res.rejected
    rec = res.records[0]
    assert max(rec.identity_gaps) <= 1e-6 and max(rec.swirl_gaps) <= 1e-6
    assert rec.converged and rec.forcing_norm == pytest.approx(1.0)
    assert rec.as_dict()["regime"] == str(rec.regime)


def test_empty_sweep():
    res = run_linear_sweep([], [1.0], [1.0])
    assert len(res) == 0 and res.rejected == []


def test_five_point_sweep_feeds_fit():
    res = run_linear_sweep(np.logspace(2, 4, 5), [1.0], [1.0])
    assert len(res) == 5
    fit = fit_scaling(res.records, "phi", "v_r_norm")
    assert 0.0 <= fit.r_squared <= 1.0
    assert fit.window == (100.0, 1e4)


def test_failing_triple_is_isolated():
    res = run_linear_sweep([1.0, 1e4], [30.0], [1.0], n_points=48)
    keys = [rec.key() for rec in res.records]
    assert (1.0, 30.0, 1.0) in keys
    assert [t[:3] for t in res.rejected] == [(1e4, 30.0, 1.0)]
    assert "gate" in res.rejected[0][3]


def test_synthetic_fits():
    x = np.logspace(0, 3, 7)
    fit = fit_log_log(x, x**-0.8)
    assert fit.exponent == pytest.approx(-0.8, abs=1e-12) and fit.r_squared == pytest.approx(1.0)
    fit = fit_log_log(x, np.full_like(x, 3.0))
    assert abs(fit.exponent) <= 1e-12 and fit.r_squared == 1.0


def test_degenerate_fits_rejected():
    with pytest.raises(ValueError):
        fit_log_log([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        fit_log_log([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_log_log([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])


class Rec:
    def __init__(self, phi, value):
        self.params = FlowParams(phi, 1.0)
        self.xi = 1.0
        self.forcing_norm = 1.0
        self.norms = {"q": value}

    phi = property(lambda self: self.params.phi)

    def key(self):
        return (self.phi, self.xi, self.params.alpha)


def test_bound_report_synthetic():
    recs = [Rec(p, 5.0 * p**-0.5) for p in (1e2, 1e3, 1e4)]
    rep = bound_report(recs, "q", -0.5)
    assert rep.sup_constant == pytest.approx(5.0) and rep.monotone_flag
    growing = [Rec(p, p) for p in (1e2, 1e3, 1e4)]
    assert not bound_report(growing, "q", 0.0).monotone_flag
    assert math.isnan(bound_report([], "q").sup_constant)


def test_uniform_h1_constant_finite():
    res = run_linear_sweep(np.logspace(0, 4, 5), [1.0], [0.0, 1.0, 10.0, 1e6])
    assert len(res) == 20, res.rejected
    rep = bound_report(res.records, "h1", 0.0)
    assert np.isfinite(rep.sup_constant)


def test_inequality_examples():
    ops = build_radial_operators(48)
    x = ops.nodes
    q = _lemma_quantities(x.astype(complex), ops)
    # HLP with g = r: int r^2 dr = 1/3 and (1/2) int (1 - r^2) dr = 1/3
    assert sp.integrate(r**2, (r, 0, 1)) == sp.Rational(1, 3)
    assert sp.integrate(1 - r**2, (r, 0, 1)) / 2 == sp.Rational(1, 3)
    assert q["g_dr"] == pytest.approx(1 / 3, abs=1e-12)
    assert abs(q["g_dr"] - 0.5 * q["dg_w"]) <= 1e-10
    # Poincare-type with g = r: int r^3 = 1/4, int |(r^2)'|^2 / r = 2
    assert sp.integrate(sp.diff(r**2, r) ** 2 / r, (r, 0, 1)) == 2
    assert q["g_r"] == pytest.approx(0.25, rel=1e-13)
    assert q["grad"] == pytest.approx(2.0, rel=1e-12)
    zero = _lemma_quantities(np.zeros(48, dtype=complex), ops)
    assert all(v == 0.0 for v in zero.values())


def test_inequality_suite_thousand_samples():
    rep = inequality_suite(1000, seed=7)
    assert set(rep) == set(LEMMAS)
    for name, c in LEMMAS.items():
        assert rep[name]["samples"] >= 1000
        assert np.isfinite(rep[name]["max_ratio"])
        if c is not None:
            assert rep[name]["violations"] == 0, name
            assert rep[name]["max_ratio"] <= 1.0 + 1e-8
    assert inequality_suite(50, seed=3) == inequality_suite(50, seed=3)
    with pytest.raises(ValueError):
        inequality_suite(0, seed=1)


def test_solve_record_without_swirl_at_zero_alpha():
    rec = solve_record(FlowParams(10.0, 0.0), 1.0, default_forcing())
    assert rec.swirl_norms is None and rec.swirl_gaps is None
    assert rec.norms["h2"] >= rec.norms["h1"] >= rec.norms["l2"] > 0

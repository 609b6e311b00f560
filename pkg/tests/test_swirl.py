import math

import numpy as np
import pytest
import sympy as sp

from pipeslip.base_flow import FlowParams, poiseuille_profile
from pipeslip.harness import default_forcing, random_forcing
from pipeslip.radial import build_radial_operators, resolution_for
from pipeslip.regimes import beta_theta
from pipeslip.swirl import (
    nullspace_probe,
    solve_swirl_mode,
    swirl_boundary_residuals,
    swirl_identity_residuals,
)

r = sp.symbols("r", positive=True)


def L(e):
    return sp.diff(e, r, 2) + sp.diff(e, r) / r - e / r**2


def swirl_forcing(v, alpha, xi, phi):
    u = sp.Rational(4 + 2 * alpha, 4 + alpha) * (1 - sp.Rational(2 * alpha, 4 + 2 * alpha) * r**2) * phi / sp.pi
    return sp.expand(sp.I * xi * u * v - (L(v) - xi**2 * v))


def robin_holds(v, alpha):
    return sp.simplify(sp.diff(v, r).subs(r, 1) - (1 - alpha) * v.subs(r, 1)) == 0


def solve_manufactured(v, alpha, xi=1, phi=sp.pi, n=48):
    f = swirl_forcing(v, alpha, xi, phi)
    ops = build_radial_operators(n)
    x = ops.nodes
    fs = sp.lambdify(r, f, "numpy")(x) * np.ones(n)
    prof = poiseuille_profile(FlowParams(float(phi), float(alpha)), ops)
    sol = solve_swirl_mode(float(xi), fs, prof, ops)
    exact = sp.lambdify(r, v, "numpy")(x)
    return sol, exact, fs, prof, ops


def test_manufactured_odd_cubic():
    # v = r + c r^3 meets the Robin row iff c = -alpha / (2 + alpha)
    c, a = sp.symbols("c alpha")
    sol_c = sp.solve(sp.diff(r + c * r**3, r).subs(r, 1) - (1 - a) * (1 + c), c)
    assert sp.simplify(sol_c[0] + a / (2 + a)) == 0
    v = r - r**3 / 3
    assert robin_holds(v, 1)
    sol, exact, fs, prof, ops = solve_manufactured(v, 1)
    assert np.abs(sol.v_theta_hat - exact).max() / np.abs(exact).max() <= 1e-8
    assert max(swirl_identity_residuals(sol, fs, prof, ops)) <= 1e-7


def test_manufactured_product_family():
    # r(1 - r)(r - c): v(1) = 0, so the Robin row forces v'(1) = 0, i.e. c = 1
    # for every alpha; the alpha coupling drops out of this family
    c, a = sp.symbols("c alpha")
    v = r * (1 - r) * (r - c)
    assert sp.solve(sp.diff(v, r).subs(r, 1) - (1 - a) * v.subs(r, 1), c) == [1]
    for alpha in (sp.Rational(1, 2), 3):
        sol, exact, *_ = solve_manufactured(v.subs(c, 1), alpha, n=40)
        assert np.abs(sol.v_theta_hat - exact).max() / np.abs(exact).max() <= 1e-8


def test_zero_forcing():
    ops = build_radial_operators(32)
    prof = poiseuille_profile(FlowParams(10.0, 1.0), ops)
    z = np.zeros(32)
    sol = solve_swirl_mode(1.0, z, prof, ops)
    assert np.all(sol.v_theta_hat == 0)
    assert swirl_identity_residuals(sol, z, prof, ops) == (0.0, 0.0)


def test_conjugate_symmetry():
    ops = build_radial_operators(48)
    prof = poiseuille_profile(FlowParams(500.0, 2.0), ops)
    f = default_forcing().theta(ops) * (1 + 0.5j)
    plus = solve_swirl_mode(3.0, f, prof, ops)
    minus = solve_swirl_mode(-3.0, np.conj(f), prof, ops)
    assert np.abs(minus.v_theta_hat - np.conj(plus.v_theta_hat)).max() <= 1e-10 * np.abs(plus.v_theta_hat).max()


@pytest.mark.parametrize("alpha", [0.0, -1.0])
def test_nonpositive_alpha_rejected(alpha):
    ops = build_radial_operators(16)
    prof = poiseuille_profile(FlowParams(1.0, 0.0), ops)
    with pytest.raises(ValueError, match="nullspace_probe"):
        solve_swirl_mode(1.0, np.ones(16), prof, ops, alpha=alpha)


@pytest.mark.parametrize("phi,xi,alpha", [(1.0, 1.0, 1.0), (1e3, 2.0, 1.0), (1e4, 0.1, 0.5), (1e3, 30.0, 100.0)])
def test_invariants_and_identities(phi, xi, alpha, rng):
    params = FlowParams(phi, alpha)
    ops = build_radial_operators(resolution_for(beta_theta(params, xi)[0]))
    prof = poiseuille_profile(params, ops)
    f = random_forcing(rng).theta(ops)
    sol = solve_swirl_mode(xi, f, prof, ops)
    assert max(swirl_boundary_residuals(sol).values()) <= 1e-9
    assert sol.residual <= 1e-8
    assert max(swirl_identity_residuals(sol, f, prof, ops)) <= 1e-6
    assert sol.boundary_trace == sol.v_theta_hat[-1]


def test_nullspace_rigid_rotation():
    ops = build_radial_operators(48)
    prof = poiseuille_profile(FlowParams(10.0, 0.0), ops)
    probe = nullspace_probe(0.0, 0.0, prof, ops)
    assert probe.sigma_min <= 1e-8
    assert probe.cosine_with_r >= 1 - 1e-6


def test_nullspace_lifted_by_slip_or_frequency():
    ops = build_radial_operators(48)
    prof = poiseuille_profile(FlowParams(10.0, 0.0), ops)
    assert nullspace_probe(0.0, 1.0, prof, ops).sigma_min > 1e-6
    assert nullspace_probe(2.0, 0.0, prof, ops).sigma_min > 1e-6


def swirl_proxy(alpha0):
    pf = default_forcing()
    out = []
    for phi in np.logspace(0, 4, 5):
        for xi in (0.1, 1.0, 5.0):
            for alpha in (alpha0, 10 * alpha0, 1e3):
                params = FlowParams(phi, alpha)
                ops = build_radial_operators(resolution_for(beta_theta(params, xi)[0]))
                f = pf.theta(ops)
                sol = solve_swirl_mode(xi, f, poiseuille_profile(params, ops), ops)
                f_norm = math.sqrt(float(ops.quad_r @ np.abs(f) ** 2))
                out.append(math.sqrt(phi) * sol.norm_report["dz_v_theta_norm"] / f_norm)
    return max(out)


def test_uniform_constant_degrades_as_slip_vanishes():
    proxies = [swirl_proxy(a) for a in (1.0, 0.1, 0.01)]
    assert all(np.isfinite(proxies))
    assert proxies[0] < proxies[1] < proxies[2]

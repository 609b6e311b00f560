import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from pipeslip.errors import DiscretizationError
from pipeslip.radial import build_radial_operators, chebyshev_lobatto, quad_inv_r, quad_r, resolution_for

r_sym = sp.symbols("r", positive=True)


def sym_L(expr):
    return sp.diff(expr, r_sym, 2) + sp.diff(expr, r_sym) / r_sym - expr / r_sym**2


@pytest.mark.parametrize("n", [4, 7, 0, -3])
def test_rejects_small_grids(n):
    with pytest.raises(DiscretizationError):
        build_radial_operators(n)


def test_rejects_non_integer():
    with pytest.raises(DiscretizationError):
        build_radial_operators(16.0)


@pytest.mark.parametrize("n", [8, 16, 33, 64])
def test_nodes_strictly_inside_and_increasing(n):
    ops = build_radial_operators(n)
    assert ops.nodes.shape == (n,)
    assert ops.nodes[0] > 0.0 and ops.nodes[-1] == 1.0
    assert np.all(np.diff(ops.nodes) > 0)
    assert np.all(np.isfinite(ops.l_op))


@pytest.mark.parametrize("n", [8, 16, 32, 64])
def test_d1_exact_on_monomials(n):
    ops = build_radial_operators(n)
    r = ops.nodes
    for k in range(0, n - 1):
        exact = k * r ** (k - 1) if k else np.zeros_like(r)
        err = np.abs(ops.d1 @ r**k - exact).max()
        assert err <= 1e-10 * max(1.0, np.abs(exact).max())


@pytest.mark.parametrize("n", [8, 16, 24, 32, 48, 64, 96, 128])
def test_l_annihilates_r(n):
    ops = build_radial_operators(n)
    assert np.abs(ops.l_op @ ops.nodes).max() <= 1e-10


def test_l_on_quintic_matches_symbolic():
    c = -2
    psi = c * r_sym + (1 - c) * r_sym**3 - r_sym**5
    lpsi = sp.expand(sym_L(psi))
    assert sp.simplify(lpsi - (8 * (1 - c) * r_sym - 24 * r_sym**3)) == 0
    assert sp.simplify(lpsi - (24 * r_sym - 24 * r_sym**3)) == 0
    ops = build_radial_operators(32)
    r = ops.nodes
    got = ops.l_op @ (-2 * r + 3 * r**3 - r**5)
    want = sp.lambdify(r_sym, lpsi, "numpy")(r)
    assert np.abs(got - want).max() <= 1e-8


@pytest.mark.parametrize("n", [8, 16, 32, 64])
def test_quad_r_moments(n):
    ops = build_radial_operators(n)
    r = ops.nodes
    for k in range(0, n - 1):
        exact = float(sp.integrate(r_sym**k * r_sym, (r_sym, 0, 1)))
        assert abs(quad_r(ops, r**k) - exact) <= 1e-12 * exact


def test_quad_r_constant():
    ops = build_radial_operators(32)
    assert quad_r(ops, np.ones(32)) == pytest.approx(0.5, rel=1e-14)


def test_quad_inv_r_examples():
    ops = build_radial_operators(32)
    r = ops.nodes
    exact = float(sp.integrate(4 * r_sym**2 / r_sym, (r_sym, 0, 1)))
    assert exact == 2.0
    assert quad_inv_r(ops, 4 * r**2) == pytest.approx(2.0, rel=1e-13)
    assert quad_inv_r(ops, np.zeros(32)) == 0.0
    assert quad_inv_r(ops, r) == pytest.approx(1.0, rel=1e-13)


def test_quadrature_spectral_convergence():
    exact = float(sp.integrate(sp.sin(sp.pi * r_sym) * r_sym, (r_sym, 0, 1)))
    errs = {}
    for n in (8, 16, 32):
        ops = build_radial_operators(n)
        errs[n] = abs(quad_r(ops, np.sin(np.pi * ops.nodes)) - exact)
    floor = 4 * np.finfo(float).eps
    # by n = 16 the rule is already at round-off, so the doubling from 16 to 32
    # can only be observed down to that floor
    assert errs[32] <= max(1e-4 * errs[16], floor)
    assert errs[16] <= 1e-4 * errs[8]


poly = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=6)


@given(poly, poly)
def test_discrete_integration_by_parts(a, b):
    ops = build_radial_operators(48)
    r = ops.nodes
    f = r * (1 - r) * np.polyval(a, r)
    g = r * (1 - r**2) * np.polyval(b, r)
    lhs = quad_r(ops, f * (ops.l_op @ g))
    rhs = quad_r(ops, g * (ops.l_op @ f))
    scale = math.sqrt(quad_r(ops, f * f) * quad_r(ops, g * g)) + 1e-300
    assert abs(lhs - rhs) <= 1e-8 * max(scale, 1.0)


def test_axis_row_interpolates_polynomials():
    ops = build_radial_operators(24)
    r = ops.nodes
    assert ops.axis_row @ (1.0 + r**3) == pytest.approx(1.0, abs=1e-12)
    assert abs(ops.axis_row @ r) <= 1e-14


def test_resolution_rule():
    assert resolution_for(0.0) == 48
    assert resolution_for(1.0) == 48
    assert resolution_for(1e4) == 8 * math.ceil(40.0)


def test_lobatto_helper_differentiates():
    x, d1, d2 = chebyshev_lobatto(20, 0.0, 3.0)
    assert x[0] == 0.0 and x[-1] == 3.0
    assert np.abs(d1 @ x**3 - 3 * x**2).max() < 1e-10
    assert np.abs(d2 @ x**3 - 6 * x).max() < 1e-9

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from laguerre_h1.grid import Grid, GridFunction, Tail, grade_to_zero
from laguerre_h1.measure import Interval
from laguerre_h1.quadrature import (
    ConvergenceError,
    PvConfig,
    PvDivergenceError,
    graded_breaks,
    integrate_mu,
    integrate_t,
    log_t_integral,
    lp_norm,
    principal_value,
    richardson,
)
from laguerre_h1.specfun import laguerre_fn


# -- grids ----------------------------------------------------------------------------


def test_grid_weights_integrate_monomials():
    g = Grid(grade_to_zero([0.0, 0.5, 2.0, 5.0]), 1.5)
    for k in range(4):
        assert g.weights @ g.nodes**k == pytest.approx(5.0 ** (k + 2.5) / (k + 2.5), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(np.array([1.0]), 1.0)
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 2.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 1.0]), 0.0)


def test_grid_node_count_and_positive_weights():
    g = Grid(np.linspace(0.0, 3.0, 7), 2.0)
    assert g.nodes.size == 16 * 6
    assert np.all(g.weights > 0)


def test_grade_to_zero_refines_only_wide_first_panel():
    assert np.array_equal(grade_to_zero([1.0, 1.5]), [1.0, 1.5])
    b = grade_to_zero([0.0, 1.0], levels=10)
    assert b.size == 12 and b[1] == pytest.approx(2.0**-10)
    b = grade_to_zero([0.1, 2.0])
    assert b[1] - b[0] <= 0.1


@settings(max_examples=50)
@given(st.floats(0.0, 3.0), st.floats(0.3, 3.0))
def test_gridfunction_interpolates_polynomials_exactly(x0, alpha):
    g = Grid(np.array([0.0, 1.0, 3.0]), alpha)
    f = GridFunction(g, 1.0 - g.nodes + 0.3 * g.nodes**5)
    assert f(x0) == pytest.approx(1.0 - x0 + 0.3 * x0**5, rel=1e-10, abs=1e-10)


def test_gridfunction_text_roundtrip():
    f = GridFunction.from_callable(np.sin, [0.0, 1.0, 2.5], 1.5, tail=Tail(False, 3.0, 2.0))
    g = GridFunction.from_text(f.to_text())
    assert np.array_equal(g.values, f.values)
    assert g.tail == f.tail and g.alpha == f.alpha


@pytest.mark.parametrize("text", ["", "x,value\n", '# {"alpha": 1}\nx,value\n'])
def test_gridfunction_rejects_malformed_text(text):
    with pytest.raises((ValueError, KeyError)):
        GridFunction.from_text(text)


def test_jumps_detected():
    g = Grid(np.array([0.5, 1.0, 2.0]), 1.0)
    f = GridFunction(g, np.where(g.nodes < 1.0, 1.0, 0.0))
    assert np.allclose(f.jumps(), [0.5, 1.0])


# -- integrate_mu ---------------------------------------------------------------------


def test_integrate_mu_examples():
    assert integrate_mu(lambda x: np.ones_like(x), Interval(1.0, 0.5), 1.0) == pytest.approx(1.0, rel=1e-12)
    psi0 = lambda x: laguerre_fn(0, 1.0, x) ** 2
    assert integrate_mu(psi0, 12.0, 1.0) == pytest.approx(1.0, rel=1e-10)
    assert integrate_mu(lambda x: np.zeros_like(x), (0.0, 3.0), 1.0) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.1, 5.0), st.floats(-3.0, 3.0))
def test_integrate_mu_against_scipy(alpha, b, k):
    fn = lambda x: np.cos(k * x) * np.exp(-x)
    ref, _ = integrate.quad(lambda x: math.cos(k * x) * math.exp(-x) * x**alpha, 0.0, b, epsabs=1e-13, epsrel=1e-13)
    assert integrate_mu(fn, (0.0, b), alpha, tol=1e-12) == pytest.approx(ref, rel=1e-9, abs=1e-11)


def test_integrate_mu_gauss_rate():
    fn = lambda x: np.exp(np.sin(3 * x)) * x**2
    exact = integrate.quad(lambda x: math.exp(math.sin(3 * x)) * x**3, 0.0, 4.0, epsabs=0, epsrel=1e-13, limit=200)[0]
    for order in (8, 16):
        errs = []
        for n in (1, 2):
            g = Grid(np.linspace(0.0, 4.0, n + 1), 1.0, order=order)
            errs.append(abs(g.weights @ fn(g.nodes) - exact))
        assert errs[0] / errs[1] >= 2**8


def test_integrate_mu_nonconvergence_raises():
    with pytest.raises(ConvergenceError):
        integrate_mu(lambda x: 1.0 / np.abs(x - 1.0) ** 1.2, (0.5, 1.5), 1.0, max_levels=8)


# -- t integrals ----------------------------------------------------------------------


@pytest.mark.parametrize("beta", [1.0, 2.0, 5.0, 20.0])
def test_integrate_t_exponential(beta):
    val, err = integrate_t(lambda t: np.exp(-beta * t), tol=1e-10, decay_rate=beta, amplitude=1.0)
    assert abs(val - math.sqrt(math.pi / beta)) < 1e-10
    assert err >= 0


def test_integrate_t_zero():
    val, _ = integrate_t(lambda t: np.zeros_like(t), decay_rate=1.0, amplitude=1.0)
    assert val == 0.0


def test_integrate_t_power_decay():
    # integral of (1+t)^-2 t^-1/2 over (0, inf) is pi/2.
    val, _ = integrate_t(lambda t: (1.0 + t) ** -2.0, tol=1e-8, power=2.0, amplitude=1.0)
    assert val == pytest.approx(math.pi / 2, abs=1e-7)


@pytest.mark.parametrize("beta", [0.5, 2.0, 7.0])
def test_log_t_trapezoid(beta):
    val, err = log_t_integral(lambda t: np.exp(-beta * t), math.log(1e-30), math.log(80.0 / beta), 0.25)
    assert float(val[0]) == pytest.approx(math.sqrt(math.pi / beta), rel=1e-12)


# -- principal values -----------------------------------------------------------------


def test_graded_breaks():
    b = graded_breaks(0.0, 1.0, 0.3, 1e-4)
    assert 0.3 in b and b[0] == 0.0 and b[-1] == 1.0
    assert np.min(np.diff(b)) == pytest.approx(1e-4)


def test_pv_config_validation():
    with pytest.raises(ValueError):
        PvConfig(ratio=1.5)
    with pytest.raises(ValueError):
        PvConfig(levels=3)
    assert np.all(np.diff(PvConfig().radii(1.0)) < 0)


def test_richardson_removes_odd_powers():
    eps = 0.1 * 0.5 ** np.arange(6)
    vals = 2.0 + 3.0 * eps - 5.0 * eps**3
    assert richardson(vals, 0.5, 2)[-1] == pytest.approx(2.0, abs=1e-13)


def test_principal_value_cauchy_closed_form():
    # PV of y/(x^2 - y^2) over (0.5, 1.5) against dy (alpha=1 moves y into the weight) at x = 1.
    x, a, b = 1.0, 0.5, 1.5
    kern = lambda xx, yy: 1.0 / (xx**2 - yy**2)
    val = principal_value(kern, lambda y: np.ones_like(y), x, 1.0, support=(a, b))
    # antiderivative of y/(x^2 - y^2) is -log|x^2 - y^2| / 2
    exact = -0.5 * (math.log(abs(x * x - b * b)) - math.log(abs(x * x - a * a)))
    assert val == pytest.approx(exact, abs=1e-9)


def test_principal_value_odd_kernel_symmetric_density_is_zero():
    kern = lambda xx, yy: 1.0 / (xx - yy)
    # alpha weight is y^alpha; divide it out so the density is even about x.
    alpha = 1.0
    f = lambda y: np.exp(-((y - 2.0) ** 2)) / y**alpha
    val = principal_value(kern, f, 2.0, alpha, support=(1.0, 3.0))
    assert abs(val) < 1e-10


def test_principal_value_zero():
    kern = lambda xx, yy: 1.0 / (xx - yy)
    assert principal_value(kern, lambda y: 0.0 * y, 1.0, 1.0, support=(0.5, 1.5)) == 0.0


def test_principal_value_divergence_detected():
    kern = lambda xx, yy: 1.0 / np.abs(xx - yy)
    with pytest.raises(PvDivergenceError):
        principal_value(kern, lambda y: np.ones_like(y), 1.0, 1.0, support=(0.5, 1.5))


# -- norms ----------------------------------------------------------------------------


def test_lp_norm_examples():
    psi0 = GridFunction.from_callable(lambda x: laguerre_fn(0, 1.0, x), grade_to_zero(np.linspace(0, 10, 21)), 1.0)
    assert lp_norm(psi0, 2) == pytest.approx(1.0, rel=1e-10)
    g = Grid(np.array([0.5, 1.5]), 1.0)
    assert lp_norm(GridFunction(g, np.ones_like(g.nodes)), 1) == pytest.approx(1.0, rel=1e-12)
    assert lp_norm(GridFunction.zeros(g), 1) == 0.0


def test_lp_norm_includes_tail_bound():
    g = Grid(np.array([0.5, 2.0]), 1.0)
    f = GridFunction(g, np.ones_like(g.nodes), Tail(False, 4.0, 1.0))
    assert lp_norm(f, 1) == pytest.approx((4.0 - 0.25) / 2.0 + 2.0**-2 / 2.0, rel=1e-12)

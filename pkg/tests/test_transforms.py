import math

import numpy as np
import pytest

from laguerre_h1 import transforms as tr
from laguerre_h1.grid import GridFunction, Tail, grade_to_zero
from laguerre_h1.kernels import cutoff_phi
from laguerre_h1.quadrature import lp_norm
from laguerre_h1.specfun import laguerre_fn

GAUSS_TAIL = Tail(False, 12.0, 1e-12)


def _eig(coeffs, alpha=1.0, x_max=12.0):
    fn = lambda x: sum(c * laguerre_fn(k, alpha, x) for k, c in coeffs.items())
    return GridFunction.from_callable(fn, grade_to_zero(np.linspace(0.0, x_max, 49)), alpha, tail=GAUSS_TAIL)


def _bump(c, w, alpha=1.0, n=41):
    fn = lambda x: cutoff_phi((x - c) / (0.5 * w))
    return GridFunction.from_callable(fn, np.linspace(c - w, c + w, n), alpha)


# -- spectral analysis ----------------------------------------------------------------


def test_analyze_eigenfunction():
    c = tr.analyze(_eig({3: 1.0})).coeffs
    e = np.zeros_like(c)
    e[3] = 1.0
    assert np.max(np.abs(c - e)) < 1e-8


def test_analyze_combination():
    c = tr.analyze(_eig({1: 1.0, 4: 2.0})).coeffs
    e = np.zeros_like(c)
    e[1], e[4] = 1.0, 2.0
    assert np.max(np.abs(c - e)) < 1e-8


def test_analyze_gaussian_bump_parseval():
    f = GridFunction.from_callable(lambda x: np.exp(-8 * (x - 1) ** 2), grade_to_zero(np.linspace(0, 6, 25)), 1.0,
                                   tail=GAUSS_TAIL)
    c = tr.analyze(f, K=120)
    assert 0 <= c.parseval_defect < 1e-6
    assert np.max(np.abs(c.coeffs[-10:])) < 1e-3 * np.max(np.abs(c.coeffs))


def test_analyze_rejects_large_K():
    with pytest.raises(ValueError):
        tr.analyze(_eig({0: 1.0}), K=201)


def test_synthesize_roundtrip():
    f = _eig({0: 0.5, 2: -1.0})
    c = tr.analyze(f, K=10)
    x = np.linspace(0.1, 5, 30)
    assert np.allclose(tr.synthesize(c, x), f(x), atol=1e-9)


# -- semigroup and maximal function ---------------------------------------------------


@pytest.mark.parametrize("t", [0.05, 0.3, 2.0])
def test_semigroup_on_eigenfunction(t):
    k, alpha = 2, 1.0
    out = tr.semigroup_apply(_eig({k: 1.0}), t)
    x = out.grid.nodes
    assert np.allclose(out.values, math.exp(-t * (4 * k + alpha + 1)) * laguerre_fn(k, alpha, x), atol=1e-9)


def test_semigroup_paths_agree_on_overlap():
    f = _bump(1.0, 0.6)
    grid = tr.output_grid(f, reach=2.0, grade=False)
    for t in (0.05, 0.08):
        a = tr.semigroup_apply(f, t, grid=grid, method="spectral")
        b = tr.semigroup_apply(f, t, grid=grid, method="kernel")
        assert np.max(np.abs(a.values - b.values)) < 1e-6


def test_semigroup_strong_continuity():
    f = _eig({0: 1.0, 1: 0.3})
    errs = []
    for t in (0.1, 0.01, 0.001):
        out = tr.semigroup_apply(f, t)
        d = out.values - f(out.grid.nodes)
        errs.append(math.sqrt(out.grid.weights @ (d * d)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


@pytest.mark.parametrize("t", [0.001, 0.01, 0.2, 1.0])
def test_semigroup_contraction_and_positivity(t):
    f = _bump(2.0, 0.8)
    out = tr.semigroup_apply(f, t)
    assert out.values.min() >= -1e-10
    assert lp_norm(out, 1) <= lp_norm(f, 1) + 1e-8


def test_semigroup_rejects_bad_input():
    with pytest.raises(ValueError):
        tr.semigroup_apply(_bump(1.0, 0.5), 0.0)
    with pytest.raises(ValueError):
        tr.semigroup_apply(_bump(1.0, 0.5), 0.1, method="other")


def test_maximal_of_ground_state():
    f = _eig({0: 1.0})
    m = tr.maximal_fn(f, t_grid=np.geomspace(0.05, 20.0, 12))
    x = m.grid.nodes
    assert np.max(np.abs(m.values - math.exp(-0.05 * 2.0) * laguerre_fn(0, 1.0, x))) < 1e-8


def test_maximal_dominates_nonnegative_input():
    f = GridFunction.from_callable(lambda x: np.exp(-((x - 2.0) ** 2)), np.linspace(0.0, 8.0, 33), 1.0,
                                   tail=GAUSS_TAIL)
    m = tr.maximal_fn(f, t_grid=np.geomspace(1e-4, 2.0, 15))
    x = m.grid.nodes
    assert np.all(m.values >= f(x) - 1e-3)
    assert np.isfinite(lp_norm(m, 1))


# -- Riesz transforms -----------------------------------------------------------------


def test_riesz_spectral_ground_state():
    alpha = 1.0
    f = _eig({0: 1.0}, alpha)
    x = np.linspace(0.1, 4, 20)
    exp = -math.sqrt(math.pi) * x * (alpha + 1) ** -0.5 * laguerre_fn(0, alpha, x)
    assert np.allclose(tr.riesz_spectral(f, x=x), exp, atol=1e-9)


def test_riesz_spectral_first_eigenfunction():
    alpha = 1.0
    f = _eig({1: 1.0}, alpha)
    x = np.linspace(0.1, 4, 20)
    exp = (-math.sqrt(4 * math.pi / 6) * x * laguerre_fn(0, alpha + 2, x)
           - math.sqrt(math.pi) * x * 6**-0.5 * laguerre_fn(1, alpha, x))
    assert np.allclose(tr.riesz_spectral(f, x=x), exp, atol=1e-9)


def test_riesz_spectral_linearity():
    f, g = _eig({0: 1.0, 3: 0.2}), _bump(1.0, 0.6)
    x = np.linspace(0.2, 3, 15)
    h = GridFunction.from_callable(lambda s: 2 * f(s) - 3 * g(s), np.union1d(f.breaks, g.breaks), 1.0, tail=GAUSS_TAIL)
    lhs = tr.riesz_spectral(h, x=x)
    rhs = 2 * tr.riesz_spectral(f, x=x) - 3 * tr.riesz_spectral(g, x=x)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_riesz_spectral_matches_derivative_identity():
    # R = sqrt(pi) d/dx L^(-1/2): compare with a finite difference of the L^(-1/2) series.
    alpha = 1.5
    f = _eig({0: 0.3, 2: 1.0, 5: -0.4}, alpha)
    c = tr.analyze(f, K=10)
    beta = 4 * np.arange(11) + alpha + 1

    def inv_sqrt(s):
        return sum(c.coeffs[k] * beta[k] ** -0.5 * laguerre_fn(k, alpha, s) for k in range(11))

    x, h = np.linspace(0.3, 3.0, 10), 1e-4
    fd = (-inv_sqrt(x + 2 * h) + 8 * inv_sqrt(x + h) - 8 * inv_sqrt(x - h) + inv_sqrt(x - 2 * h)) / (12 * h)
    assert np.allclose(tr.riesz_spectral(f, K=10, x=x), math.sqrt(math.pi) * fd, atol=1e-8)


def _rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_riesz_pv_matches_spectral_on_eigen_combination():
    f = _eig({0: 0.5, 1: 1.0, 3: -0.7, 5: 0.3})
    x = np.linspace(0.2, 4.0, 9)
    assert _rel_l2(tr.riesz_pv(f, x, order=12, h_min=1e-6), tr.riesz_spectral(f, x=x)) < 1e-3


def test_riesz_pv_psi1():
    f = _eig({1: 1.0})
    x = np.linspace(0.3, 3.0, 7)
    assert _rel_l2(tr.riesz_pv(f, x, order=12, h_min=1e-6), tr.riesz_spectral(f, x=x)) < 1e-3


def test_riesz_pv_far_from_support_is_plain_quadrature():
    f = _bump(1.0, 0.2)
    x = np.array([3.0, 4.5])
    a = tr.riesz_pv(f, x, order=12, h_min=1e-6)
    b = tr.riesz_pv(f, x, order=12, h_min=0.5e-6)
    assert np.allclose(a, b, rtol=1e-8, atol=0)


def test_riesz_pv_zero():
    g = _bump(1.0, 0.5)
    z = GridFunction(g.grid, np.zeros_like(g.values))
    assert np.array_equal(tr.riesz_pv(z, [0.5, 1.0]), [0.0, 0.0])


def test_riesz_pv_rejects_nonpositive_points():
    with pytest.raises(ValueError):
        tr.riesz_pv(_bump(1.0, 0.5), [0.0])


# -- local Bessel transforms ----------------------------------------------------------


def test_local_riesz_large_m_equals_global():
    f = _bump(1.0, 0.3)
    x = np.array([0.5, 1.05, 1.6])
    loc = tr.local_riesz_bessel(f, 10.0, x, order=12, h_min=1e-6)
    glob = tr.bessel_riesz(f, x, order=12, h_min=1e-6)
    assert np.allclose(loc, glob, rtol=1e-8, atol=1e-12)


def test_local_riesz_support():
    # supp f in I = B(2, 1): r~^1 f vanishes off 3I = (-1, 5).
    f = _bump(2.0, 1.0)
    assert np.array_equal(tr.local_riesz_bessel(f, 1.0, [5.01, 6.0, 9.0], order=12), [0.0, 0.0, 0.0])


def test_local_riesz_scaling():
    alpha, lam, m = 1.0, 2.5, 0.4
    base = lambda x: cutoff_phi((x - 1.0) / 0.15)
    f = GridFunction.from_callable(base, np.linspace(0.7, 1.3, 25), alpha)
    fl = GridFunction.from_callable(lambda x: lam ** (-alpha - 1) * base(x / lam), lam * np.linspace(0.7, 1.3, 25),
                                    alpha)
    x = np.array([0.81, 1.02, 1.4])
    a = tr.local_riesz_bessel(fl, lam * m, lam * x, order=12, h_min=1e-6)
    b = lam ** (-alpha - 1) * tr.local_riesz_bessel(f, m, x, order=12, h_min=1e-6)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-12)


def test_local_riesz_rejects_bad_m():
    with pytest.raises(ValueError):
        tr.local_riesz_bessel(_bump(1.0, 0.5), 0.0, [1.0])


# -- G operator and duality -----------------------------------------------------------


def test_g_op_zero_and_refinement():
    g = _bump(1.0, 0.5)
    assert np.array_equal(tr.g_op(GridFunction(g.grid, np.zeros_like(g.values)), [1.0]), [0.0])
    chi = lambda n: GridFunction.from_callable(lambda x: np.ones_like(x), np.linspace(0.9, 1.1, n), 1.0)
    x = np.array([0.7, 0.95, 1.3])
    a, b = tr.g_op(chi(3), x), tr.g_op(chi(9), x)
    assert np.all(np.isfinite(a))
    assert np.allclose(a, b, rtol=1e-6, atol=1e-9)


def test_dual_pairing():
    # <R~ f, w> = <f, R~* w> with both sides computed by the principal-value engine.
    gauss = lambda c, s: GridFunction.from_callable(lambda x: np.exp(-(((x - c) / s) ** 2)),
                                                    np.linspace(c - 5 * s, c + 5 * s, 9), 1.0)
    f, w = gauss(1.0, 0.08), gauss(1.3, 0.1)
    gf = f.grid
    gw = w.grid
    lhs = gw.weights @ (tr.bessel_riesz(f, gw.nodes, order=12, h_min=1e-6) * w(gw.nodes))
    rhs = gf.weights @ (tr.dual_riesz_bessel(w, gf.nodes, order=12, h_min=1e-6) * f(gf.nodes))
    assert lhs == pytest.approx(rhs, rel=1e-6)

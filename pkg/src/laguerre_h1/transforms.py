"""Function-level operators: spectral analysis, semigroup, maximal function, Riesz transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, Tail, gauss_legendre, grade_to_zero, panel_rule
from .kernels import (
    T_STEP,
    cutoff_phi,
    g_remainder,
    power_diff,
    laguerre_heat,
    riesz_kernel_bessel,
    riesz_kernel_laguerre,
    singular_constants,
)
from .measure import rho
from .specfun import laguerre_basis

__all__ = [
    "SpectralCoeffs",
    "analyze",
    "synthesize",
    "semigroup_apply",
    "maximal_fn",
    "riesz_spectral",
    "gamma_spectral",
    "riesz_pv",
    "local_riesz_bessel",
    "bessel_riesz",
    "g_op",
    "dual_riesz_bessel",
    "output_grid",
]

K_DEFAULT = 120
K_MAX = 200
# Spectral synthesis of e^{-t L} is used from this time on; below it the
# series needs too many terms and the kernel is applied by quadrature.
SPECTRAL_T_MIN = 0.05


@dataclass(frozen=True)
class SpectralCoeffs:
    alpha: float
    coeffs: np.ndarray
    parseval_defect: float

    @property
    def K(self):
        return self.coeffs.size - 1


def _fine_grid(grid, h_max):
    """Refinement of ``grid`` whose panels are no wider than ``h_max``."""
    b = grid.breaks
    pieces = []
    for lo, hi in zip(b[:-1], b[1:]):
        n = max(1, int(math.ceil((hi - lo) / h_max)))
        pieces.append(np.linspace(lo, hi, n + 1)[:-1])
    return Grid(grade_to_zero(np.append(np.concatenate(pieces), b[-1])), grid.alpha, grid.order)


def analyze(f, K=K_DEFAULT, tol=1e-8):
    """Coefficients c_k = <f, psi_k>, k <= K, by Gauss quadrature on a refined grid.

    Raises ValueError when the Parseval defect ||f||^2 - sum c_k^2 is below
    -tol * ||f||^2, the signature of an under-resolved grid.
    """
    if not 0 <= K <= K_MAX:
        raise ValueError(f"K must lie in [0, {K_MAX}]")
    # psi_K oscillates on the scale 1/sqrt(4K); panels of width 0.1 keep
    # Gauss-Legendre 16 far inside its exactness range.
    grid = _fine_grid(f.grid, 0.1)
    vals = f(grid.nodes)
    basis = laguerre_basis(K, f.alpha, grid.nodes)
    c = basis @ (grid.weights * vals)
    norm2 = float(grid.weights @ (vals * vals))
    defect = norm2 - float(c @ c)
    if defect < -tol * max(norm2, 1e-300):
        raise ValueError(f"Parseval defect {defect:.3g} < 0: grid under-resolves f")
    return SpectralCoeffs(f.alpha, c, defect)


def synthesize(coeffs, x):
    """sum_k c_k psi_k(x) at points or on a Grid."""
    pts = x.nodes if isinstance(x, Grid) else np.asarray(x, dtype=float)
    vals = coeffs.coeffs @ laguerre_basis(coeffs.K, coeffs.alpha, pts)
    return GridFunction(x, vals, _gauss_tail()) if isinstance(x, Grid) else vals


def _gauss_tail():
    # Finite spectral sums decay like exp(-x^2/2) times a polynomial; a
    # generous power bound is carried so norms stay honest.
    return Tail(compact=False, exponent=12.0, coefficient=1e-6)


def output_grid(f, reach, h_max=0.25, grade=True, order=None, levels=12):
    """Grid on (0, x_max + reach] containing f's panels, for transformed outputs.

    With ``grade`` the panels next to each jump of f shrink geometrically
    (``levels`` halvings), resolving the logarithmic spikes that singular
    integrals of a jump develop there.
    """
    order = order or f.grid.order
    b = f.breaks
    pts = [0.0, *b, b[-1] + reach]
    pts += list(np.arange(0.0, b[-1] + reach, h_max))
    if grade:
        for p in f.jumps():
            if p <= 0.0:
                continue
            w = min(0.25 * rho(max(p, 1e-12)), 0.25 * max(p, 1e-3))
            for j in range(levels):
                pts += [p - w * 2.0**-j, p + w * 2.0**-j]
    pts = np.unique(np.clip(pts, 0.0, b[-1] + reach))
    return Grid(grade_to_zero(pts), f.alpha, order)


def semigroup_apply(f, t, K=K_DEFAULT, grid=None, method=None):
    """T_t f on ``grid`` (default: f's grid extended by a few heat lengths).

    method=None picks spectral synthesis for t >= 0.05 and kernel quadrature
    below; "spectral" or "kernel" forces one path.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if grid is None:
        grid = output_grid(f, reach=min(6.0, 1.0 + 8.0 * math.sqrt(t)), grade=False)
    method = method or ("spectral" if t >= SPECTRAL_T_MIN else "kernel")
    if method == "spectral":
        c = analyze(f, K)
        beta = 4.0 * np.arange(c.K + 1) + f.alpha + 1.0
        damped = SpectralCoeffs(c.alpha, c.coeffs * np.exp(-t * beta), c.parseval_defect)
        return synthesize(damped, grid)
    if method != "kernel":
        raise ValueError("method must be 'spectral' or 'kernel'")
    # Source panels no wider than the heat length keep the Gaussian resolved.
    src = _fine_grid(f.grid, max(0.5 * math.sqrt(t), 1e-4))
    fy = f(src.nodes)
    keep = fy != 0.0
    ys, wf = src.nodes[keep], (src.weights * fy)[keep]
    out = np.zeros(grid.nodes.size)
    chunk = max(1, 2_000_000 // max(ys.size, 1))
    for s in range(0, grid.nodes.size, chunk):
        xs = grid.nodes[s:s + chunk]
        kern = laguerre_heat(t, xs[:, None], ys[None, :], f.alpha)
        out[s:s + chunk] = kern @ wf
    return GridFunction(grid, out, _gauss_tail())


def maximal_fn(f, t_grid=None, grid=None, K=K_DEFAULT):
    """max over a log-spaced t-grid of |T_t f|: a lower bound for sup_t |T_t f|."""
    if t_grid is None:
        t_grid = np.geomspace(1e-4, 20.0, 60)
    if grid is None:
        grid = output_grid(f, reach=6.0, grade=False)
    best = np.zeros(grid.nodes.size)
    for t in t_grid:
        best = np.maximum(best, np.abs(semigroup_apply(f, float(t), K=K, grid=grid).values))
    return GridFunction(grid, best, _gauss_tail())


def _riesz_from_coeffs(c, x):
    """Rf(x) from spectral coefficients."""
    alpha = c.alpha
    K = c.K
    k = np.arange(K + 1)
    beta = 4.0 * k + alpha + 1.0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = -math.sqrt(math.pi) * x * ((beta**-0.5 * c.coeffs) @ laguerre_basis(K, alpha, x))
    if K >= 1:
        lowered = laguerre_basis(K - 1, alpha + 2.0, x)
        w = np.sqrt(4.0 * k[1:] * math.pi / beta[1:]) * c.coeffs[1:]
        out -= x * (w @ lowered)
    return out


def riesz_spectral(f, K=K_DEFAULT, x=None):
    """Rf from the eigenfunction expansion truncated at K.

    Returns a GridFunction on f's grid, or values at ``x`` if given.
    """
    c = analyze(f, K)
    if x is not None:
        return _riesz_from_coeffs(c, x)
    return GridFunction(f.grid, _riesz_from_coeffs(c, f.grid.nodes), _gauss_tail())


def gamma_spectral(f, K=K_DEFAULT, x=None):
    """Gamma f(x) = sqrt(pi) x sum_k beta_k^(-1/2) c_k psi_k(x)."""
    c = analyze(f, K)
    pts = f.grid.nodes if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    beta = 4.0 * np.arange(c.K + 1) + c.alpha + 1.0
    return math.sqrt(math.pi) * pts * ((beta**-0.5 * c.coeffs) @ laguerre_basis(c.K, c.alpha, pts))


# -- singular integrals ----------------------------------------------------------

# Innermost graded panel around the evaluation point, relative to rho(x).
_H_MIN = 1e-9
# Evaluation points per batch; bounds the memory of the (x, y) pair arrays.
_X_BLOCK = 64


def _pv_pairs(f, x, order, cap, h_min=_H_MIN, ratio=2.0):
    """Source nodes and weights for each evaluation point.

    For every x the source panels are f's panels cut at x +- delta and
    refined geometrically (by ``ratio``) toward x.  Returns flat arrays (owner, y, w*f(y))
    and per-x data for the analytic Cauchy correction.
    """
    b = grade_to_zero(f.breaks)
    a_s, b_s = float(b[0]), float(b[-1])
    jumps = f.jumps()
    owners, ys, ws, corr = [], [], [], []
    for i, xi in enumerate(x):
        r = rho(xi)
        inside = a_s < xi < b_s
        if inside:
            near = float(np.min(np.abs(jumps - xi))) if jumps.size else math.inf
            delta = min(0.5 * near, 0.5 * r, 0.5 * xi, cap, b_s - xi, xi - a_s)
            # x on a jump of f: no symmetric window exists and the value is not a true PV
            inside = delta > 0.0
        else:
            delta = 0.0
        h = h_min * min(r, xi)
        pts = [b]
        if inside:
            pts.append([xi - delta, xi, xi + delta])
        steps = h * ratio ** np.arange(0, int(80 / math.log2(ratio)))
        steps = steps[steps < (b_s - a_s) + abs(xi - a_s) + abs(xi - b_s)]
        pts.append(xi - steps)
        pts.append(xi + steps)
        br = np.unique(np.concatenate([np.ravel(p) for p in pts]))
        br = br[(br >= a_s) & (br <= b_s)]
        # breaks a few ulps from x would give panels whose nodes round onto x
        br = br[(br == xi) | (np.abs(br - xi) >= 0.5 * h)]
        nodes, wts = panel_rule(br, order)
        fy = f(nodes)
        keep = fy != 0.0
        owners.append(np.full(int(keep.sum()), i))
        ys.append(nodes[keep])
        ws.append(wts[keep] * nodes[keep] ** f.alpha * fy[keep])
        corr.append((inside, delta, f(xi) if inside else 0.0, nodes, wts))
    return owners, ys, ws, corr


def _singular_integral(f, x, kernel, alpha, order, cap, return_error, h_min=_H_MIN, ratio=2.0, cauchy=None):
    """PV of kernel(x, y) f(y) dmu(y) by subtracting c f(x)/(x^p - y^p) on J = [x-d, x+d].

    ``cauchy`` is the coefficient c of the kernel's Cauchy part (default B).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise ValueError("evaluation points must be positive")
    if not np.any(f.values):
        z = np.zeros(x.size)
        return (z, z.copy()) if return_error else z
    B = singular_constants(alpha).B if cauchy is None else cauchy
    if x.size > _X_BLOCK:
        parts = [_singular_integral(f, x[s:s + _X_BLOCK], kernel, alpha, order, cap, True, h_min, ratio, cauchy)
                 for s in range(0, x.size, _X_BLOCK)]
        out, err = np.concatenate([q[0] for q in parts]), np.concatenate([q[1] for q in parts])
        return (out, err) if return_error else out
    p = alpha + 1.0
    owners, ys, ws, corr = _pv_pairs(f, x, order, cap, h_min, ratio)
    own = np.concatenate(owners)
    yy = np.concatenate(ys)
    ww = np.concatenate(ws)
    xx = x[own]
    kv, ke = kernel(xx, yy)
    contrib = kv * ww
    out = np.bincount(own, weights=contrib, minlength=x.size)
    err = np.bincount(own, weights=np.abs(ke * ww), minlength=x.size)
    for i, (inside, delta, fx, nodes, wts) in enumerate(corr):
        if not inside or fx == 0.0:
            continue
        xi = x[i]
        inJ = np.abs(nodes - xi) < delta
        yj = nodes[inJ]
        sub = (wts[inJ] * yj**alpha * B * fx / power_diff(xi, yj, p)).sum()
        lo, hi = xi - delta, xi + delta
        out[i] += -sub + B * fx / p * math.log(power_diff(xi, lo, p) / -power_diff(xi, hi, p))
    return (out, err) if return_error else out


def riesz_pv(f, x, order=16, step=T_STEP, h_min=_H_MIN, return_error=False, ratio=2.0):
    """Rf(x) as a principal-value integral against the Laguerre Riesz kernel.

    The Cauchy part B/(x^(alpha+1) - y^(alpha+1)) of the kernel is integrated
    in closed form on a window around x after subtracting f(x); the rest
    (logarithmic at worst) goes to graded Gauss-Legendre panels.
    """
    alpha = f.alpha
    kernel = lambda xx, yy: riesz_kernel_laguerre(xx, yy, alpha, step=step, return_error=True)
    return _singular_integral(f, x, kernel, alpha, order, math.inf, return_error, h_min, ratio)


def bessel_riesz(f, x, order=16, step=T_STEP, h_min=_H_MIN, return_error=False, ratio=2.0):
    """Global Bessel Riesz transform R~f(x), principal value."""
    alpha = f.alpha
    kernel = lambda xx, yy: riesz_kernel_bessel(xx, yy, alpha, step=step, return_error=True)
    return _singular_integral(f, x, kernel, alpha, order, math.inf, return_error, h_min, ratio)


def local_riesz_bessel(f, m, x, order=16, step=T_STEP, h_min=_H_MIN, return_error=False, ratio=2.0):
    """r~^m f(x): principal value against R~(x, y) phi((x - y)/m)."""
    if not m > 0:
        raise ValueError("m must be positive")
    alpha = f.alpha

    def kernel(xx, yy):
        phi = cutoff_phi((xx - yy) / m)
        v = np.zeros_like(xx)
        e = np.zeros_like(xx)
        on = phi > 0
        if on.any():
            kv, ke = riesz_kernel_bessel(xx[on], yy[on], alpha, step=step, return_error=True)
            v[on] = kv * phi[on]
            e[on] = ke * phi[on]
        return v, e

    return _singular_integral(f, x, kernel, alpha, order, 0.5 * m, return_error, h_min, ratio)


def g_op(f, x, order=16):
    """Gf(x): ordinary quadrature of g(x, y) f(y) dmu(y) (g is at most log-singular)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.any(f.values):
        return np.zeros(x.size)
    if x.size > _X_BLOCK:
        return np.concatenate([g_op(f, x[s:s + _X_BLOCK], order) for s in range(0, x.size, _X_BLOCK)])
    alpha = f.alpha
    owners, ys, ws, _ = _pv_pairs(f, x, order, math.inf)
    own = np.concatenate(owners)
    yy = np.concatenate(ys)
    ww = np.concatenate(ws)
    vals = g_remainder(x[own], yy, alpha) * ww
    return np.bincount(own, weights=vals, minlength=x.size)


def dual_riesz_bessel(omega, y, order=16, step=T_STEP, h_min=_H_MIN, return_error=False, ratio=2.0):
    """R~* omega(y) = lim_{eps->0} of the integral over |x - y| > eps of R~(x, y) omega(x) dmu(x).

    Same engine as `riesz_pv` with the kernel transposed; the Cauchy part of
    R~(x, y) seen from y has coefficient -B.
    """
    alpha = omega.alpha
    kernel = lambda yy, xx: riesz_kernel_bessel(xx, yy, alpha, step=step, return_error=True)
    B = singular_constants(alpha).B
    return _singular_integral(omega, y, kernel, alpha, order, math.inf, return_error, h_min, ratio, cauchy=-B)

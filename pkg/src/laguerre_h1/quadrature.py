"""Integration engines: x^alpha dx integrals, dt/sqrt(t) integrals, principal values."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .grid import GridFunction, gauss_legendre, panel_rule
from .measure import Interval, rho

__all__ = [
    "ConvergenceError",
    "PvDivergenceError",
    "integrate_mu",
    "integrate_t",
    "log_t_integral",
    "graded_breaks",
    "PvConfig",
    "richardson",
    "principal_value",
    "lp_norm",
]


class ConvergenceError(RuntimeError):
    """A quadrature did not reach its tolerance within the refinement budget."""


class PvDivergenceError(ConvergenceError):
    """Excision integrals do not settle as the excision radius shrinks."""


def _domain_bounds(domain):
    if isinstance(domain, Interval):
        return domain.left, domain.right
    if np.isscalar(domain):
        return 0.0, float(domain)
    a, b = domain
    return float(a), float(b)


def _gl_panels(fn, lo, hi, t, w):
    """Gauss-Legendre sums of ``fn`` on each panel [lo_i, hi_i]."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * t[None, :]
    vals = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    return (vals * w[None, :]).sum(axis=1) * half


def _mu_panels(f, lo, hi, alpha, t, w, tj, wj):
    """Panel integrals of f x^alpha dx.

    Panels starting at 0 use the Gauss-Jacobi rule with weight x^alpha, so
    a smooth f converges geometrically there for any alpha; the rest use
    Gauss-Legendre on f x^alpha.
    """
    out = _gl_panels(lambda x: np.asarray(f(x), dtype=float) * x**alpha, lo, hi, t, w)
    at0 = lo == 0.0
    if at0.any():
        h = hi[at0]
        x = 0.5 * h[:, None] * (1.0 + tj[None, :])
        vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        out[at0] = (vals * wj[None, :]).sum(axis=1) * (0.5 * h) ** (alpha + 1.0)
    return out


def integrate_mu(f, domain, alpha, tol=1e-10, breaks=None, order=16, max_levels=60, return_error=False):
    """Integral of f against x^alpha dx over ``domain``.

    ``domain`` is an `Interval`, a pair (a, b), or a number X_max meaning
    (0, X_max].  ``breaks`` are extra points where f may be non-smooth.
    Panels are bisected until the full-panel and two-half-panel rules agree
    to within the panel's share of ``tol``.
    """
    if isinstance(f, GridFunction):
        if breaks is None:
            breaks = f.breaks
        g = f
    else:
        g = f
    a, b = _domain_bounds(domain)
    if not b > a:
        return (0.0, 0.0) if return_error else 0.0
    pts = [a, b]
    if breaks is not None:
        pts += [float(v) for v in np.asarray(breaks).ravel() if a < v < b]
    pts = np.unique(pts)
    lo, hi = pts[:-1], pts[1:]
    t, w, _ = gauss_legendre(order)
    tj, wj = roots_jacobi(order, 0.0, alpha)

    def panels(lo, hi):
        return _mu_panels(g, lo, hi, alpha, t, w, tj, wj)

    total_width = b - a
    whole = panels(lo, hi)
    total, err_total = 0.0, 0.0
    for _ in range(max_levels):
        mid = 0.5 * (lo + hi)
        left = panels(lo, mid)
        right = panels(mid, hi)
        fine = left + right
        err = np.abs(fine - whole)
        share = tol * (hi - lo) / total_width
        done = err <= np.maximum(share, 1e-15 * np.abs(fine))
        total += fine[done].sum()
        err_total += err[done].sum()
        if done.all():
            return (float(total), float(err_total)) if return_error else float(total)
        keep = ~done
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    raise ConvergenceError(
        f"integrate_mu: {lo.size} panels unresolved after {max_levels} bisections; "
        "split integrable singularities analytically first"
    )


def integrate_t(g, tol=1e-10, decay_rate=None, power=None, amplitude=None, max_levels=60):
    """Integral of g(t) t^(-1/2) over (0, inf).

    With t = s^2 the weight becomes 2 ds.  The s-range is cut at S_max where
    the analytic tail bound drops below tol/10.  Give either ``decay_rate``
    (|g(t)| <= C e^(-decay_rate t)) or ``power`` (|g(t)| <= C t^(-power),
    power > 1/2).  ``amplitude`` is C; if omitted it is read off g at the
    cut.  Returns (value, error_estimate) where the estimate includes the
    tail bound.
    """
    if (decay_rate is None) == (power is None):
        raise ValueError("give exactly one of decay_rate or power")
    if power is not None and not power > 0.5:
        raise ValueError("power decay must beat t^(1/2)")

    def tail(T):
        if decay_rate is not None:
            C = amplitude if amplitude is not None else abs(g(T)) * math.exp(decay_rate * T)
            return C * math.exp(-decay_rate * T) / (decay_rate * math.sqrt(T))
        C = amplitude if amplitude is not None else abs(g(T)) * T**power
        return C * T ** (0.5 - power) / (power - 0.5)

    T = 1.0
    while tail(T) > tol / 10.0:
        T *= 2.0
        if T > 1e12:
            raise ConvergenceError("integrate_t: tail bound never drops below tol")
    s_max = math.sqrt(T)
    # Geometric panels toward s = 0 absorb boundary layers like exp(-c/t).
    breaks = np.concatenate([[0.0], s_max * 2.0 ** np.arange(-30, 1)])
    val, err = integrate_mu(
        lambda s: 2.0 * np.vectorize(g, otypes=[float])(s * s),
        (0.0, s_max),
        0.0,
        tol=0.9 * tol,
        breaks=breaks,
        max_levels=max_levels,
        return_error=True,
    )
    return val, err + tail(T)


def log_t_integral(fn, u_lo, u_hi, step=0.25, u_start=None):
    """Trapezoid rule in u = log t for the integral of g(t) t^(-1/2) dt.

    ``fn(t)`` takes a column of t values (shape (m, 1)) and returns an array
    (m, n) for n simultaneous integrands; ``u_lo`` and ``u_hi`` are arrays of
    length n (or scalars).  Since dt/sqrt(t) = e^(u/2) du and the integrands
    here vanish doubly-exponentially at both ends of the u-range, the
    trapezoid rule converges exponentially in 1/step.  The error estimate is
    the difference from the rule with twice the step.  ``u_start`` pins the
    first lattice point (default: min u_lo).
    """
    u_lo = np.atleast_1d(np.asarray(u_lo, dtype=float))
    u_hi = np.atleast_1d(np.asarray(u_hi, dtype=float))
    start = float(u_lo.min()) if u_start is None else float(u_start)
    n = int(math.ceil((float(u_hi.max()) - start) / step)) + 1
    if n % 2 == 0:
        n += 1
    u = start + step * np.arange(n)
    vals = fn(np.exp(u)[:, None]) * np.exp(0.5 * u)[:, None]
    inside = (u[:, None] >= u_lo[None, :] - 1e-12) & (u[:, None] <= u_hi[None, :] + 1e-12)
    vals = np.where(inside, vals, 0.0)
    fine = step * vals.sum(axis=0)
    coarse = 2.0 * step * vals[::2].sum(axis=0)
    return fine, np.abs(fine - coarse)


def graded_breaks(a, b, point, h_min, ratio=2.0):
    """Panel boundaries on [a, b] refining geometrically toward ``point``.

    Panels adjacent to ``point`` have width ``h_min``; widths grow by
    ``ratio`` moving away.  ``point`` itself is a boundary when inside.
    """
    pts = [a, b]
    point = min(max(point, a), b)
    pts.append(point)
    for sign, end in ((-1.0, a), (1.0, b)):
        h = h_min
        x = point + sign * h
        while (x - end) * sign < 0:
            pts.append(x)
            h *= ratio
            x = point + sign * h
    return np.unique(np.asarray(pts, dtype=float))


@dataclass(frozen=True)
class PvConfig:
    """Excision radii eps_j = eps0 * ratio^j, j < levels, and the Richardson depth.

    eps0=None means min(rho(x), x)/8 at the evaluation point.
    """

    eps0: float | None = None
    ratio: float = 0.5
    levels: int = 6
    order: int = 2

    def __post_init__(self):
        if self.eps0 is not None and not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.levels < 4:
            raise ValueError("need at least 4 excision levels")
        if not 0 <= self.order < self.levels - 1:
            raise ValueError("Richardson order must be below levels - 1")

    def radii(self, x):
        e0 = self.eps0 if self.eps0 is not None else min(rho(x), x) / 8.0
        return e0 * self.ratio ** np.arange(self.levels)


def richardson(values, ratio, order):
    """Extrapolate values(eps_j), eps_j = eps_0 ratio^j, to eps = 0.

    Symmetric excision of a smooth density around a Cauchy singularity
    leaves only odd powers, values = I0 + c_1 eps + c_2 eps^3 + ..., since
    the paired integrand (F(x+s) - F(x-s))/s is even in s.  Each Neville
    sweep removes one odd power.
    Returns the last column of the table (length len(values) - order).
    """
    col = np.asarray(values, dtype=float)
    for k in range(1, order + 1):
        q = ratio ** (2 * k - 1)
        col = (col[1:] - q * col[:-1]) / (1.0 - q)
    return col


def principal_value(kernel, f, x, alpha, cfg=None, support=None, tol=1e-12, return_error=False):
    """lim_{eps->0} of the integral of kernel(x, y) f(y) y^alpha over |x - y| > eps.

    ``f`` is a GridFunction or a callable with ``support`` = (a, b) (plus
    optional interior breaks as a third element).  Each excision integral is
    computed with panels graded toward x - eps and x + eps; the sequence is
    Richardson-extrapolated.  Raises PvDivergenceError when successive
    excision integrals fail to contract.
    """
    cfg = cfg or PvConfig()
    if isinstance(f, GridFunction):
        breaks = f.breaks
        a, b = float(breaks[0]), float(breaks[-1])
    else:
        if support is None:
            raise ValueError("a callable f needs support=(a, b[, breaks])")
        a, b = float(support[0]), float(support[1])
        breaks = np.asarray(support[2] if len(support) > 2 else [a, b], dtype=float)
    radii = cfg.radii(x)
    integrand = lambda y: kernel(x, y) * f(y)
    values, errs = [], []
    for eps in radii:
        total, err = 0.0, 0.0
        for lo, hi, point in ((a, x - eps, x - eps), (x + eps, b, x + eps)):
            lo, hi = max(lo, a), min(hi, b)
            if hi <= lo:
                continue
            local = graded_breaks(lo, hi, point, eps / 4.0)
            extra = breaks[(breaks > lo) & (breaks < hi)]
            v, e = integrate_mu(
                integrand, (lo, hi), alpha, tol=tol, breaks=np.concatenate([local, extra]), return_error=True
            )
            total += v
            err += e
        values.append(total)
        errs.append(err)
    values = np.asarray(values)
    diffs = np.abs(np.diff(values))
    scale = max(np.abs(values).max(), 1e-300)
    ratios = diffs[1:] / np.maximum(diffs[:-1], 1e-300)
    if diffs[-1] > 1e3 * tol * max(scale, 1.0) and np.median(ratios) > 0.9:
        raise PvDivergenceError(f"excision integrals at x={x} do not contract: {values.tolist()}")
    ext = richardson(values, cfg.ratio, cfg.order)
    value = float(ext[-1])
    err = float(abs(ext[-1] - ext[-2]) + errs[-1])
    return (value, err) if return_error else value


def lp_norm(f, p, alpha=None, tol=1e-12):
    """(integral of |f|^p x^alpha dx)^(1/p) for p in {1, 2}, tail bound included."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    alpha = f.alpha if alpha is None else alpha
    if not np.any(f.values):
        return 0.0
    b = f.breaks
    scale = float(np.max(np.abs(f.values))) ** p * max(b[-1] ** (alpha + 1.0), 1.0)
    val = integrate_mu(lambda y: np.abs(f(y)) ** p, (b[0], b[-1]), alpha, tol=tol * scale, breaks=b)
    val += f.tail.lp_bound(b[-1], p, alpha)
    return val ** (1.0 / p)

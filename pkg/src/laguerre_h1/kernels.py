"""Heat kernels, their x-derivatives and the Riesz kernels of the Laguerre and Bessel operators.

Notation shared by every routine here (nu = (alpha - 1)/2):

Laguerre, with s = sinh 2t, c = coth 2t, z = xy/s,

    T_t(x, y) = s^(-nu-1) G E_nu(z),   G = exp(-c (x-y)^2/2 - xy tanh t).

Bessel, with z = xy/(2t),

    T~_t(x, y) = (2t)^(-nu-1) exp(-(x-y)^2/(4t)) E_nu(z).

Each x-derivative comes in two algebraically equal splits.  The "far" split
keeps the two Bessel orders apart; the "near" split pulls out the explicit
factor (x - y) and writes the rest through z E_{nu+1}(z) - E_nu(z), which is
computed without cancellation.  Riesz kernels integrate the derivative
against dt/sqrt(t) with the log-time trapezoid rule of `log_t_integral`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .measure import check_alpha, rho, smooth_step
from .quadrature import log_t_integral
from .specfun import bessel_e, bessel_u_diff, laguerre_basis, log_gamma

__all__ = [
    "SingularConstants",
    "singular_constants",
    "cutoff_phi",
    "laguerre_heat",
    "bessel_heat",
    "laguerre_heat_dx",
    "bessel_heat_dx",
    "riesz_kernel_laguerre",
    "riesz_kernel_bessel",
    "power_diff",
    "singular_part",
    "h_remainder",
    "g_remainder",
    "gamma_kernel",
    "kernel_table",
    "table_to_csv",
]

# Trapezoid step in log t; 0.25 gives ~1e-13 relative on the Riesz integrals.
T_STEP = 0.25
_CHUNK = 3_000_000


@dataclass(frozen=True)
class SingularConstants:
    A: float
    B: float
    alpha: float


def singular_constants(alpha):
    alpha = check_alpha(alpha)
    A = -2.0 * math.exp(log_gamma(1.0 + 0.5 * alpha) - log_gamma(0.5 * (1.0 + alpha)))
    B = -(alpha + 1.0) / math.sqrt(math.pi)
    return SingularConstants(A, B, alpha)


def cutoff_phi(s):
    """Even C-infinity cutoff: 1 on [-3/2, 3/2], 0 outside (-2, 2)."""
    s = np.asarray(s, dtype=float)
    out = smooth_step((np.abs(s) - 1.5) / 0.5)
    return float(out) if out.ndim == 0 else out


def _nu(alpha):
    return 0.5 * (check_alpha(alpha) - 1.0)


def _ze_diff(nu, z):
    """z E_{nu+1}(z) - E_nu(z), accurate for large z where both terms agree."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    big = z > 8.0
    if big.any():
        zb = z[big]
        out[big] = bessel_u_diff(nu, zb) * np.exp(-(nu + 0.5) * np.log(zb))
    small = ~big
    if small.any():
        zs = z[small]
        out[small] = zs * bessel_e(nu + 1.0, zs) - bessel_e(nu, zs)
    return out


def _log_sinh2t(t):
    u = 2.0 * t
    with np.errstate(divide="ignore"):
        return np.where(u > 1.0, u + np.log1p(-np.exp(-2.0 * u)) - math.log(2.0), np.log(np.sinh(u)))


def _laguerre_parts(t, x, y, nu):
    """Common pieces: P = s^(-nu-1) G, z, 1/s, coth 2t, tanh t."""
    ls = _log_sinh2t(t)
    inv_s = np.exp(-ls)
    c = 1.0 / np.tanh(2.0 * t)
    th = np.tanh(t)
    logG = -0.5 * c * (x - y) ** 2 - x * y * th
    P = np.exp(-(nu + 1.0) * ls + logG)
    z = x * y * inv_s
    return P, z, inv_s, c, th


def _check_positive(*arrs):
    for a in arrs:
        if np.any(~(np.asarray(a) > 0)):
            raise ValueError("t, x and y must be positive")


def _bcast(*arrs):
    out = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in arrs])
    return [np.array(o) for o in out]


def _ret(val, shape):
    return float(val.reshape(-1)[0]) if shape == () else val.reshape(shape)


def laguerre_heat(t, x, y, alpha):
    """T_t(x, y) of the Laguerre semigroup, evaluated overflow-free."""
    nu = _nu(alpha)
    _check_positive(t, x, y)
    t, x, y = _bcast(t, x, y)
    shape = t.shape
    P, z, *_ = _laguerre_parts(t.ravel(), x.ravel(), y.ravel(), nu)
    return _ret(P * bessel_e(nu, z), shape)


def bessel_heat(t, x, y, alpha):
    """T~_t(x, y) of the Bessel semigroup, evaluated overflow-free."""
    nu = _nu(alpha)
    _check_positive(t, x, y)
    t, x, y = _bcast(t, x, y)
    shape = t.shape
    t, x, y = t.ravel(), x.ravel(), y.ravel()
    val = np.exp(-(nu + 1.0) * np.log(2.0 * t) - (x - y) ** 2 / (4.0 * t)) * bessel_e(nu, x * y / (2.0 * t))
    return _ret(val, shape)


def _laguerre_dx_flat(t, x, y, nu, split):
    P, z, inv_s, c, th = _laguerre_parts(t, x, y, nu)
    if split == "far":
        first = P * y * inv_s * z * bessel_e(nu + 1.0, z)
        second = -P * c * x * bessel_e(nu, z)
    else:
        e = bessel_e(nu, z)
        first = -P * c * (x - y) * e
        second = P * y * (_ze_diff(nu, z) * inv_s - th * e)
    return first, second


def _bessel_dx_flat(t, x, y, nu, split):
    P = np.exp(-(nu + 2.0) * np.log(2.0 * t) - (x - y) ** 2 / (4.0 * t))
    z = x * y / (2.0 * t)
    if split == "far":
        first = -P * x * bessel_e(nu, z)
        second = P * y * z * bessel_e(nu + 1.0, z)
    else:
        first = -P * (x - y) * bessel_e(nu, z)
        second = P * y * _ze_diff(nu, z)
    return first, second


def _dx_public(flat, t, x, y, alpha, split, parts):
    if split not in ("far", "near"):
        raise ValueError("split must be 'far' or 'near'")
    nu = _nu(alpha)
    _check_positive(t, x, y)
    t, x, y = _bcast(t, x, y)
    shape = t.shape
    a, b = flat(t.ravel(), x.ravel(), y.ravel(), nu, split)
    if parts:
        return _ret(a, shape), _ret(b, shape)
    return _ret(a + b, shape)


def laguerre_heat_dx(t, x, y, alpha, split="far", parts=False):
    """d/dx T_t(x, y).

    split="far" returns T[1] + T[2] (orders nu+1 and nu kept apart);
    split="near" returns T[3] + T[4], where T[3] carries the factor (x - y).
    With ``parts=True`` the two terms are returned separately.
    """
    return _dx_public(_laguerre_dx_flat, t, x, y, alpha, split, parts)


def bessel_heat_dx(t, x, y, alpha, split="far", parts=False):
    """d/dx T~_t(x, y); splits as in `laguerre_heat_dx`."""
    return _dx_public(_bessel_dx_flat, t, x, y, alpha, split, parts)


# -- Riesz kernels ---------------------------------------------------------------


def _t_integral(integrand, x, y, u_lo, u_hi, step):
    """Batched log-time trapezoid over pairs (x_i, y_i), chunked to bound memory.

    The u-lattice is anchored at multiples of ``step`` so a pair's value does
    not depend on which other pairs share its chunk.
    """
    n = x.size
    val = np.empty(n)
    err = np.empty(n)
    if n == 0:
        return val, err
    order = np.argsort(u_lo, kind="stable")
    nodes = (u_hi.max() - u_lo.min()) / step + 3.0
    count = max(1, int(_CHUNK / nodes))
    for start in range(0, n, count):
        idx = order[start:start + count]
        lo = math.floor(u_lo[idx].min() / (2 * step)) * 2 * step
        xi, yi = x[idx], y[idx]
        v, e = log_t_integral(lambda t: integrand(t, xi, yi), u_lo[idx], u_hi[idx], step, u_start=lo)
        val[idx] = v
        err[idx] = e
    return val, err


def _diag_distance(x, y):
    d = np.abs(x - y)
    if np.any(d == 0):
        raise ValueError("Riesz kernels are not defined on the diagonal x = y")
    return d


def riesz_kernel_laguerre(x, y, alpha, step=T_STEP, return_error=False):
    """R(x, y) = integral over t > 0 of d/dx T_t(x, y) dt/sqrt(t), x != y."""
    nu = _nu(alpha)
    _check_positive(x, y)
    x, y = _bcast(x, y)
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    d = _diag_distance(x, y)

    def integrand(t, xi, yi):
        far_a, far_b = _laguerre_dx_flat(*np.broadcast_arrays(t, xi, yi), nu, "far")
        out = far_a + far_b
        sel = np.broadcast_to(np.abs(xi - yi) < 0.25 * rho(yi), out.shape)
        if sel.any():
            tb, xb, yb = (np.broadcast_to(a, out.shape)[sel] for a in (t, xi, yi))
            na, nb = _laguerre_dx_flat(tb, xb, yb, nu, "near")
            out[sel] = na + nb
        return out

    u_lo = np.log(d * d / 200.0)
    u_hi = np.full_like(d, math.log(45.0 / (alpha + 1.0)))
    val, err = _t_integral(integrand, x, y, u_lo, u_hi, step)
    return (_ret(val, shape), _ret(err, shape)) if return_error else _ret(val, shape)


def _bessel_tail(x, y, nu, T):
    """Integral over (T, inf) of d/dx T~_t dt/sqrt(t), two terms in 1/t."""
    c0 = math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0))
    c1 = math.exp(-(nu + 1.0) * math.log(2.0) - math.lgamma(nu + 2.0))
    d2 = (x - y) ** 2

    def moment(p):
        return 2.0 ** (-p) * T ** (0.5 - p) / (p - 0.5)

    lead = -x * c0 * moment(nu + 2.0)
    corr = 2.0 * (0.5 * x * y * (x * c0 + y * c1) + 0.25 * x * c0 * d2) * moment(nu + 3.0)
    return lead + corr


def _riesz_bessel_direct(x, y, nu, step):
    d = _diag_distance(x, y)

    def integrand(t, xi, yi):
        tt, xx, yy = np.broadcast_arrays(t, xi, yi)
        sel = np.abs(xx - yy) < 0.25 * yy
        a, b = _bessel_dx_flat(tt, xx, yy, nu, "far")
        out = a + b
        if sel.any():
            na, nb = _bessel_dx_flat(tt[sel], xx[sel], yy[sel], nu, "near")
            out[sel] = na + nb
        return out

    u_lo = np.log(d * d / 200.0)
    u_hi = 2.0 * np.log(np.maximum(x, y)) + 14.0
    val, err = _t_integral(integrand, x, y, u_lo, u_hi, step)
    val = val + _bessel_tail(x, y, nu, np.exp(u_hi))
    return val, err


def riesz_kernel_bessel(x, y, alpha, method="homogeneous", step=T_STEP, return_error=False):
    """R~(x, y) = integral over t > 0 of d/dx T~_t(x, y) dt/sqrt(t), x != y.

    method="homogeneous" evaluates R~(x/y, 1) and rescales by y^(-alpha-1);
    method="direct" integrates at (x, y) as given.
    """
    nu = _nu(alpha)
    _check_positive(x, y)
    x, y = _bcast(x, y)
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    if method == "homogeneous":
        # Rescale only the remainder; the singular part is homogeneous of the same
        # degree and is added at (x, y) so rounding of x/y cannot break its cancellation.
        q, one = x / y, np.ones_like(y)
        val, err = _riesz_bessel_direct(q, one, nu, step)
        scale = y ** (-alpha - 1.0)
        val = (val - _singular_flat(q, one, alpha)) * scale + _singular_flat(x, y, alpha)
        err = err * scale
    elif method == "direct":
        val, err = _riesz_bessel_direct(x, y, nu, step)
    else:
        raise ValueError("method must be 'homogeneous' or 'direct'")
    return (_ret(val, shape), _ret(err, shape)) if return_error else _ret(val, shape)


def power_diff(x, y, p):
    """x^p - y^p without cancellation when y is close to x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -(x**p) * np.expm1(p * np.log1p((y - x) / x))


def _singular_flat(x, y, alpha):
    k = singular_constants(alpha)
    p = alpha + 1.0
    return (k.A - k.B) / (x**p + y**p) + k.B / power_diff(x, y, p)


def singular_part(x, y, alpha):
    """(A - B)/(x^(alpha+1) + y^(alpha+1)) + B/(x^(alpha+1) - y^(alpha+1))."""
    x, y = _bcast(x, y)
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    _diag_distance(x, y)
    return _ret(_singular_flat(x, y, alpha), shape)


def h_remainder(x, alpha, y=1.0):
    """h_y(x) = R~(x, y) - singular_part(x, y)."""
    return riesz_kernel_bessel(x, y, alpha) - singular_part(x, y, alpha)


def g_remainder(x, y, alpha):
    """g(x, y) = R(x, y) - phi((x - y)/rho(y)) singular_part(x, y)."""
    x, y = _bcast(x, y)
    return riesz_kernel_laguerre(x, y, alpha) - cutoff_phi((x - y) / rho(y)) * singular_part(x, y, alpha)


def gamma_kernel(x, y, alpha, method="time", K=200, step=T_STEP):
    """Gamma(x, y) = integral over t > 0 of x T_t(x, y) dt/sqrt(t).

    method="time" integrates in t (log-singular on the diagonal, finite
    off it); method="spectral" sums sqrt(pi) x sum_k beta_k^(-1/2)
    psi_k(x) psi_k(y) up to k = K, which converges slowly near x = y.
    """
    nu = _nu(alpha)
    _check_positive(x, y)
    x, y = _bcast(x, y)
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    if method == "spectral":
        beta = 4.0 * np.arange(K + 1) + alpha + 1.0
        bx, by = laguerre_basis(K, alpha, x), laguerre_basis(K, alpha, y)
        val = math.sqrt(math.pi) * x * ((beta[:, None] ** -0.5) * bx * by).sum(axis=0)
        return _ret(val, shape)
    if method != "time":
        raise ValueError("method must be 'time' or 'spectral'")
    d = _diag_distance(x, y)

    def integrand(t, xi, yi):
        tt, xx, yy = np.broadcast_arrays(t, xi, yi)
        P, z, *_ = _laguerre_parts(tt, xx, yy, nu)
        return xx * P * bessel_e(nu, z)

    u_lo = np.log(d * d / 200.0)
    u_hi = np.full_like(d, math.log(45.0 / (alpha + 1.0)))
    val, _ = _t_integral(integrand, x, y, u_lo, u_hi, step)
    return _ret(val, shape)


# -- tables ----------------------------------------------------------------------

_WHICH = ("T", "T-tilde", "R", "R-tilde")


def kernel_table(which, alpha, xs, ys, t=None):
    """Rows (alpha, t, x, y, value, est_error) over the grid xs x ys.

    Heat kernels need ``t``; their error column is the floating-point
    rounding bound (exact closed form up to special-function accuracy).
    """
    if which not in _WHICH:
        raise ValueError(f"which must be one of {_WHICH}")
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    if X.size == 0:
        return []
    if which in ("T", "T-tilde"):
        if t is None or not t > 0:
            raise ValueError("heat kernels need t > 0")
        fn = laguerre_heat if which == "T" else bessel_heat
        val = np.atleast_1d(fn(t, X, Y, alpha))
        err = 1e-14 * np.abs(val)
    else:
        if np.any(X == Y):
            raise ValueError("Riesz kernels are not defined on the diagonal x = y")
        if which == "R":
            val, err = riesz_kernel_laguerre(X, Y, alpha, return_error=True)
        else:
            val, err = riesz_kernel_bessel(X, Y, alpha, return_error=True)
        val, err = np.atleast_1d(val), np.atleast_1d(err)
    tcol = "" if t is None else float(t)
    return [(float(alpha), tcol, float(a), float(b), float(v), float(e)) for a, b, v, e in zip(X, Y, val, err)]


def table_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "t", "x", "y", "value", "est_error"])
    for r in rows:
        w.writerow([r[0], "" if r[1] == "" else repr(r[1]), repr(r[2]), repr(r[3]), repr(r[4]), repr(r[5])])
    return buf.getvalue()

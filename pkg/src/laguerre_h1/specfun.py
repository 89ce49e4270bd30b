"""Special functions: log-gamma, modified Bessel I_nu and Laguerre functions.

The Bessel routines are written around the exponentially scaled,
order-reduced quantity

    E_nu(x) = exp(-x) x^(-nu) I_nu(x),

which is smooth and strictly positive on [0, inf) with E_nu(0) =
2^(-nu) / Gamma(nu + 1).  Every heat kernel in this package is a product of
an explicit Gaussian factor and E_nu, so working with E_nu keeps all
evaluations free of overflow.  The related normalisation

    U_nu(x) = I_nu(x) exp(-x) sqrt(x) = E_nu(x) x^(nu + 1/2)

tends to (2 pi)^(-1/2) as x grows.

Small arguments use the power series (all terms positive, so no cancellation);
large arguments use the Hankel asymptotic expansion of U_nu.  The switch point
is ``_switch(nu)``; both branches agree to ~1e-15 there.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

__all__ = [
    "log_gamma",
    "bessel_i",
    "bessel_ie",
    "bessel_e",
    "bessel_u",
    "bessel_u_diff",
    "laguerre_poly",
    "laguerre_fn",
    "laguerre_fn_dx",
    "laguerre_fn_dxx",
    "laguerre_basis",
]

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_N_ASYMPTOTIC = 24


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("log_gamma is defined for x > 0 only")
    out = gammaln(arr)
    return float(out) if out.ndim == 0 else out


def _check_order(nu):
    nu = float(nu)
    # I_nu with nu > -1 keeps every series coefficient positive.
    if not nu > -1.0:
        raise ValueError(f"Bessel order must exceed -1, got {nu}")
    return nu


def _switch(nu):
    return 25.0 + nu * nu


@lru_cache(maxsize=64)
def _hankel_coeffs(nu):
    """a_k(nu) of U_nu(x) ~ (2 pi)^(-1/2) sum_k (-1)^k a_k(nu) x^(-k)."""
    mu = 4.0 * nu * nu
    a = np.empty(_N_ASYMPTOTIC)
    a[0] = 1.0
    for k in range(1, _N_ASYMPTOTIC):
        a[k] = a[k - 1] * (mu - (2 * k - 1) ** 2) / (k * 8.0)
    signs = (-1.0) ** np.arange(_N_ASYMPTOTIC)
    return signs * a


def _series_terms(zmax):
    # Terms of sum (x^2/4)^k / (k! Gamma(k+nu+1)) peak near k = x/2; 40 extra
    # terms past 1.2*x push the tail below 1e-17 relative for x <= 30.
    return int(1.2 * zmax) + 18


def _e_series(nu, x):
    """E_nu(x) by the power series (x moderate)."""
    q = 0.25 * x * x
    n = _series_terms(float(x.max()) if x.size else 0.0)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, n):
        term = term * q / (k * (k + nu))
        total += term
    return total * np.exp(-x - nu * math.log(2.0) - math.lgamma(nu + 1.0))


def _u_asymptotic(nu, x):
    c = _hankel_coeffs(nu)
    inv = 1.0 / x
    acc = np.full_like(x, c[-1])
    for ck in c[-2::-1]:
        acc = acc * inv + ck
    return acc * INV_SQRT_2PI


def bessel_e(nu, x):
    """E_nu(x) = exp(-x) x^(-nu) I_nu(x) for x >= 0."""
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise ValueError("bessel_e requires x >= 0")
    out = np.empty_like(x)
    big = x > _switch(nu)
    small = ~big
    if small.any():
        out[small] = _e_series(nu, x[small])
    if big.any():
        xb = x[big]
        out[big] = _u_asymptotic(nu, xb) * np.exp(-(nu + 0.5) * np.log(xb))
    return float(out[0]) if scalar else out


def bessel_u(nu, x):
    """U_nu(x) = I_nu(x) exp(-x) sqrt(x), for x > 0."""
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("bessel_u requires x > 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    big = x > _switch(nu)
    small = ~big
    if small.any():
        xs = x[small]
        out[small] = _e_series(nu, xs) * xs ** (nu + 0.5)
    if big.any():
        out[big] = _u_asymptotic(nu, x[big])
    return float(out[0]) if scalar else out


def bessel_u_diff(nu, x):
    """U_{nu+1}(x) - U_nu(x) without cancellation at large x.

    The difference is O(1/x); for large arguments it is summed term by term
    from the difference of the two Hankel expansions.
    """
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("bessel_u_diff requires x > 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    big = x > _switch(nu + 1.0)
    small = ~big
    if small.any():
        xs = x[small]
        out[small] = bessel_u(nu + 1.0, xs) - bessel_u(nu, xs)
    if big.any():
        xb = x[big]
        c = _hankel_coeffs(nu + 1.0) - _hankel_coeffs(nu)
        inv = 1.0 / xb
        acc = np.full_like(xb, c[-1])
        for ck in c[-2::-1]:
            acc = acc * inv + ck
        out[big] = acc * INV_SQRT_2PI
    return float(out[0]) if scalar else out


def bessel_ie(nu, x):
    """Exponentially scaled I_nu(x) exp(-x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return bessel_e(nu, x) * x ** float(nu)


def bessel_i(nu, x):
    """Modified Bessel function of the first kind I_nu(x), x >= 0.

    Overflows past x ~ 709 like exp(x) itself; use `bessel_u` or `bessel_e`
    for large arguments.
    """
    x = np.asarray(x, dtype=float)
    return bessel_ie(nu, x) * np.exp(x)


def laguerre_poly(k, a, x):
    """Generalised Laguerre polynomial L_k^a(x) by forward recurrence."""
    if k < 0 or int(k) != k:
        raise ValueError("degree k must be a nonnegative integer")
    if not a > -1:
        raise ValueError("type parameter a must exceed -1")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + a - x
    for n in range(1, int(k)):
        prev, cur = cur, ((2 * n + 1 + a - x) * cur - (n + a) * prev) / (n + 1)
    return cur if cur.ndim else float(cur)


def _check_alpha(alpha):
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")


def laguerre_fn(k, alpha, x):
    """Laguerre function psi_k^{(alpha-1)/2}(x), orthonormal in L^2(x^alpha dx).

    psi_k(x) = (2 k! / Gamma(k + alpha/2 + 1/2))^{1/2} L_k^{(alpha-1)/2}(x^2) e^{-x^2/2}
    """
    _check_alpha(alpha)
    a = 0.5 * (alpha - 1.0)
    x = np.asarray(x, dtype=float)
    log_norm = 0.5 * (math.log(2.0) + math.lgamma(k + 1.0) - math.lgamma(k + a + 1.0))
    s = x * x
    return np.exp(log_norm - 0.5 * s) * laguerre_poly(k, a, s)


def laguerre_fn_dx(k, alpha, x):
    """d/dx psi_k^{(alpha-1)/2}(x) = -2 sqrt(k) x psi_{k-1}^{(alpha+1)/2}(x) - x psi_k(x)."""
    x = np.asarray(x, dtype=float)
    out = -x * laguerre_fn(k, alpha, x)
    if k > 0:
        out = out - 2.0 * math.sqrt(k) * x * laguerre_fn(k - 1, alpha + 2.0, x)
    return out


def laguerre_fn_dxx(k, alpha, x):
    """Second derivative of psi_k^{(alpha-1)/2}, from the same lowering identity."""
    x = np.asarray(x, dtype=float)
    out = -laguerre_fn(k, alpha, x) - x * laguerre_fn_dx(k, alpha, x)
    if k > 0:
        lowered = laguerre_fn(k - 1, alpha + 2.0, x)
        lowered_dx = laguerre_fn_dx(k - 1, alpha + 2.0, x)
        out = out - 2.0 * math.sqrt(k) * (lowered + x * lowered_dx)
    return out


def laguerre_basis(K, alpha, x):
    """Rows psi_0..psi_K evaluated at ``x``; shape (K+1, len(x)).

    Uses the recurrence for the normalised functions directly,

        psi_{k+1} = ((2k+1+a-x^2) psi_k - sqrt(k(k+a)) psi_{k-1}) / sqrt((k+1)(k+a+1)),

    which never forms the large polynomial values.
    """
    _check_alpha(alpha)
    a = 0.5 * (alpha - 1.0)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = x * x
    out = np.empty((K + 1, x.size))
    out[0] = np.exp(0.5 * (math.log(2.0) - math.lgamma(a + 1.0)) - 0.5 * s)
    if K >= 1:
        out[1] = (1.0 + a - s) * out[0] / math.sqrt(1.0 + a)
    for k in range(1, K):
        out[k + 1] = ((2 * k + 1 + a - s) * out[k] - math.sqrt(k * (k + a)) * out[k - 1]) / math.sqrt(
            (k + 1) * (k + a + 1)
        )
    return out

"""Vectorised numpy implementations of the hot kernels.

These mirror ``_numba.py`` operation for operation; the two are checked
against each other in the test suite.
"""

import numpy as np

SERIES_LIMIT = 20.0
_MAX_TERMS = 200
_TINY_W = 1e-4


def _scaled_bessel(x, order):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < SERIES_LIMIT

    xs = x[small]
    if xs.size:
        q = 0.25 * xs * xs
        term = np.ones_like(xs) if order == 0 else 0.5 * xs
        total = term.copy()
        for k in range(1, _MAX_TERMS):
            term = term * q / (k * (k + order))
            total += term
            if np.all(term <= 1e-17 * total):
                break
        out[small] = total * np.exp(-xs)

    xl = x[~small]
    if xl.size:
        mu = 4.0 * order * order
        term = np.ones_like(xl)
        total = term.copy()
        prev = np.full_like(xl, np.inf)
        live = np.ones(xl.shape, dtype=bool)
        for k in range(1, _MAX_TERMS):
            term = term * ((2 * k - 1) ** 2 - mu) / (8.0 * k * xl)
            mag = np.abs(term)
            # the expansion is asymptotic: stop each element once terms grow
            live &= mag < prev
            total += np.where(live, term, 0.0)
            prev = mag
            live &= mag > 1e-17 * np.abs(total)
            if not live.any():
                break
        out[~small] = total / np.sqrt(2.0 * np.pi * xl)
    return out


def i0e(x):
    return _scaled_bessel(x, 0)


def i1e(x):
    return _scaled_bessel(x, 1)


def log_i0(x):
    x = np.asarray(x, dtype=np.float64)
    return x + np.log(i0e(x))


def bessel_ratio(z):
    """I1(z)/I0(z), stable for any z >= 0."""
    return i1e(z) / i0e(z)


def rician_loglik_core(y, s, v):
    """Rician log-likelihood without the sum of ln(y) terms."""
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    z = y * (s / v)
    return -n * np.log(v) - (np.dot(y, y) + n * s * s) / (2.0 * v) + np.sum(log_i0(z))


def rician_em_mean(y, s, v):
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(y * bessel_ratio(y * (s / v))))


def _g_derivs(w):
    """First and second derivative of w -> ln I0(sqrt(w))."""
    g1 = np.empty_like(w)
    g2 = np.empty_like(w)
    tiny = w < _TINY_W
    wt = w[tiny]
    g1[tiny] = 0.25 - wt / 32.0 + wt * wt / 192.0
    g2[tiny] = -1.0 / 32.0 + wt / 96.0
    wb = w[~tiny]
    t = np.sqrt(wb)
    a = bessel_ratio(t)
    g1[~tiny] = 0.5 * a / t
    g2[~tiny] = (t - 2.0 * a - a * a * t) / (4.0 * t * t * t)
    return g1, g2


def rician_newton_terms(y, u, v):
    """Log-likelihood core, gradient and Hessian in (u, v) = (s**2, sigma**2)."""
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    y2 = y * y
    w = y2 * (u / (v * v))
    g1, g2 = _g_derivs(w)
    z = np.sqrt(w)
    ll = -n * np.log(v) - (y2.sum() + n * u) / (2.0 * v) + np.sum(log_i0(z))

    dw_dv = -2.0 * y2 * u / v**3
    d2w_dv2 = 6.0 * y2 * u / v**4
    dw_du = y2 / (v * v)
    d2w_dudv = -2.0 * y2 / v**3

    gu = -n / (2.0 * v) + np.sum(g1 * dw_du)
    gv = -n / v + (y2.sum() + n * u) / (2.0 * v * v) + np.sum(g1 * dw_dv)
    huu = np.sum(g2 * dw_du * dw_du)
    huv = n / (2.0 * v * v) + np.sum(g2 * dw_du * dw_dv + g1 * d2w_dudv)
    hvv = n / (v * v) - (y2.sum() + n * u) / v**3 + np.sum(g2 * dw_dv * dw_dv + g1 * d2w_dv2)
    return ll, gu, gv, huu, huv, hvv


def count_errors(y, bits, taus):
    """Bit errors of the rule ``y >= tau -> 1`` for every tau in ``taus``."""
    y = np.asarray(y, dtype=np.float64)
    bits = np.asarray(bits).astype(bool)
    taus = np.asarray(taus, dtype=np.float64)
    ones = np.sort(y[bits])
    zeros = np.sort(y[~bits])
    missed = np.searchsorted(ones, taus, side="left")
    false_alarm = zeros.size - np.searchsorted(zeros, taus, side="left")
    return (missed + false_alarm).astype(np.int64)

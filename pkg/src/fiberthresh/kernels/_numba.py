"""numba-compiled kernels; same contracts as ``_numpy.py``."""

import math

import numpy as np
from numba import njit

SERIES_LIMIT = 20.0
_MAX_TERMS = 200
_TINY_W = 1e-4
_SQRT_2PI = math.sqrt(2.0 * math.pi)

_opts = {"cache": True, "fastmath": False}


@njit(**_opts)
def _scaled_bessel_scalar(x, order):
    if x < SERIES_LIMIT:
        q = 0.25 * x * x
        term = 1.0 if order == 0 else 0.5 * x
        total = term
        for k in range(1, _MAX_TERMS):
            term = term * q / (k * (k + order))
            total += term
            if term <= 1e-17 * total:
                break
        return total * math.exp(-x)
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, _MAX_TERMS):
        term = term * ((2 * k - 1) ** 2 - mu) / (8.0 * k * x)
        mag = abs(term)
        if mag >= prev:
            break
        total += term
        prev = mag
        if mag <= 1e-17 * abs(total):
            break
    return total / (_SQRT_2PI * math.sqrt(x))


@njit(**_opts)
def _i0e_arr(x):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _scaled_bessel_scalar(x[i], 0)
    return out


@njit(**_opts)
def _i1e_arr(x):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _scaled_bessel_scalar(x[i], 1)
    return out


def _flat(x):
    return np.ascontiguousarray(x, dtype=np.float64).ravel()


def i0e(x):
    x = np.asarray(x, dtype=np.float64)
    return _i0e_arr(_flat(x)).reshape(x.shape)


def i1e(x):
    x = np.asarray(x, dtype=np.float64)
    return _i1e_arr(_flat(x)).reshape(x.shape)


def log_i0(x):
    x = np.asarray(x, dtype=np.float64)
    return x + np.log(i0e(x))


def bessel_ratio(z):
    z = np.asarray(z, dtype=np.float64)
    return i1e(z) / i0e(z)


@njit(**_opts)
def _loglik_core(y, s, v):
    n = y.size
    acc = 0.0
    sq = 0.0
    for i in range(n):
        z = y[i] * s / v
        acc += z + math.log(_scaled_bessel_scalar(z, 0))
        sq += y[i] * y[i]
    return -n * math.log(v) - (sq + n * s * s) / (2.0 * v) + acc


def rician_loglik_core(y, s, v):
    return float(_loglik_core(_flat(y), float(s), float(v)))


@njit(**_opts)
def _em_mean(y, s, v):
    acc = 0.0
    for i in range(y.size):
        z = y[i] * s / v
        acc += y[i] * _scaled_bessel_scalar(z, 1) / _scaled_bessel_scalar(z, 0)
    return acc / y.size


def rician_em_mean(y, s, v):
    return float(_em_mean(_flat(y), float(s), float(v)))


@njit(**_opts)
def _newton_terms(y, u, v):
    n = y.size
    v2 = v * v
    v3 = v2 * v
    v4 = v3 * v
    ll_acc = 0.0
    sq = 0.0
    gu = 0.0
    gv = 0.0
    huu = 0.0
    huv = 0.0
    hvv = 0.0
    for i in range(n):
        y2 = y[i] * y[i]
        sq += y2
        w = y2 * u / v2
        t = math.sqrt(w)
        ll_acc += t + math.log(_scaled_bessel_scalar(t, 0))
        if w < _TINY_W:
            g1 = 0.25 - w / 32.0 + w * w / 192.0
            g2 = -1.0 / 32.0 + w / 96.0
        else:
            a = _scaled_bessel_scalar(t, 1) / _scaled_bessel_scalar(t, 0)
            g1 = 0.5 * a / t
            g2 = (t - 2.0 * a - a * a * t) / (4.0 * t * t * t)
        dw_du = y2 / v2
        dw_dv = -2.0 * y2 * u / v3
        gu += g1 * dw_du
        gv += g1 * dw_dv
        huu += g2 * dw_du * dw_du
        huv += g2 * dw_du * dw_dv + g1 * (-2.0 * y2 / v3)
        hvv += g2 * dw_dv * dw_dv + g1 * (6.0 * y2 * u / v4)
    ll = -n * math.log(v) - (sq + n * u) / (2.0 * v) + ll_acc
    gu += -n / (2.0 * v)
    gv += -n / v + (sq + n * u) / (2.0 * v2)
    huv += n / (2.0 * v2)
    hvv += n / v2 - (sq + n * u) / v3
    return ll, gu, gv, huu, huv, hvv


def rician_newton_terms(y, u, v):
    return tuple(float(t) for t in _newton_terms(_flat(y), float(u), float(v)))


@njit(**_opts)
def _count_errors(y, bits, taus):
    out = np.zeros(taus.size, dtype=np.int64)
    for i in range(y.size):
        yi = y[i]
        one = bits[i] != 0
        for j in range(taus.size):
            if (yi >= taus[j]) != one:
                out[j] += 1
    return out


def count_errors(y, bits, taus):
    return _count_errors(
        _flat(y),
        np.ascontiguousarray(bits, dtype=np.uint8).ravel(),
        _flat(taus),
    )

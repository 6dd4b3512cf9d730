"""Modified Bessel functions of the first kind, orders 0 and 1.

Power series below x = 20, the large-argument asymptotic expansion above.
The exponentially scaled forms ``i0e(x) = exp(-x) I0(x)`` are what the
likelihood code uses; ``log_bessel_i0`` stays finite far past the point
where ``bessel_i0`` overflows (x ~ 713).
"""

import numpy as np

from . import kernels
from .kernels._numpy import SERIES_LIMIT
from .errors import DomainError


def _checked(x):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("Bessel argument must be >= 0")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def bessel_i0e(x):
    arr = _checked(x)
    return _out(kernels.i0e(arr), x)


def bessel_i1e(x):
    arr = _checked(x)
    return _out(kernels.i1e(arr), x)


def bessel_i0(x):
    """I0(x) for x >= 0. Overflows to inf beyond x ~ 713; use log_bessel_i0 there."""
    arr = _checked(x)
    with np.errstate(over="ignore"):
        val = kernels.i0e(arr) * np.exp(arr)
    small = arr < SERIES_LIMIT
    if np.any(small):
        # direct series: exp(x) * i0e(x) can round just below 1 for tiny x
        val = np.where(small, _i0_series(np.where(small, arr, 0.0)), val)
    return _out(val, x)


def _i0_series(x):
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, 200):
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total


def log_bessel_i0(x):
    arr = _checked(x)
    return _out(kernels.log_i0(arr), x)

"""Hot numeric kernels, dispatched to numba or numpy at import time."""

from .._accel import BACKEND, HAVE_NUMBA

if HAVE_NUMBA:
    from ._numba import (
        bessel_ratio,
        count_errors,
        i0e,
        i1e,
        log_i0,
        rician_em_mean,
        rician_loglik_core,
        rician_newton_terms,
    )
else:
    from ._numpy import (
        bessel_ratio,
        count_errors,
        i0e,
        i1e,
        log_i0,
        rician_em_mean,
        rician_loglik_core,
        rician_newton_terms,
    )

__all__ = [
    "BACKEND",
    "bessel_ratio",
    "count_errors",
    "i0e",
    "i1e",
    "log_i0",
    "rician_em_mean",
    "rician_loglik_core",
    "rician_newton_terms",
]

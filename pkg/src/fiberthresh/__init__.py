"""Adaptive threshold detection for intensity-modulated fiber links.

The receiver fits a Rayleigh law to the pooled received levels, takes the
fitted scale plus an offset as its decision threshold and decodes
``y >= tau`` as a one.
"""

from ._accel import BACKEND
from .bessel import bessel_i0, bessel_i0e, bessel_i1e, log_bessel_i0
from .channel import LinkConfig, TransmissionRecord, attenuation_gain, generate_bits, modulate, propagate, transmit
from .detector import (
    Threshold,
    adapt_threshold,
    baseline_mean_threshold,
    baseline_midpoint_threshold,
    compute_threshold,
    detect_bit,
    detect_stream,
    tune_epsilon,
)
from .distfit import (
    FitResult,
    Family,
    RayleighParams,
    RicianParams,
    bic,
    estimate_rayleigh_scale,
    estimate_rician_params,
    fit_best,
    log_likelihood,
    rayleigh_pdf,
    rician_pdf,
)
from .errors import ConfigError, ConvergenceError, DegenerateDataError, DomainError, FiberThreshError
from .harness import (
    BerReport,
    Histogram,
    HistogramSpec,
    SweepTable,
    evaluate_ber,
    histogram,
    run_trial,
    sweep_epsilon,
    sweep_separation,
)

__version__ = "0.1.0"

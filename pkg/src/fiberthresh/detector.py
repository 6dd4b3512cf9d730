"""Decision thresholds and the binary detection rule ``y >= tau -> 1``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distfit import as_samples, estimate_rayleigh_scale
from .errors import DomainError

DEFAULT_EPSILON_GRID = tuple(float(e) for e in range(31))


@dataclass(frozen=True)
class Threshold:
    sigma: float
    epsilon: float
    tau: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma!r}")
        if not self.epsilon >= 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if self.tau != self.sigma + self.epsilon:
            raise DomainError("tau must equal sigma + epsilon")

    def scaled(self, c: float) -> "Threshold":
        return compute_threshold(self.sigma * c, self.epsilon * c)


def compute_threshold(sigma: float, epsilon: float = 0.0) -> Threshold:
    sigma = float(sigma)
    epsilon = float(epsilon)
    return Threshold(sigma, epsilon, sigma + epsilon)


def _tau(threshold):
    return threshold.tau if isinstance(threshold, Threshold) else float(threshold)


def detect_bit(y: float, threshold) -> int:
    if not y >= 0:
        raise DomainError(f"received level must be >= 0, got {y!r}")
    return 1 if y >= _tau(threshold) else 0


def detect_stream(samples, threshold) -> np.ndarray:
    """Elementwise detection; returns a uint8 array the length of ``samples``."""
    y = as_samples(samples)
    return (y >= _tau(threshold)).astype(np.uint8)


def adapt_threshold(samples, epsilon: float = 0.0) -> Threshold:
    """Pooled Rayleigh scale of ``samples`` plus ``epsilon``."""
    return compute_threshold(estimate_rayleigh_scale(samples).sigma, epsilon)


def baseline_midpoint_threshold(level0: float, level1: float) -> float:
    if not (level1 > level0 >= 0):
        raise DomainError("need level1 > level0 >= 0")
    return (level0 + level1) / 2.0


def baseline_mean_threshold(samples0, samples1) -> float:
    """Midpoint of the per-symbol sample means (needs labelled data)."""
    y0 = as_samples(samples0)
    y1 = as_samples(samples1)
    if y0.size == 0 or y1.size == 0:
        raise DomainError("both symbol sample vectors must be nonempty")
    return (float(np.mean(y0)) + float(np.mean(y1))) / 2.0


def error_counts(samples, truth, taus) -> np.ndarray:
    y = as_samples(samples)
    bits = np.asarray(truth)
    if bits.shape != y.shape:
        raise DomainError("samples and truth must have the same length")
    return kernels.count_errors(y, bits, np.asarray(taus, dtype=np.float64))


def tune_epsilon(samples, truth, grid=DEFAULT_EPSILON_GRID) -> float:
    """Grid value of epsilon with the fewest bit errors; ties go to the smallest."""
    grid = [float(e) for e in grid]
    if not grid:
        raise DomainError("epsilon grid must be nonempty")
    if any(not (e >= 0 and math.isfinite(e)) for e in grid):
        raise DomainError("epsilon grid values must be finite and >= 0")
    sigma = estimate_rayleigh_scale(samples).sigma
    errors = error_counts(samples, truth, [sigma + e for e in grid])
    best = min(range(len(grid)), key=lambda i: (errors[i], grid[i]))
    return grid[best]

"""Seeded simulation of a binary intensity-modulated fiber link.

Each transmitted level ``x`` is received as::

    y = max(0, a * x * r + n)

``a`` is the deterministic attenuation gain, ``n`` zero-mean Gaussian
circuit noise and ``r = 1 - m + m * R`` a unit-mean scattering factor, with
``R`` Rayleigh distributed with mean one and ``m`` the fading depth.
``m = 1`` is pure multiplicative Rayleigh fading; ``m = 0`` switches fading
off and makes ``r == 1`` exactly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

UNIT_MEAN_RAYLEIGH_SCALE = math.sqrt(2.0 / math.pi)
_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class LinkConfig:
    """One simulated experiment. Levels are PWM duty-cycle units on 0..255."""

    p1: float = 0.5
    level0: float = 20.0
    level1: float = 70.0
    n_bits: int = 10_000
    fiber_length_m: float = 2.0
    attenuation_db_per_km: float = 0.0
    noise_sigma: float = 6.0
    fading_depth: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        _finite(self, "p1", "level0", "level1", "fiber_length_m", "attenuation_db_per_km", "noise_sigma", "fading_depth")
        if not 0.0 < self.p1 < 1.0:
            raise ConfigError("p1", f"must lie strictly between 0 and 1, got {self.p1}")
        if self.level0 < 0:
            raise ConfigError("level0", f"must be >= 0, got {self.level0}")
        if not self.level1 > self.level0:
            raise ConfigError("level1", f"must exceed level0 ({self.level0}), got {self.level1}")
        if isinstance(self.n_bits, bool) or int(self.n_bits) != self.n_bits or self.n_bits < 1:
            raise ConfigError("n_bits", f"must be a positive integer, got {self.n_bits}")
        if self.fiber_length_m < 0:
            raise ConfigError("fiber_length_m", f"must be >= 0, got {self.fiber_length_m}")
        if self.attenuation_db_per_km < 0:
            raise ConfigError("attenuation_db_per_km", f"must be >= 0, got {self.attenuation_db_per_km}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma", f"must be >= 0, got {self.noise_sigma}")
        if not 0.0 <= self.fading_depth <= 1.0:
            raise ConfigError("fading_depth", f"must lie in [0, 1], got {self.fading_depth}")
        if isinstance(self.rng_seed, bool) or int(self.rng_seed) != self.rng_seed or not 0 <= self.rng_seed <= _UINT64_MAX:
            raise ConfigError("rng_seed", f"must be an unsigned 64-bit integer, got {self.rng_seed}")
        object.__setattr__(self, "n_bits", int(self.n_bits))
        object.__setattr__(self, "rng_seed", int(self.rng_seed))

    @property
    def p0(self) -> float:
        return 1.0 - self.p1

    @property
    def separation(self) -> float:
        return self.level1 - self.level0

    def replace(self, **changes) -> "LinkConfig":
        return dataclasses.replace(self, **changes)

    def with_separation(self, separation: float) -> "LinkConfig":
        return self.replace(level1=self.level0 + separation)


def _finite(cfg, *names):
    for name in names:
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(name, f"must be a finite number, got {value!r}")


CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(LinkConfig))


@dataclass(frozen=True)
class TransmissionRecord:
    bits: np.ndarray
    tx_levels: np.ndarray
    rx_samples: np.ndarray


def generate_bits(p1: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 < p1 < 1.0:
        raise DomainError(f"p1 must lie strictly between 0 and 1, got {p1}")
    return (rng.random(n) < p1).astype(np.uint8)


def modulate(bits, level0: float, level1: float) -> np.ndarray:
    if not level1 > level0 >= 0:
        raise DomainError("need level1 > level0 >= 0")
    bits = np.asarray(bits)
    return np.where(bits.astype(bool), float(level1), float(level0))


def attenuation_gain(config: LinkConfig) -> float:
    loss_db = config.attenuation_db_per_km * config.fiber_length_m / 1000.0
    return 10.0 ** (-loss_db / 10.0)


def propagate(tx_levels, config: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(tx_levels, dtype=np.float64)
    n = x.size
    # draws are taken unconditionally so streams line up across settings
    fade = rng.rayleigh(UNIT_MEAN_RAYLEIGH_SCALE, n)
    noise = rng.standard_normal(n)
    m = config.fading_depth
    r = (1.0 - m) + m * fade
    y = attenuation_gain(config) * x * r + config.noise_sigma * noise
    return np.maximum(y, 0.0)


def transmit(config: LinkConfig) -> TransmissionRecord:
    bit_seq, chan_seq = np.random.SeedSequence(config.rng_seed).spawn(2)
    bits = generate_bits(config.p1, config.n_bits, np.random.default_rng(bit_seq))
    tx = modulate(bits, config.level0, config.level1)
    rx = propagate(tx, config, np.random.default_rng(chan_seq))
    return TransmissionRecord(bits, tx, rx)

"""BER trials, parameter sweeps and received-signal histograms."""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkConfig, transmit
from .detector import DEFAULT_EPSILON_GRID, Threshold, adapt_threshold, detect_stream, tune_epsilon
from .distfit import as_samples
from .errors import DomainError

TUNED = "tuned"
DEFAULT_TRIALS = 50
DEFAULT_SEPARATIONS = (30.0, 40.0, 50.0, 60.0, 70.0, 80.0)
DEFAULT_APRIORI = (0.5, 0.9, 0.3)
DEFAULT_HIST_BINS = 60

SWEEP_HEADER = "separation,p1,epsilon,trials,mean_ber,seed_list"
HIST_HEADER = "bin_left,bin_right,count"


@dataclass(frozen=True)
class BitErrors:
    n_bits: int
    n_errors: int
    ber: float


@dataclass(frozen=True)
class BerReport:
    n_bits: int
    n_errors: int
    ber: float
    threshold_used: Threshold
    config_echo: LinkConfig


def evaluate_ber(truth, detected) -> BitErrors:
    truth = np.asarray(truth)
    detected = np.asarray(detected)
    if truth.shape != detected.shape:
        raise DomainError(f"length mismatch: {truth.size} truth bits vs {detected.size} detected")
    if truth.size < 1:
        raise DomainError("need at least one bit")
    n_err = int(np.count_nonzero(truth.astype(bool) != detected.astype(bool)))
    return BitErrors(int(truth.size), n_err, n_err / truth.size)


def _check_policy(epsilon):
    if isinstance(epsilon, str):
        if epsilon != TUNED:
            raise DomainError(f"epsilon policy must be a number or {TUNED!r}, got {epsilon!r}")
        return epsilon
    epsilon = float(epsilon)
    if not (epsilon >= 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be finite and >= 0, got {epsilon}")
    return epsilon


def run_trial(
    config: LinkConfig,
    epsilon=0.0,
    grid=DEFAULT_EPSILON_GRID,
    train_fraction: float | None = None,
) -> BerReport:
    """Transmit one block, fit the threshold to it and count errors.

    By default the threshold is fitted to the same pooled block it detects.
    ``epsilon="tuned"`` picks epsilon from ``grid`` with the true bits.
    ``train_fraction`` fits (and tunes) on a leading share of the block and
    reports errors on the remainder only.
    """
    epsilon = _check_policy(epsilon)
    rec = transmit(config)
    fit_y, fit_bits = rec.rx_samples, rec.bits
    eval_y, eval_bits = rec.rx_samples, rec.bits
    if train_fraction is not None:
        if not 0.0 < train_fraction < 1.0:
            raise DomainError("train_fraction must lie strictly between 0 and 1")
        cut = int(round(train_fraction * config.n_bits))
        if cut < 1 or cut >= config.n_bits:
            raise DomainError("train_fraction leaves an empty train or test block")
        fit_y, fit_bits = rec.rx_samples[:cut], rec.bits[:cut]
        eval_y, eval_bits = rec.rx_samples[cut:], rec.bits[cut:]
    if epsilon == TUNED:
        epsilon = tune_epsilon(fit_y, fit_bits, grid)
    threshold = adapt_threshold(fit_y, epsilon)
    counts = evaluate_ber(eval_bits, detect_stream(eval_y, threshold))
    return BerReport(counts.n_bits, counts.n_errors, counts.ber, threshold, config)


def trial_seed(base_seed: int, index: int) -> int:
    """Sub-seed of trial ``index``: the base seed XOR the trial index."""
    return int(base_seed) ^ int(index)


@dataclass(frozen=True)
class SweepRow:
    separation: float
    p1: float
    epsilon: float | str
    trials: int
    mean_ber: float
    seeds: tuple = field(default=())

    def csv_line(self) -> str:
        eps = self.epsilon if isinstance(self.epsilon, str) else repr(float(self.epsilon))
        seeds = ";".join(str(s) for s in self.seeds)
        return f"{float(self.separation)!r},{float(self.p1)!r},{eps},{self.trials},{float(self.mean_ber)!r},{seeds}"


@dataclass(frozen=True)
class SweepTable:
    rows: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(SWEEP_HEADER + "\n")
        for row in self.rows:
            buf.write(row.csv_line() + "\n")
        return buf.getvalue()

    def by(self, p1=None, separation=None):
        return [
            r
            for r in self.rows
            if (p1 is None or r.p1 == p1) and (separation is None or r.separation == separation)
        ]


def _trial_ber(task):
    config, epsilon, grid = task
    return run_trial(config, epsilon, grid).ber


def _run_tasks(tasks, workers):
    if workers is None or workers <= 1:
        return [_trial_ber(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_ber, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _cell_configs(base, separation, p1, trials):
    cfg = base.replace(level1=base.level0 + separation, p1=p1)
    seeds = tuple(trial_seed(base.rng_seed, i) for i in range(trials))
    return seeds, [cfg.replace(rng_seed=s) for s in seeds]


def _sweep(base, cells, trials, grid, workers):
    if trials < 1:
        raise DomainError("trials must be >= 1")
    tasks = []
    layout = []
    for separation, p1, eps in cells:
        seeds, cfgs = _cell_configs(base, separation, p1, trials)
        layout.append((separation, p1, eps, seeds))
        tasks.extend((c, eps, grid) for c in cfgs)
    bers = _run_tasks(tasks, workers)
    rows = []
    for i, (separation, p1, eps, seeds) in enumerate(layout):
        chunk = bers[i * trials : (i + 1) * trials]
        rows.append(SweepRow(float(separation), float(p1), eps, trials, math.fsum(chunk) / trials, seeds))
    return SweepTable(tuple(rows))


def sweep_epsilon(config: LinkConfig, epsilons, trials: int = DEFAULT_TRIALS, workers: int = 1, grid=DEFAULT_EPSILON_GRID) -> SweepTable:
    """Mean BER for each epsilon, all other settings held at ``config``."""
    epsilons = [_check_policy(e) for e in epsilons]
    if not epsilons:
        raise DomainError("epsilon grid must be nonempty")
    cells = [(config.separation, config.p1, e) for e in epsilons]
    return _sweep(config, cells, trials, grid, workers)


def sweep_separation(
    base: LinkConfig,
    separations=DEFAULT_SEPARATIONS,
    apriori_list=DEFAULT_APRIORI,
    epsilon_policy=0.0,
    trials: int = DEFAULT_TRIALS,
    workers: int = 1,
    grid=DEFAULT_EPSILON_GRID,
) -> SweepTable:
    """Mean BER over the (apriori, separation) grid; level1 = level0 + separation."""
    separations = [float(s) for s in separations]
    if not separations or any(s <= 0 for s in separations):
        raise DomainError("separations must be positive")
    if any(b <= a for a, b in zip(separations, separations[1:])):
        raise DomainError("separations must be strictly ascending")
    eps = _check_policy(epsilon_policy)
    cells = [(sep, float(p1), eps) for p1 in apriori_list for sep in separations]
    return _sweep(base, cells, trials, grid, workers)


def replay_row(base: LinkConfig, row: SweepRow, grid=DEFAULT_EPSILON_GRID) -> float:
    """Recompute a sweep row's mean BER from its recorded seeds."""
    cfg = base.replace(level1=base.level0 + row.separation, p1=row.p1)
    bers = [run_trial(cfg.replace(rng_seed=s), row.epsilon, grid).ber for s in row.seeds]
    return math.fsum(bers) / len(bers)


@dataclass(frozen=True)
class HistogramSpec:
    bin_width: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.bin_width > 0 and math.isfinite(self.bin_width)):
            raise DomainError("bin_width must be positive and finite")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi > self.lo):
            raise DomainError("histogram range must satisfy lo < hi")

    @property
    def n_bins(self) -> int:
        return max(1, math.ceil((self.hi - self.lo) / self.bin_width - 1e-9))

    @classmethod
    def default_for(cls, samples, n_bins: int = DEFAULT_HIST_BINS) -> "HistogramSpec":
        y = as_samples(samples)
        if y.size == 0:
            return cls(1.0, 0.0, 1.0)
        lo, hi = float(y.min()), float(y.max())
        if hi <= lo:
            return cls(1.0, lo, lo + 1.0)
        return cls((hi - lo) / n_bins, lo, hi)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    out_of_range: int
    tau: float | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        tau = "nan" if self.tau is None else repr(float(self.tau))
        buf.write(f"# tau={tau}\n")
        buf.write(HIST_HEADER + "\n")
        for left, right, count in zip(self.edges[:-1], self.edges[1:], self.counts):
            buf.write(f"{float(left)!r},{float(right)!r},{int(count)}\n")
        return buf.getvalue()


def histogram(samples, spec: HistogramSpec | None = None, threshold=None) -> Histogram:
    """Fixed-width bin counts. Bins are [left, right) except the last, which
    also takes samples equal to ``spec.hi``."""
    y = as_samples(samples)
    if spec is None:
        spec = HistogramSpec.default_for(y)
    nb = spec.n_bins
    edges = spec.lo + spec.bin_width * np.arange(nb + 1, dtype=np.float64)
    edges[-1] = max(edges[-1], spec.hi)
    inside = (y >= spec.lo) & (y <= edges[-1])
    idx = np.floor((y[inside] - spec.lo) / spec.bin_width).astype(np.int64)
    idx = np.clip(idx, 0, nb - 1)
    counts = np.bincount(idx, minlength=nb).astype(np.int64)
    tau = None
    if threshold is not None:
        tau = threshold.tau if isinstance(threshold, Threshold) else float(threshold)
    return Histogram(edges, counts, int(y.size - inside.sum()), tau)

"""Command-line front end.

Exit statuses: 0 success, 2 file error, 3 parse error (including unknown
keys), 4 validation error, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import harness
from .channel import CONFIG_KEYS, LinkConfig, transmit
from .detector import DEFAULT_EPSILON_GRID, adapt_threshold, detect_stream, tune_epsilon
from .distfit import Family, as_samples, fit_best
from .errors import ConfigError, ConvergenceError, DegenerateDataError, DomainError

EXIT_OK = 0
EXIT_FILE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_NUMERICAL = 5

SIMULATE_HEADER = "index,bit,tx_level,rx_sample"


class CliError(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _epsilon(text):
    text = str(text).strip()
    return harness.TUNED if text == harness.TUNED else float(text)


def _optional_float(text):
    text = str(text).strip()
    return None if text.lower() in ("", "none") else float(text)


@dataclass
class ExperimentParams:
    epsilon: float | str = 0.0
    epsilons: tuple = (0.0, 10.0, 15.0, 20.0)
    epsilon_grid: tuple = DEFAULT_EPSILON_GRID
    trials: int = harness.DEFAULT_TRIALS
    separations: tuple = harness.DEFAULT_SEPARATIONS
    p1_list: tuple = harness.DEFAULT_APRIORI
    workers: int = 1
    train_fraction: float | None = None
    bin_width: float | None = None
    hist_min: float | None = None
    hist_max: float | None = None


_LINK_PARSERS = {
    "p1": float,
    "level0": float,
    "level1": float,
    "n_bits": int,
    "fiber_length_m": float,
    "attenuation_db_per_km": float,
    "noise_sigma": float,
    "fading_depth": float,
    "rng_seed": int,
}

_EXPERIMENT_PARSERS = {
    "epsilon": _epsilon,
    "epsilons": lambda t: tuple(_epsilon(x) for x in t.split(",") if x.strip()),
    "epsilon_grid": _float_list,
    "trials": int,
    "separations": _float_list,
    "p1_list": _float_list,
    "workers": int,
    "train_fraction": _optional_float,
    "bin_width": _optional_float,
    "hist_min": _optional_float,
    "hist_max": _optional_float,
}

KEY_HELP = {
    "p1": "apriori probability of bit 1 (0 < p1 < 1)",
    "level0": "transmit level of bit 0, duty-cycle units (>= 0)",
    "level1": "transmit level of bit 1 (> level0)",
    "n_bits": "bits per simulated block",
    "fiber_length_m": "fiber length in meters",
    "attenuation_db_per_km": "fiber attenuation in dB/km",
    "noise_sigma": "std of additive Gaussian circuit noise",
    "fading_depth": "share of unit-mean Rayleigh scattering in the gain (0..1)",
    "rng_seed": "64-bit unsigned base seed",
    "epsilon": "threshold offset, or 'tuned' to pick it from epsilon_grid",
    "epsilons": "comma list of epsilons for sweep-eps",
    "epsilon_grid": "comma list searched when epsilon is 'tuned'",
    "trials": "trials per sweep cell",
    "separations": "comma list of level separations for sweep-sep",
    "p1_list": "comma list of apriori p1 values for sweep-sep",
    "workers": "worker processes for sweeps (1 = serial)",
    "train_fraction": "fit the threshold on this leading share of each block (none = pooled)",
    "bin_width": "histogram bin width (default (max-min)/60)",
    "hist_min": "histogram lower edge (default sample min)",
    "hist_max": "histogram upper edge (default sample max)",
}

ALL_KEYS = tuple(CONFIG_KEYS) + tuple(_EXPERIMENT_PARSERS)

assert set(_LINK_PARSERS) == set(CONFIG_KEYS)
assert set(KEY_HELP) == set(ALL_KEYS)


@dataclass
class Settings:
    link: LinkConfig
    experiment: ExperimentParams = field(default_factory=ExperimentParams)


def _read_kv(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(EXIT_FILE, f"cannot read config {path}: {exc.strerror or exc}") from exc
    pairs = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_PARSE, f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        pairs.append((key, value, f"{path}:{lineno}"))
    return pairs


def parse_config(path=None, overrides=(), seed_override=None) -> Settings:
    """Build validated settings from a key-value file plus ``key=value`` overrides.

    Overrides are applied after the file; ``seed_override`` last of all.
    """
    pairs = list(_read_kv(path)) if path else []
    for item in overrides:
        if "=" not in item:
            raise CliError(EXIT_PARSE, f"override {item!r}: expected key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        pairs.append((key, value, "override"))

    link_values = {}
    exp_values = {}
    for key, value, where in pairs:
        if key in _LINK_PARSERS:
            parser, target = _LINK_PARSERS[key], link_values
        elif key in _EXPERIMENT_PARSERS:
            parser, target = _EXPERIMENT_PARSERS[key], exp_values
        else:
            raise CliError(EXIT_PARSE, f"{where}: unknown key {key!r}")
        try:
            target[key] = parser(value)
        except ValueError as exc:
            raise CliError(EXIT_PARSE, f"{where}: bad value for {key}: {value!r}") from exc
    if seed_override is not None:
        link_values["rng_seed"] = seed_override

    try:
        link = LinkConfig(**link_values)
    except ConfigError as exc:
        raise CliError(EXIT_VALIDATION, f"invalid {exc.key}: {exc}") from exc
    experiment = ExperimentParams(**exp_values)
    _validate_experiment(experiment)
    return Settings(link, experiment)


def _validate_experiment(exp):
    def bad(key, msg):
        raise CliError(EXIT_VALIDATION, f"invalid {key}: {msg}")

    if exp.epsilon != harness.TUNED and exp.epsilon < 0:
        bad("epsilon", "must be >= 0 or 'tuned'")
    if not exp.epsilons or any(e != harness.TUNED and e < 0 for e in exp.epsilons):
        bad("epsilons", "must be a nonempty list of values >= 0")
    if not exp.epsilon_grid or min(exp.epsilon_grid) < 0:
        bad("epsilon_grid", "must be a nonempty list of values >= 0")
    if exp.trials < 1:
        bad("trials", "must be >= 1")
    seps = exp.separations
    if not seps or min(seps) <= 0 or any(b <= a for a, b in zip(seps, seps[1:])):
        bad("separations", "must be positive and strictly ascending")
    if not exp.p1_list or any(not 0 < p < 1 for p in exp.p1_list):
        bad("p1_list", "values must lie strictly between 0 and 1")
    if exp.workers < 1:
        bad("workers", "must be >= 1")
    if exp.train_fraction is not None and not 0 < exp.train_fraction < 1:
        bad("train_fraction", "must lie strictly between 0 and 1")
    if exp.bin_width is not None and exp.bin_width <= 0:
        bad("bin_width", "must be > 0")


def format_link_config(cfg: LinkConfig) -> str:
    """Serialise a LinkConfig in the key-value file format."""
    return "".join(f"{f.name} = {getattr(cfg, f.name)!r}\n" for f in dataclasses.fields(cfg))


def read_samples(path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(EXIT_FILE, f"cannot read samples {path}: {exc.strerror or exc}") from exc
    values = []
    for lineno, raw in enumerate(lines, 1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(float(text))
        except ValueError as exc:
            raise CliError(EXIT_PARSE, f"{path}:{lineno}: not a number: {text!r}") from exc
    try:
        return as_samples(values)
    except DomainError as exc:
        raise CliError(EXIT_VALIDATION, f"{path}: {exc}") from exc


def read_bits(path) -> np.ndarray:
    y = read_samples(path)
    if np.any((y != 0) & (y != 1)):
        raise CliError(EXIT_VALIDATION, f"{path}: bits must be 0 or 1")
    return y.astype(np.uint8)


def write_output(path, text: str) -> None:
    """Write ``text`` to ``path`` atomically, or to stdout when path is None/'-'."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    except OSError as exc:
        raise CliError(EXIT_FILE, f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise CliError(EXIT_FILE, f"cannot write {path}: {exc.strerror or exc}") from exc


def record_csv(rec) -> str:
    lines = [SIMULATE_HEADER]
    for i, (b, x, y) in enumerate(zip(rec.bits, rec.tx_levels, rec.rx_samples)):
        lines.append(f"{i},{int(b)},{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def _summary(text):
    print(text, file=sys.stderr)


def cmd_simulate(args, settings):
    rec = transmit(settings.link)
    write_output(args.output, record_csv(rec))
    _summary(f"simulate: n_bits={settings.link.n_bits} ones={int(rec.bits.sum())} seed={settings.link.rng_seed}")


def cmd_fit(args, settings):
    y = read_samples(args.samples)
    families = [Family(f.strip()) for f in args.families.split(",") if f.strip()]
    result = fit_best(y, families)
    write_output(args.output, json.dumps(result.as_record()) + "\n")
    _summary(f"fit: family={result.family.value} n={result.n} zeros_dropped={result.diagnostics['zeros_dropped']}")


def cmd_detect(args, settings):
    y = read_samples(args.samples)
    exp = settings.experiment
    epsilon = exp.epsilon if args.epsilon is None else _epsilon(args.epsilon)
    truth = read_bits(args.truth) if args.truth else None
    if truth is not None and truth.size != y.size:
        raise CliError(EXIT_VALIDATION, "truth and samples differ in length")
    if epsilon == harness.TUNED:
        if truth is None:
            raise CliError(EXIT_VALIDATION, "invalid epsilon: 'tuned' needs --truth")
        epsilon = tune_epsilon(y, truth, exp.epsilon_grid)
    threshold = adapt_threshold(y, epsilon)
    bits = detect_stream(y, threshold)
    write_output(args.output, "".join(f"{int(b)}\n" for b in bits))
    line = f"detect: sigma={threshold.sigma!r} epsilon={threshold.epsilon!r} tau={threshold.tau!r} n={bits.size}"
    if truth is not None:
        errs = harness.evaluate_ber(truth, bits)
        line += f" errors={errs.n_errors} ber={errs.ber!r}"
    _summary(line)


def cmd_sweep_eps(args, settings):
    exp = settings.experiment
    table = harness.sweep_epsilon(settings.link, exp.epsilons, exp.trials, exp.workers, exp.epsilon_grid)
    write_output(args.output, table.to_csv())
    _summary(f"sweep-eps: {len(table.rows)} rows x {exp.trials} trials")


def cmd_sweep_sep(args, settings):
    exp = settings.experiment
    table = harness.sweep_separation(
        settings.link, exp.separations, exp.p1_list, exp.epsilon, exp.trials, exp.workers, exp.epsilon_grid
    )
    write_output(args.output, table.to_csv())
    _summary(f"sweep-sep: {len(table.rows)} rows x {exp.trials} trials")


def cmd_hist(args, settings):
    exp = settings.experiment
    if args.samples:
        y = read_samples(args.samples)
        truth = None
    else:
        rec = transmit(settings.link)
        y, truth = rec.rx_samples, rec.bits
    epsilon = exp.epsilon
    if epsilon == harness.TUNED:
        if truth is None:
            raise CliError(EXIT_VALIDATION, "invalid epsilon: 'tuned' needs simulated data")
        epsilon = tune_epsilon(y, truth, exp.epsilon_grid)
    threshold = adapt_threshold(y, epsilon)
    spec = harness.HistogramSpec.default_for(y)
    lo = spec.lo if exp.hist_min is None else exp.hist_min
    hi = spec.hi if exp.hist_max is None else exp.hist_max
    width = (hi - lo) / harness.DEFAULT_HIST_BINS if exp.bin_width is None else exp.bin_width
    try:
        spec = harness.HistogramSpec(width, lo, hi)
    except DomainError as exc:
        raise CliError(EXIT_VALIDATION, f"invalid histogram spec: {exc}") from exc
    hist = harness.histogram(y, spec, threshold)
    write_output(args.output, hist.to_csv())
    _summary(f"hist: bins={hist.counts.size} out_of_range={hist.out_of_range} tau={threshold.tau!r}")


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "detect": cmd_detect,
    "sweep-eps": cmd_sweep_eps,
    "sweep-sep": cmd_sweep_sep,
    "hist": cmd_hist,
}


def _keys_epilog():
    width = max(len(k) for k in ALL_KEYS)
    lines = ["config keys (file lines 'key = value', or --set key=value):"]
    lines += [f"  {k.ljust(width)}  {KEY_HELP[k]}" for k in ALL_KEYS]
    lines.append("")
    lines.append("exit status: 0 ok, 2 file, 3 parse, 4 validation, 5 numerical")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="key-value config file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    common.add_argument("-o", "--output", help="output file (default stdout)")
    common.add_argument("--seed", type=int, help="override rng_seed")

    parser = argparse.ArgumentParser(
        prog="fiberthresh",
        description="Fiber-link simulation and Rayleigh-fit threshold detection.",
        epilog=_keys_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("simulate", parents=[common], help="write a transmission record CSV")
    p = sub.add_parser("fit", parents=[common], help="fit distributions to a sample file")
    p.add_argument("samples", help="file with one nonnegative value per line")
    p.add_argument("--families", default="rayleigh,rician", help="comma list of candidate families")
    p = sub.add_parser("detect", parents=[common], help="detect bits with the fitted threshold")
    p.add_argument("samples", help="file with one nonnegative value per line")
    p.add_argument("--epsilon", help="threshold offset or 'tuned' (overrides config)")
    p.add_argument("--truth", help="file of transmitted bits, one per line; reports BER")
    sub.add_parser("sweep-eps", parents=[common], help="mean BER over the epsilons list")
    sub.add_parser("sweep-sep", parents=[common], help="mean BER over separations x p1_list")
    p = sub.add_parser("hist", parents=[common], help="histogram CSV with threshold marker")
    p.add_argument("--samples", help="histogram this sample file instead of a fresh simulation")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = parse_config(args.config, args.overrides, args.seed)
        COMMANDS[args.command](args, settings)
    except CliError as exc:
        print(f"fiberthresh: error: {exc}", file=sys.stderr)
        return exc.status
    except (DegenerateDataError, ConvergenceError) as exc:
        print(f"fiberthresh: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, ValueError) as exc:
        print(f"fiberthresh: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

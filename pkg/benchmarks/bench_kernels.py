"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 1000,100000,1000000] [--repeat 5]

Prints one line per (kernel, n): best wall time of each backend and the ratio.
Both backends are checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from fiberthresh.kernels import _numpy as npk

try:
    from fiberthresh.kernels import _numba as nbk
except ImportError:  # numba not installed
    nbk = None


def best_time(fn, args, repeat):
    fn(*args)  # warm-up (and JIT compile for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    y = np.abs(8.0 + 3.0 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))
    bits = (rng.random(n) < 0.5).astype(np.uint8)
    taus = np.linspace(0.0, 30.0, 31)
    return {
        "log_i0": (y * 4.0,),
        "bessel_ratio": (y * 4.0,),
        "rician_loglik_core": (y, 8.0, 9.0),
        "rician_newton_terms": (y, 64.0, 9.0),
        "rician_em_mean": (y, 8.0, 9.0),
        "count_errors": (y, bits, taus),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,100000,1000000")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if nbk is None:
        raise SystemExit("numba is not installed; install the 'fast' extra to compare backends")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fargs in cases(n, rng).items():
            a = np.asarray(getattr(npk, name)(*fargs), dtype=np.float64)
            b = np.asarray(getattr(nbk, name)(*fargs), dtype=np.float64)
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-9)
            t_np = best_time(getattr(npk, name), fargs, args.repeat)
            t_nb = best_time(getattr(nbk, name), fargs, args.repeat)
            print(f"{name:<22}{n:>10}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>10.1f}x")


if __name__ == "__main__":
    main()

"""Compare the compiled and numpy Cauchy pair kernels.

Usage::

    python benchmarks/bench_kernels.py [--sizes 100,1000,10000] [--repeat 5]

Reports the best wall time per call for each backend, the speedup and the
largest difference between the two results.
"""
import argparse
import time

import numpy as np

from friedrichs import _kernels_py
from friedrichs.model import two_by_two_example
from friedrichs.stieltjes import SheetTag, _pair_table, log_minus_z

try:
    from friedrichs import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sizes", default="100,1000,10000,100000")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    spec = two_by_two_example(0.5)
    p, j, q, k, _ = _pair_table(spec)
    rng = np.random.default_rng(0)
    print(f"pole pairs per point: {p.size}")
    print(f"{'points':>8} {'python [s]':>12} {'cython [s]':>12} {'speedup':>8} {'max diff':>10}")
    for size in (int(s) for s in args.sizes.split(",")):
        z = rng.uniform(0.1, 10, size) - 1j * rng.uniform(0.05, 2, size)
        lz = log_minus_z(z, SheetTag.PLUS)
        t_py = best_time(lambda: _kernels_py.cauchy_pairs(z, lz, p, j, q, k), args.repeat)
        ref = _kernels_py.cauchy_pairs(z, lz, p, j, q, k)
        if _kernels_c is None:
            print(f"{size:>8} {t_py:>12.4e} {'n/a':>12} {'n/a':>8} {'n/a':>10}")
            continue
        t_c = best_time(lambda: _kernels_c.cauchy_pairs(z, lz, p, j, q, k), args.repeat)
        diff = np.max(np.abs(_kernels_c.cauchy_pairs(z, lz, p, j, q, k) - ref) / np.maximum(np.abs(ref), 1e-300))
        print(f"{size:>8} {t_py:>12.4e} {t_c:>12.4e} {t_py / t_c:>8.2f} {diff:>10.2e}")


if __name__ == "__main__":
    main()

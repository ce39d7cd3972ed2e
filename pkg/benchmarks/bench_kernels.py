"""Compare the numba and pure-numpy composition-sum kernels.

    python3 benchmarks/bench_kernels.py [--reps 5] [--sizes 10,50,100,300,1000]

Prints one row per (theta, kernel) with the median wall time and the largest
difference between the two kernels' posterior means.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bayes_exploit import _accel
from bayes_exploit._kernels import composition_sum_numba, composition_sum_numpy
from bayes_exploit.posterior import _column_tables


def _median(fn, reps):
    fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--sizes", default="10,50,100,300,1000", help="theta_b = theta_s values")
    p.add_argument("--states", type=int, default=2)
    args = p.parse_args(argv)

    n = args.states
    alpha = np.full((n, 2), 2.0)
    log_pi = np.log(np.full(n, 1.0 / n))
    print(f"numba available: {_accel.NUMBA_AVAILABLE}; default kernel: {'numba' if _accel.USE_NUMBA else 'numpy'}")
    print(f"{'theta':>12} {'terms':>10} {'numba_ms':>10} {'numpy_ms':>10} {'speedup':>8} {'max_diff':>10}")
    for t in (int(s) for s in args.sizes.split(",")):
        tables = _column_tables(alpha, log_pi, np.array([t, t]))
        terms = int(np.prod(np.diff(tables[1])))
        t_nb = _median(lambda: composition_sum_numba(alpha, *tables), args.reps)
        t_np = _median(lambda: composition_sum_numpy(alpha, *tables), args.reps)
        _, z1, a1 = composition_sum_numba(alpha, *tables)
        _, z2, a2 = composition_sum_numpy(alpha, *tables)
        diff = float(np.abs(a1 / z1 - a2 / z2).max())
        print(f"{f'({t},{t})':>12} {terms:>10} {1e3 * t_nb:>10.3f} {1e3 * t_np:>10.3f} "
              f"{t_np / t_nb:>8.1f} {diff:>10.1e}")


if __name__ == "__main__":
    main()

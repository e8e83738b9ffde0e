"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--reps 5]
"""

import argparse
import time

import numpy as np

from supbound import _backend, kernels
from supbound.field import kernel_matrix, replication_increments
from supbound.spectral import EquationSpec


def best_of(fn, reps):
    fn()  # warm-up (numba compiles here)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def sup_case(R=256):
    lam = np.array([-1.0, 1.0, -2.0, 2.0])
    k = kernel_matrix(EquationSpec.airy(), np.linspace(0, 1, 64), np.linspace(-1, 1, 64), lam)
    w = np.stack([replication_increments(1, r, np.full(4, 0.5)) for r in range(R)])
    return np.ascontiguousarray(k), w


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args(argv)
    if not _backend.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
        return
    k, w = sup_case()
    terms = 1.0 / np.arange(3, 2**20 + 3, dtype=float) ** 2
    rows = [
        (
            "grid sup, 4096 pts x 256 reps",
            lambda: kernels.sup_abs_weighted_numpy(k, w),
            lambda: kernels._sup_abs_weighted_nb(k, w, np.ones(1), False),
        ),
        (
            "series scan, 2^20 terms",
            lambda: kernels.scan_series_numpy(terms, 0.0, 0, 1e-16, 50),
            lambda: kernels._scan_series_nb(terms, 0.0, 0, 1e-16, 50),
        ),
    ]
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, f_np, f_nb in rows:
        a, b = best_of(f_np, args.reps), best_of(f_nb, args.reps)
        print(f"{name:34s} {a * 1e3:11.2f} {b * 1e3:11.2f} {a / b:8.2f}")


if __name__ == "__main__":
    main()

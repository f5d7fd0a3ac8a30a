"""Benchmark the numba split-search kernel against the pure-numpy fallback.

Both paths compute the identical Gini split search; this script measures the
throughput difference on raw kernel calls and on end-to-end forest training.

Usage:
    python3 benchmarks/bench_forest.py [--trees 100] [--rows 2000] [--cols 9]
"""

import argparse
import statistics
import time

import numpy as np

from depvet.model.forest import ForestParams, train_forest
from depvet.model.kernels import HAVE_NUMBA, _best_split_numpy, kernel_name

if HAVE_NUMBA:
    from depvet.model.kernels import _best_split_numba


def bench(fn, repeat=5):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def kernel_workload(rows, cols, seed=7, calls=200):
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(rng.random((rows, cols)))
    y = rng.integers(0, 2, rows).astype(np.float64)
    cand = np.arange(cols, dtype=np.int64)

    def run(kernel):
        def inner():
            for _ in range(calls):
                kernel(X, y, cand)
        return inner

    return X, y, cand, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--cols", type=int, default=9)
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--calls", type=int, default=200)
    args = parser.parse_args()

    print(f"active kernel: {kernel_name()} (numba available: {HAVE_NUMBA})")
    X, y, cand, run = kernel_workload(args.rows, args.cols, calls=args.calls)

    if HAVE_NUMBA:
        _best_split_numba(X, y, cand)  # trigger JIT compile outside the timing
        ref = _best_split_numba(X, y, cand)
        alt = _best_split_numpy(X, y, cand)
        assert ref == alt, "kernel outputs diverged"
        best, med = bench(run(_best_split_numba))
        print(f"kernel numba : {args.calls} calls on {args.rows}x{args.cols}: "
              f"best {best * 1e3:8.2f} ms  median {med * 1e3:8.2f} ms")
    best, med = bench(run(_best_split_numpy))
    print(f"kernel numpy : {args.calls} calls on {args.rows}x{args.cols}: "
          f"best {best * 1e3:8.2f} ms  median {med * 1e3:8.2f} ms")

    rng = np.random.default_rng(11)
    Xt = rng.random((args.rows, args.cols))
    yt = (Xt[:, 1] > 0.5).astype(np.float64)
    params = ForestParams(n_trees=args.trees)

    def train():
        train_forest(Xt, yt, params, seed=1)

    best, med = bench(train, repeat=3)
    print(f"train ({kernel_name()}): {args.trees} trees on "
          f"{args.rows}x{args.cols}: best {best:6.2f} s  median {med:6.2f} s")
    print("re-run with DEPVET_NO_NUMBA=1 to time training on the numpy path")


if __name__ == "__main__":
    main()

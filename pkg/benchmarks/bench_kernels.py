"""Benchmark the compiled kernels against the numpy fallback.

Covers the two hot loops (tree split search, quantile-regression
subgradient descent) and one composite workload (a full boosted-quantile
fit). Run from the repo root:

    python benchmarks/bench_kernels.py [--n 200000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from vitalsqr import _kernels
from vitalsqr.models.features import build_features
from vitalsqr.models.gbm import fit_gbm_qr
from vitalsqr.synthcohort import SynthConfig, generate


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_best_split(impl, n, repeats):
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(0, 100, n))
    y = np.ascontiguousarray(rng.normal(size=n))
    return timeit(lambda: impl.best_split(x, y, 20), repeats)


def bench_qr_descent(impl, n, repeats):
    rng = np.random.default_rng(1)
    Z = np.ascontiguousarray(
        np.column_stack([np.ones(n), rng.normal(size=(n, 3))])
    )
    y = Z @ np.array([1.0, 2.0, -1.0, 0.5]) + rng.normal(size=n)
    w0 = np.zeros(4)
    return timeit(
        lambda: impl.qr_descent(Z, y, w0, 0.25, 0.2, 5000, 100, 0.0), repeats
    )


def bench_gbm_fit(impl, n, repeats):
    pairs, _ = generate(SynthConfig(n_pairs=n, seed=3))
    age = np.asarray([p.age_months for p in pairs])
    bt = np.asarray([p.bt_celsius for p in pairs])
    hr = np.asarray([p.hr_bpm for p in pairs])
    X = build_features(age, bt, "raw")
    original = _kernels.best_split

    def run():
        _kernels.best_split = impl.best_split
        try:
            fit_gbm_qr(X, hr, 0.5, n_trees=50)
        finally:
            _kernels.best_split = original

    return timeit(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200_000,
                        help="array length for the split-scan benchmark")
    parser.add_argument("--qr-n", type=int, default=2_000,
                        help="rows for the subgradient benchmark (5000 iters)")
    parser.add_argument("--gbm-n", type=int, default=4462,
                        help="pairs for the boosted-fit benchmark (50 trees)")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"active backend: {_kernels.BACKEND}")
    print(f"available: {', '.join(backends)}\n")

    rows = []
    for name, impl in backends.items():
        rows.append(
            (
                name,
                bench_best_split(impl, args.n, args.repeats),
                bench_qr_descent(impl, args.qr_n, args.repeats),
                bench_gbm_fit(impl, args.gbm_n, args.repeats),
            )
        )

    header = (
        f"{'backend':<10}{f'best_split(n={args.n})':>24}"
        f"{f'qr_descent(n={args.qr_n})':>24}{f'gbm_fit(n={args.gbm_n})':>24}"
    )
    print(header)
    for name, t_split, t_qr, t_gbm in rows:
        print(f"{name:<10}{t_split * 1e3:>21.2f} ms{t_qr:>22.2f} s{t_gbm:>22.2f} s")
    if len(rows) == 2:
        by_name = {r[0]: r for r in rows}
        if "ext" in by_name and "purepy" in by_name:
            print("\nspeedup (purepy / ext):")
            for i, label in ((1, "best_split"), (2, "qr_descent"), (3, "gbm_fit")):
                ratio = by_name["purepy"][i] / by_name["ext"][i]
                print(f"  {label:<12}{ratio:>6.1f}x")


if __name__ == "__main__":
    main()

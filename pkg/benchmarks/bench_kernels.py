#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-NumPy fallback.

Builds vote graphs of increasing size from a synthetic total order with
conflict noise, then times the full rank-removal loop and the Kendall
pair counter on both backends.

    python benchmarks/bench_kernels.py [--sizes 100,200,400] [--repeats 3]
"""

import argparse
import time

import numpy as np

from camguide import _kernels_py

try:
    from camguide import _kernels
except ImportError:
    _kernels = None


def make_graph(n, seed):
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = order[i], order[j]
            if rng.random() < 0.6:
                w[a, b] = rng.uniform(0.5, 30.0)
            if rng.random() < 0.05:  # conflicting vote, resolved below
                w[b, a] = rng.uniform(0.5, 30.0)
    keep = (w > w.T) | ((w == w.T) & np.triu(np.ones((n, n), dtype=bool), 1))
    return np.where(keep, w, 0.0)


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="100,200,400")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels is None:
        print("compiled extension unavailable; showing the fallback only")

    print(f"{'n':>6} {'kernel':>12} {'numpy':>12} {'speedup':>9}   agreement")
    for n in sizes:
        w = make_graph(n, seed=n)
        t_py = best_of(lambda: _kernels_py.markov_removal_order(w, 0.05, 1e-9, 1000), args.repeats)
        if _kernels is not None:
            t_cy = best_of(lambda: _kernels.markov_removal_order(w, 0.05, 1e-9, 1000), args.repeats)
            rc, _ = _kernels.markov_removal_order(w, 0.05, 1e-9, 1000)
            rp, _ = _kernels_py.markov_removal_order(w, 0.05, 1e-9, 1000)
            agree = "exact" if np.array_equal(rc, rp) else "near (float ties)"
            print(f"{n:>6} {t_cy:>11.3f}s {t_py:>11.3f}s {t_py / t_cy:>8.2f}x   {agree}")
        else:
            print(f"{n:>6} {'-':>12} {t_py:>11.3f}s {'-':>9}")

    ranks = np.random.default_rng(1).permutation(2000)
    t_py = best_of(lambda: _kernels_py.kendall_pairs(ranks), args.repeats)
    if _kernels is not None:
        t_cy = best_of(lambda: _kernels.kendall_pairs(ranks), args.repeats)
        print(f"\nkendall_pairs(n=2000): kernel {t_cy*1e3:.2f} ms, numpy {t_py*1e3:.2f} ms, "
              f"{t_py / t_cy:.2f}x")
    else:
        print(f"\nkendall_pairs(n=2000): numpy {t_py*1e3:.2f} ms")


if __name__ == "__main__":
    main()

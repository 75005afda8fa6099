"""Compare the compiled and pure-Python edit-distance kernels.

The pairwise normalized Levenshtein matrix dominates the structure search
(one matrix per simulation run per trial), so this is the one loop worth
compiling.  Run: python benchmarks/bench_kernels.py [--sizes 50,100,200]
"""

import argparse
import time

import numpy as np

from prosim._kernels import _ckernels, _pykernels


def make_bags(rng, size, alphabet=8, max_len=12):
    return [
        [rng.integers(0, alphabet, size=rng.integers(2, max_len + 1))
         .astype(np.int32) for _ in range(size)]
        for _ in range(2)
    ]


def time_backend(fn, bag_a, bag_b, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(bag_a, bag_b)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="50,100,200,400",
                        help="comma-separated bag sizes")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    if _ckernels is None:
        print("compiled kernel unavailable; only timing the fallback")
    print(f"{'bag size':>9} {'pairs':>8} {'python':>10} {'cython':>10} "
          f"{'speedup':>8}")
    for size in sizes:
        bag_a, bag_b = make_bags(rng, size)
        t_py, ref = time_backend(_pykernels.normalized_distance_matrix,
                                 bag_a, bag_b)
        if _ckernels is not None:
            t_cy, fast = time_backend(_ckernels.normalized_distance_matrix,
                                      bag_a, bag_b)
            assert np.array_equal(ref, fast), "backends disagree"
            print(f"{size:>9} {size * size:>8} {t_py:>9.4f}s {t_cy:>9.4f}s "
                  f"{t_py / t_cy:>7.1f}x")
        else:
            print(f"{size:>9} {size * size:>8} {t_py:>9.4f}s {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()

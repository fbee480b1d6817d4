"""Benchmark the compiled displacement kernel against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--points 4096] [--sizes 64,128,256]
"""

import argparse
import time

import numpy as np

from qrestrict._kernels import BACKEND, fallback
from qrestrict._kernels import accumulate_displacement as compiled_accumulate


def _bench(fn, alphas, coeffs, N, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        out = np.zeros((N, N), dtype=np.complex128)
        t0 = time.perf_counter()
        fn(alphas, coeffs, out)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--sizes", default="64,128,256")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    alphas = (rng.uniform(-2, 2, args.points)
              + 1j * rng.uniform(-2, 2, args.points))
    coeffs = (rng.standard_normal(args.points)
              + 1j * rng.standard_normal(args.points)).astype(np.complex128)
    print(f"active backend: {BACKEND}; {args.points} displacement points")
    print(f"{'N':>6} {'compiled (s)':>14} {'fallback (s)':>14} "
          f"{'speedup':>9} {'max |diff|':>12}")
    for tok in args.sizes.split(","):
        N = int(tok)
        tc, out_c = _bench(compiled_accumulate, alphas, coeffs, N)
        tf, out_f = _bench(fallback.accumulate_displacement, alphas, coeffs,
                           N)
        diff = np.abs(out_c - out_f).max()
        print(f"{N:>6} {tc:>14.4f} {tf:>14.4f} {tf / tc:>9.2f} {diff:>12.3e}")


if __name__ == "__main__":
    main()

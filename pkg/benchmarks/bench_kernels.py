"""Compiled vs numpy Bessel kernel (J0, J1, Y0, Y1), the inner loop of every assembly.

    python3 benchmarks/bench_kernels.py [--sizes 1000,100000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fbscatter import _kernels_py

try:
    from fbscatter import _kernels
except ImportError:
    _kernels = None


def bench(fn, z, repeat):
    return min(timeit.repeat(lambda: fn(z), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,100000,562500")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernel not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'points':>8} {'numpy (s)':>11} {'cython (s)':>11} {'speedup':>8} {'rel diff':>9}")
    for n in (int(s) for s in args.sizes.split(",")):
        # distances as they occur in a cell of width 2 pi times k
        z = rng.uniform(1e-3, 12.0, n)
        t_py = bench(_kernels_py.bessel01, z, args.repeat)
        if _kernels is None:
            print(f"{n:>8} {t_py:>11.4f} {'-':>11} {'-':>8} {'-':>9}")
            continue
        t_cy = bench(_kernels.bessel01, z, args.repeat)
        diff = max((np.abs(a - b) / np.maximum(1.0, np.abs(b))).max() for a, b in
                   zip(_kernels.bessel01(z), _kernels_py.bessel01(z)))
        print(f"{n:>8} {t_py:>11.4f} {t_cy:>11.4f} {t_py / t_cy:>8.1f} {diff:>9.1e}")


if __name__ == "__main__":
    main()

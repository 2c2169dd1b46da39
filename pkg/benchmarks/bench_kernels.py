"""Compiled versus numpy Kupradze kernels.

Run with ``python benchmarks/bench_kernels.py [--sizes 500 2000] [--repeat 3]``.
Set ``ELASTOSCATTER_THREADS`` to let the compiled kernels use several threads.
Prints best-of-``repeat`` wall times and the max relative deviation between
the two backends.
"""

import argparse
import time

import numpy as np

from elastoscatter import _kernels_py

try:
    from elastoscatter import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

KP, KS, OMEGA, MU, LAM = 1.0, 2.0, 2.0, 1.0, 2.0


def cases(n, rng):
    x = rng.normal(size=(n, 3))
    x *= (2.0 / np.linalg.norm(x, axis=1))[:, None]
    y = 0.3 * rng.normal(size=(n // 4, 3))
    nu = x / np.linalg.norm(x, axis=1)[:, None]
    c = rng.normal(size=(n // 4, 3)) + 1j * rng.normal(size=(n // 4, 3))
    return {
        "kupradze_block": lambda m: m.kupradze_block(x, y, KP, KS, OMEGA, MU),
        "traction_block": lambda m: m.traction_block(x, nu, y, KP, KS, OMEGA, MU, LAM),
        "kupradze_apply": lambda m: m.kupradze_apply(x, y, c, KP, KS, OMEGA, MU),
        "traction_apply": lambda m: m.traction_apply(x, nu, y, c, KP, KS, OMEGA, MU, LAM),
    }


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels_c is None:
        print("compiled kernels are not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'targets':>8}{'sources':>8}{'numpy [s]':>12}{'compiled [s]':>14}{'speedup':>9}{'max rel dev':>13}")
    for n in args.sizes:
        for name, fn in cases(n, rng).items():
            tp, ref = best_time(lambda: fn(_kernels_py), args.repeat)
            if _kernels_c is None:
                print(f"{name:<16}{n:>8}{n // 4:>8}{tp:>12.4f}{'-':>14}{'-':>9}{'-':>13}")
                continue
            tc, out = best_time(lambda: fn(_kernels_c), args.repeat)
            dev = np.abs(out - ref).max() / np.abs(ref).max()
            print(f"{name:<16}{n:>8}{n // 4:>8}{tp:>12.4f}{tc:>14.4f}{tp / tc:>9.1f}{dev:>13.1e}")


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from liouvillekit import kernels

DA = (1.0, -1.0, 0.5, 0.5)


def cases():
    rng = np.random.default_rng(0)
    starts = np.vstack([[0.0, 0.0, 0.0], rng.random((64, 3)) * 2 - 1])
    steps = np.array([100 * 2**k for k in range(7)], dtype=np.int64)
    return {
        "a_poly_grid(2001)": lambda b: b.a_poly_grid(2001),
        "da_contact_grid(1001)": lambda b: b.da_contact_grid(*DA, 1001),
        "da_sync_birkhoff(65 orbits, T=64)": lambda b: b.da_sync_birkhoff(
            *DA, starts, 1e-2, steps),
    }


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled backend unavailable; timing the numpy fallback only")
    print(f"{'kernel':38s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_py = best_time(lambda: fn(kernels.python_backend), args.repeat)
        if compiled is None:
            print(f"{name:38s} {t_py:10.4f}")
            continue
        t_c = best_time(lambda: fn(compiled), args.repeat)
        print(f"{name:38s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark: compiled vs pure-Python exact Euclidean distance transform.

The two-pass envelope scan is the hot kernel of feature extraction (one EDT
per retained keyframe), so the package ships a Cython implementation with a
pure fallback selected at import. This script times both backends across
mask sizes and verifies they agree bit for bit.

Usage: python benchmarks/bench_edt.py [--repeats N]
"""

import argparse
import time

import numpy as np

from handstates import raster

SIZES = ((64, 64), (128, 96), (256, 256), (512, 384))
DENSITIES = (0.02, 0.2)


def time_backend(mask, backend, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        raster.squared_edt(mask, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    have_compiled = raster.edt_backend() == "compiled"
    print(f"active backend: {raster.edt_backend()}")
    if not have_compiled:
        print("compiled kernel unavailable; timing the pure backend only\n")

    rng = np.random.default_rng(0)
    header = f"{'size':>10} {'density':>8} {'pure':>12}"
    if have_compiled:
        header += f" {'compiled':>12} {'speedup':>9}"
    print(header)
    for h, w in SIZES:
        for density in DENSITIES:
            mask = rng.random((h, w)) < density
            pure = time_backend(mask, "pure", args.repeats)
            line = f"{h}x{w:>5} {density:>8.2f} {pure * 1e3:>10.2f}ms"
            if have_compiled:
                compiled = time_backend(mask, "compiled", args.repeats)
                same = np.array_equal(
                    raster.squared_edt(mask, backend="compiled"),
                    raster.squared_edt(mask, backend="pure"),
                )
                line += f" {compiled * 1e3:>10.3f}ms {pure / compiled:>8.1f}x"
                assert same, "backend outputs differ"
            print(line)
    if have_compiled:
        print("\nbackends agree bit for bit on every mask above")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the hot truncated-convolution kernel: numba vs numpy vs FFT.

The numba/numpy split is selected at import time by TRUNCON_BACKEND, so this
script runs the two direct implementations side by side in-process and adds
the FFT path for context.  Direct paths are the accuracy oracles (per-entry
relative precision); the FFT path is fastest but carries an absolute noise
floor.
"""

import argparse
import json
import time

import numpy as np

from truncon import _accel

try:
    from truncon._accel import _conv_lower_numba
except ImportError:
    _conv_lower_numba = None


def conv_fft(a, b, n):
    return np.fft.ifft(np.fft.fft(a, 2 * n) * np.fft.fft(b, 2 * n))[:n]


def bench(fn, a, b, n, warmup=3, runs=20):
    for _ in range(warmup):
        fn(a, b, n)
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn(a, b, n)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,1024,4096",
                        help="comma-separated grid sizes")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable results")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(0)
    results = []
    for n in sizes:
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        b = rng.normal(size=n) + 1j * rng.normal(size=n)
        row = {"N": n}
        row["numpy_direct_ms"] = bench(_accel._conv_lower_numpy, a, b, n) * 1e3
        if _conv_lower_numba is not None:
            row["numba_direct_ms"] = bench(_conv_lower_numba, a, b, n) * 1e3
        row["fft_ms"] = bench(conv_fft, a, b, n) * 1e3
        results.append(row)

    if args.json:
        print(json.dumps(results, indent=2))
        return

    print(f"active backend: {_accel.BACKEND}")
    cols = ["numpy_direct_ms", "numba_direct_ms", "fft_ms"]
    header = f"{'N':>6} " + " ".join(f"{c:>16}" for c in cols)
    print(header)
    for row in results:
        cells = [f"{row.get(c, float('nan')):16.3f}" for c in cols]
        print(f"{row['N']:>6} " + " ".join(cells))
    if _conv_lower_numba is not None:
        for row in results:
            ratio = row["numpy_direct_ms"] / row["numba_direct_ms"]
            print(f"N={row['N']}: numba is {ratio:.2f}x the numpy fallback")


if __name__ == "__main__":
    main()

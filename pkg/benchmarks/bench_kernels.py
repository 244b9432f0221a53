"""Benchmark the compiled contest-resolution kernel against the fallback.

Usage: python benchmarks/bench_kernels.py [--rows 200000] [--attempts 8]

Builds one realistic batch (answers, weights, latencies, budgets), resolves
it with both kernel backends, verifies the outputs are bit-identical, and
reports throughput. The same batch shape dominates the Monte Carlo
acceptance runs (10^4 contests x 50 problems).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from quorum._kernels import pyref, resolve_batch

try:
    from quorum._kernels import _core
except ImportError:
    _core = None


def build_batch(rows: int, n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    answers = rng.integers(0, 6, (rows, n)).astype(np.int64)
    weights = rng.uniform(1.0, 11.0, (rows, n))
    latencies = rng.lognormal(mean=3.0, sigma=0.6, size=(rows, n))
    budgets = rng.uniform(20.0, 342.0, rows)
    return answers, weights, latencies, budgets


def timed(impl, batch, repeats: int = 3) -> tuple[float, tuple]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = resolve_batch(*batch, impl=impl)
        best = min(best, time.perf_counter() - start)
    return best, out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--attempts", type=int, default=8)
    args = parser.parse_args()

    batch = build_batch(args.rows, args.attempts)
    py_time, py_out = timed(pyref, batch)
    print(f"python   kernel: {py_time:8.4f}s  "
          f"({args.rows / py_time:,.0f} problems/s)")

    if _core is None:
        print("compiled kernel: not built in this environment")
        return 0

    c_time, c_out = timed(_core, batch)
    print(f"compiled kernel: {c_time:8.4f}s  "
          f"({args.rows / c_time:,.0f} problems/s)")
    print(f"speedup: {py_time / c_time:.1f}x")

    for a, b, name in zip(c_out, py_out, ("final", "elapsed", "early", "ncomp")):
        if not (a == b).all():
            print(f"MISMATCH in {name}")
            return 1
    print("outputs bit-identical")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

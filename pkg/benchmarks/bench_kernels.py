#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run:  python benchmarks/bench_kernels.py [--xmax 200000]
"""

import argparse
import time

import numpy as np

from hdelta.kernels import available_backends, get_module


def bench_backend(mod, x_max):
    out = {}
    t0 = time.perf_counter()
    spf = mod.spf_sieve(x_max)
    out["spf_sieve"] = time.perf_counter() - t0

    n = x_max - 1
    cols = (np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
            np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.int64),
            np.zeros(n))
    t0 = time.perf_counter()
    mod.block_stats(spf, 1, x_max, *cols)
    out["block_stats"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    bad = mod.block_check_delta(spf, 1, x_max // 4)
    out["block_check_delta"] = time.perf_counter() - t0
    assert bad == 0

    n_busy = 166320 if x_max >= 166320 else 720  # highly composite probe
    logs = mod.divisor_logs_from_pairs(mod.factor_pairs(n_busy, spf))
    t0 = time.perf_counter()
    for _ in range(20000):
        mod.delta_max(logs)
    out["delta_max x20k"] = time.perf_counter() - t0

    qs = np.arange(1.0, 9.0)
    t0 = time.perf_counter()
    for _ in range(20000):
        mod.moments(logs, qs)
    out["moments(q=1..8) x20k"] = time.perf_counter() - t0
    return out, cols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--xmax", type=int, default=200_000)
    args = ap.parse_args()

    backends = available_backends()
    results = {}
    checks = {}
    for name in backends:
        results[name], checks[name] = bench_backend(get_module(name), args.xmax)

    if set(backends) >= {"compiled", "python"}:
        for a, b in zip(checks["compiled"], checks["python"]):
            assert np.allclose(a, b, rtol=1e-12), "backend outputs diverge"
        print(f"backends agree on all columns up to x = {args.xmax}\n")

    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'kernel':<{width}}  " + "  ".join(f"{n:>12}" for n in backends)
    if len(backends) > 1:
        header += f"  {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for key in next(iter(results.values())):
        row = f"{key:<{width}}  " + "  ".join(
            f"{results[n][key]:>11.4f}s" for n in backends)
        if len(backends) > 1:
            row += f"  {results['python'][key] / results['compiled'][key]:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the three hot paths on representative workloads: monomial merges at
Koszul-resolution shape, raw word normalization, and fraction-free
elimination on boundary-matrix-sized integer matrices.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import time

from ktforge import _kernels_py

try:
    from ktforge import _speedups
except ImportError:
    _speedups = None


def make_monomial_workload(rng, ngens=24, count=4000):
    odd = bytearray(rng.randint(0, 1) for _ in range(ngens))
    pairs = []
    for _ in range(count):
        a = sorted(rng.sample(range(ngens), rng.randint(0, 6)))
        b = sorted(rng.sample(range(ngens), rng.randint(0, 6)))
        pairs.append(
            (
                tuple((g, 1 if odd[g] else rng.randint(1, 3)) for g in a),
                tuple((g, 1 if odd[g] else rng.randint(1, 3)) for g in b),
            )
        )
    words = [
        tuple(rng.randrange(ngens) for _ in range(rng.randint(0, 8)))
        for _ in range(count)
    ]
    return odd, pairs, words


def make_matrices(rng, count=40, size=30):
    mats = []
    for _ in range(count):
        mats.append(
            [[rng.randint(-9, 9) for _ in range(size)] for _ in range(size)]
        )
    return mats


def time_backend(impl, odd, pairs, words, mats, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        for a, b in pairs:
            impl.mono_mul(a, b, odd)
    t_mul = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(repeat):
        for w in words:
            impl.mono_sort(w, odd)
    t_sort = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(repeat):
        for m in mats:
            impl.bareiss([row[:] for row in m], len(m[0]))
    t_elim = time.perf_counter() - t0
    return t_mul, t_sort, t_elim


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rng = random.Random(42)
    odd, pairs, words = make_monomial_workload(rng)
    mats = make_matrices(rng)
    rows = [("pure-python", _kernels_py)]
    if _speedups is not None:
        rows.append(("cython", _speedups))
    else:
        print("note: compiled extension not available; benchmarking fallback only")
    results = {}
    for name, impl in rows:
        results[name] = time_backend(impl, odd, pairs, words, mats, args.repeat)
    print(f"{'backend':<12} {'mono_mul':>10} {'mono_sort':>10} {'bareiss':>10}")
    for name, (a, b, c) in results.items():
        print(f"{name:<12} {a:>9.3f}s {b:>9.3f}s {c:>9.3f}s")
    if len(results) == 2:
        p = results["pure-python"]
        c = results["cython"]
        print(
            "speedup      "
            + " ".join(f"{p[i] / c[i]:>9.2f}x" for i in range(3))
        )


if __name__ == "__main__":
    main()

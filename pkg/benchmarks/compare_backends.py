#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the three hot paths (GF(256) table build, 10x10 matrix products, the
E-multiplication fold) on both backends and, with --full, the worst-case
Sym(10) lookup-table build (minutes in pure Python; pass --full-pure to
include it there too).

Usage: python benchmarks/compare_backends.py [--full] [--full-pure]
"""

import argparse
import random
import time
from math import factorial

from aelab import _purekern

try:
    from aelab import _core
except ImportError:
    _core = None


def timed(fn, repeats=1):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_backend(kern, args, shared):
    rows = {}
    rows["mul_table_build"] = timed(lambda: kern.build_mul_table(0x11B), 3)

    mul = shared["mul"]
    inv = shared["inv"]
    a, b = shared["mat_a"], shared["mat_b"]

    def matmuls():
        for _ in range(2000):
            kern.mat_mul(10, a, b, mul)

    rows["mat_mul_10x10_x2000"] = timed(matmuls, 3)

    sigma, tau, letters = shared["sigma"], shared["tau"], shared["letters"]

    def folds():
        for _ in range(500):
            kern.emul_fold(10, a, sigma, letters, tau, mul, inv)

    rows["emul_fold_240letters_x500"] = timed(folds, 3)

    gens = shared["structured_gens"]
    rows["bfs_structured"] = timed(lambda: kern.bfs_lookup_table(10, gens))

    if args.full and (kern is _core or args.full_pure):
        rows["bfs_full_sym10"] = timed(lambda: kern.bfs_lookup_table(10, shared["worst_gens"]))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--full", action="store_true", help="include the Sym(10) worst case")
    parser.add_argument("--full-pure", action="store_true",
                        help="run the worst case on the pure backend too (minutes)")
    args = parser.parse_args()

    rng = random.Random(1)
    mul = _purekern.build_mul_table(0x11B)
    shared = {
        "mul": mul,
        "inv": _purekern.build_inv_table(mul),
        "mat_a": bytes(rng.randrange(256) for _ in range(100)),
        "mat_b": bytes(rng.randrange(256) for _ in range(100)),
        "sigma": bytes(range(10)),
        "tau": bytes(rng.randrange(1, 256) for _ in range(10)),
        "letters": tuple(rng.choice([1, -1]) * rng.randrange(1, 10) for _ in range(240)),
    }

    # structured generators: conjugated 5-point permutations, like real params
    from aelab.params import generate_params

    params = generate_params(10, random.Random(2))
    shared["structured_gens"] = [bytes(p.images) for p in params.d_perms()]

    worst = [bytes([1, 0] + list(range(2, 10))), bytes(list(range(1, 10)) + [0])]
    while len(worst) < 32:
        p = list(range(10))
        rng.shuffle(p)
        worst.append(bytes(p))
    shared["worst_gens"] = worst

    backends = [("pure", _purekern)]
    if _core is not None:
        backends.append(("compiled", _core))
    else:
        print("compiled backend not importable; showing pure only")

    results = {name: bench_backend(kern, args, shared) for name, kern in backends}

    names = sorted({row for rows in results.values() for row in rows})
    width = max(len(n) for n in names) + 2
    header = f"{'benchmark':<{width}}" + "".join(f"{name:>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for n in names:
        line = f"{n:<{width}}"
        for name, _ in backends:
            value = results[name].get(n)
            line += f"{value * 1000:>12.2f}ms" if value is not None else f"{'-':>14}"
        if len(backends) == 2 and n in results["pure"] and n in results["compiled"]:
            line += f"{results['pure'][n] / results['compiled'][n]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

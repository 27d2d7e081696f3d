"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_backends.py [--repeat 5]

Times the three hot kernels on fixed inputs and two end-to-end workloads
(a positivity screen and a negativity search) under every available
backend, and checks that both backends return the same numbers.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from bidisk import _backend
from bidisk.bipoly import BiPoly
from bidisk.kernels import RKernel, negativity_search, positivity_test


def workloads():
    rng = np.random.default_rng(0)
    coeffs = np.ascontiguousarray(rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9)))
    z1 = np.ascontiguousarray(0.9 * np.exp(2j * np.pi * rng.random(4000)))
    z2 = np.ascontiguousarray(0.9 * np.exp(2j * np.pi * rng.random(4000)))
    a = np.ascontiguousarray(rng.normal(size=(30, 30)) + 0j)
    b = np.ascontiguousarray(rng.normal(size=(30, 30)) + 0j)
    fz, xz = z1[:300].copy(), z2[:300].copy()
    half = (BiPoly.constant(1) + BiPoly.z1()).scale(0.5)
    K_good = RKernel(half, BiPoly.z2())
    K_bad = RKernel(BiPoly.z1(), BiPoly.z1())
    return {
        "horner2 (deg 8, 4000 pts)": lambda: _backend.horner2(coeffs, z1, z2),
        "factor_gram (300x300)": lambda: _backend.factor_gram(fz, xz, fz, xz),
        "polymul2 (30x30 * 30x30)": lambda: _backend.polymul2(a, b, -1, -1),
        "positivity_test (200 trials)": lambda: positivity_test(K_good, 200, 12, 0).worst_min_eig,
        "negativity_search (2 pts)": lambda: negativity_search(K_bad, seed=0).value,
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    names = _backend.available()
    results, outputs = {}, {}
    for name in names:
        prev = _backend.use(name)
        try:
            for label, fn in workloads().items():
                outputs[(name, label)] = fn()
                t = min(timeit.repeat(fn, number=1, repeat=args.repeat))
                results[(name, label)] = t
        finally:
            _backend.use(prev)
    labels = list(workloads())
    width = max(map(len, labels))
    print(f"{'workload':<{width}}  " + "  ".join(f"{n:>10}" for n in names)
          + ("     speedup" if len(names) > 1 else ""))
    for label in labels:
        row = "  ".join(f"{results[(n, label)] * 1e3:>8.2f}ms" for n in names)
        if len(names) > 1:
            row += f"  {results[('python', label)] / results[(names[0], label)]:>9.1f}x"
        print(f"{label:<{width}}  {row}")
    if len(names) > 1:
        for label in labels:
            x, y = (np.asarray(outputs[(n, label)]) for n in names)
            assert np.allclose(x, y, rtol=1e-10, atol=1e-12), label
        print("outputs agree across backends")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the compiled solver kernel against the pure numpy fallback.

Runs the same feasibility problems through both backends and reports wall
times and speedups, plus a microbenchmark of the batched PSD projection
that dominates the inner loop.

Usage:
    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from incompat import _kernels
from incompat._kernels import pycore
from incompat.constructions import fourier_mub_pair, number_povm, phase_povm_binned, random_pair


def time_call(fn, *args, repeats=1):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def solver_cases(quick):
    pair2 = fourier_mub_pair(2)
    pair3 = fourier_mub_pair(3)
    m1r, m2r = random_pair(3, 3, 11)
    iters = 5000 if quick else 50000
    cases = [
        ("mub d=2 feasible lam=0.70", pair2.povm_a, pair2.povm_b, 0.70, iters),
        ("mub d=2 infeasible lam=0.72", pair2.povm_a, pair2.povm_b, 0.72, iters),
        ("mub d=3 infeasible lam=0.69", pair3.povm_a, pair3.povm_b, 0.69, iters),
        ("random d=3 feasible (0.9,0.9)", m1r, m2r, 0.9, iters),
    ]
    if not quick:
        cases.append(("number-phase d=8 infeasible lam=0.66",
                      number_povm(8), phase_povm_binned(8, 8), 0.66, 20000))
    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller iteration budgets")
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled kernel not built; showing fallback only")

    print("\n-- batched PSD projection (10k blocks) --")
    rng = np.random.default_rng(0)
    for d in (2, 4, 8):
        blocks = rng.standard_normal((10000, d, d)) + 1j * rng.standard_normal((10000, d, d))
        blocks = (blocks + np.conj(np.swapaxes(blocks, -1, -2))) / 2
        t_py, _ = time_call(pycore.psd_project_stack, blocks, repeats=3)
        line = f"d={d}: numpy {t_py * 1e3:8.1f} ms"
        if "cython" in backends:
            from incompat._kernels import _cycore
            t_cy, _ = time_call(_cycore.psd_project_stack, blocks, repeats=3)
            line += f"   cython {t_cy * 1e3:8.1f} ms   speedup {t_py / t_cy:5.1f}x"
        print(line)

    print("\n-- full feasibility runs --")
    for name, m1, m2, lam, iters in solver_cases(args.quick):
        kernel_args = (m1.effects, m2.effects, lam, lam, True, 1e-7, iters, 2000, 0.999, 1e-12)
        t_py, out_py = time_call(pycore.solve, *kernel_args)
        line = (f"{name:38s} numpy {t_py:7.2f} s ({out_py[5]:6d} it)")
        if "cython" in backends:
            t_cy, out_cy = time_call(_kernels.get_solver("cython"), *kernel_args)
            line += f"   cython {t_cy:7.2f} s ({out_cy[5]:6d} it)   speedup {t_py / t_cy:5.1f}x"
        print(line)


if __name__ == "__main__":
    main()

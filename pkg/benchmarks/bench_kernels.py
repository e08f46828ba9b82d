#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Runs the two hot loops (beamformer and phase-shift SGD blocks) and the full
objective evaluation on identical inputs for every available backend, checks
that the backends agree numerically, and prints timings with speedups.

Usage:
    python benchmarks/bench_kernels.py [--t 250] [--m 15] [--n 50] [--k 2000]
"""

import argparse
import time

import numpy as np

from irsmin import _kernels
from irsmin.objective import SystemParams
from irsmin.solver import init_point


def build_inputs(t, m, n, seed=0):
    # normalized so margins stay near zero: every step keeps a live gradient
    # and the loops run their full budget instead of stopping early
    rng = np.random.default_rng(seed)
    params = SystemParams(p=1.0, sigma2=2.0, gamma=1.0)
    w, v = init_point(m, n, params, rng)
    h = np.ascontiguousarray(
        (rng.standard_normal((t, m)) + 1j * rng.standard_normal((t, m))) / np.sqrt(2 * m)
    )
    a = np.ascontiguousarray(
        (rng.standard_normal((t, n)) + 1j * rng.standard_normal((t, n))) / np.sqrt(2 * n)
    )
    b = np.ascontiguousarray(
        (rng.standard_normal(t) + 1j * rng.standard_normal(t)) / np.sqrt(2)
    )
    return params, w, v, h, a, b


def time_call(fun, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fun()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=int, default=250, help="channel samples")
    ap.add_argument("--m", type=int, default=15, help="BS antennas")
    ap.add_argument("--n", type=int, default=50, help="IRS elements")
    ap.add_argument("--k", type=int, default=2000, help="inner SGD steps")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    params, w, v, h, a, b = build_inputs(args.t, args.m, args.n)
    idx = np.random.default_rng(1).integers(0, args.t, size=args.k, dtype=np.int64)
    scale = 1.0 / params.sigma2
    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)}   t={args.t} m={args.m} n={args.n} k={args.k}")
    if len(backends) == 1:
        print("compiled extension not built; timing the fallback only")

    cases = {
        "objective_w": lambda be: be.objective_w(h, w, params.gamma, params.sigma2, scale),
        "objective_v": lambda be: be.objective_v(a, b, v, params.gamma, params.sigma2, scale),
        "inner_loop_w": lambda be: be.inner_loop_w(
            h, w.copy(), params.p, params.gamma, params.sigma2, scale,
            0.05, 1.0, 1e-300, idx, np.empty(args.k + 1),
        ),
        "inner_loop_v": lambda be: be.inner_loop_v(
            a, b, v.copy(), params.gamma, params.sigma2, scale,
            0.05, 1.0, 1e-300, idx, np.empty(args.k + 1),
        ),
    }

    print(f"{'kernel':14s} " + " ".join(f"{name:>12s}" for name in backends) + "   speedup")
    for label, runner in cases.items():
        times = {}
        values = {}
        for name in backends:
            be = _kernels.backend(name)
            times[name], values[name] = time_call(lambda: runner(be), args.repeats)
        if label.startswith("inner_loop"):
            for name, ran in values.items():
                assert ran == args.k, f"{label} [{name}] stopped early at step {ran}"
        if len(backends) == 2:
            ref, fast = values["numpy"], values["cython"]
            assert np.allclose(ref, fast, rtol=1e-9), f"{label}: backend results diverged"
            speedup = f"{times['numpy'] / times['cython']:8.1f}x"
        else:
            speedup = "      --"
        cols = " ".join(f"{times[name] * 1e3:10.2f}ms" for name in backends)
        print(f"{label:14s} {cols}   {speedup}")


if __name__ == "__main__":
    main()

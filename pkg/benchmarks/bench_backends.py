#!/usr/bin/env python3
"""Benchmark the compiled hot loops against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_backends.py

Times the exponential log-likelihood, the per-event compensators, and the
two exponential-model simulators for both backend implementations, plus the
O(n^2) general likelihood for scale.
"""

import time

import numpy as np

from hawkes import ExpKernel, HawkesModel, loglik_general, simulate_exact_exp
from hawkes._kernels import ref
from hawkes.core import as_times
from hawkes.rng import UniformBlockStream, make_rng

try:
    from hawkes._kernels import native
except ImportError:
    native = None

FIG1 = HawkesModel(0.5, ExpKernel(1.0, 2.0))


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    events = simulate_exact_exp(FIG1, 50_000.0, seed=1)
    times = as_times(events.times)
    n = times.size
    print(f"event count: {n}\n")
    print(f"{'operation':<34}{'python':>12}{'native':>12}{'speedup':>10}")

    cases = [
        (
            f"exp_loglik (n={n})",
            lambda impl: impl.exp_loglik(times, 50_000.0, 0.5, 0.5, 1.0, 2.0),
        ),
        (
            f"exp_compensators (n={n})",
            lambda impl: impl.exp_compensators(times, 0.5, 0.5, 1.0, 2.0),
        ),
        (
            "sim_thinning_exp (T=20000)",
            lambda impl: impl.sim_thinning_exp(
                0.5, 0.5, 1.0, 2.0, 20_000.0, UniformBlockStream(make_rng(2))
            ),
        ),
        (
            "sim_exact_exp (T=20000)",
            lambda impl: impl.sim_exact_exp(
                0.5, 0.5, 1.0, 2.0, 20_000.0, UniformBlockStream(make_rng(2))
            ),
        ),
    ]
    for name, call in cases:
        t_py = timeit(lambda: call(ref))
        if native is None:
            print(f"{name:<34}{t_py * 1e3:>10.2f}ms{'-':>12}{'-':>10}")
            continue
        t_c = timeit(lambda: call(native))
        print(
            f"{name:<34}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
            f"{t_py / t_c:>9.1f}x"
        )


if __name__ == "__main__":
    # keep the general-likelihood scale comparison out of the per-backend
    # table: it is the same numpy code either way
    main()
    events = simulate_exact_exp(FIG1, 5_000.0, seed=3)
    t = timeit(lambda: loglik_general(FIG1, events), repeat=2)
    print(f"\nloglik_general (n={len(events)}): {t * 1e3:.1f}ms (backend-independent)")

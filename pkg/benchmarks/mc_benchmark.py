#!/usr/bin/env python3
"""Benchmark: compiled Cython path kernel vs the pure-python fallback.

Both backends produce bit-identical output (asserted below); the benchmark
reports wall time and speedup for a few workload shapes.

Run: python benchmarks/mc_benchmark.py [--paths N]
"""

import argparse
import time

import numpy as np

from fracibnr import _mc_fallback
from fracibnr.montecarlo import mc_backend

try:
    from fracibnr import _mc_core
except ImportError:
    _mc_core = None


def run(kernel, n_paths, times, alpha, lam, horizon):
    out_z = np.zeros((n_paths, len(times)))
    out_n = np.zeros((n_paths, len(times)))
    start = time.perf_counter()
    kernel.run_paths(
        12345, 0, n_paths, np.asarray(times, dtype=float), alpha, lam, 0.0, horizon,
        _mc_fallback.DELAY_EXP, 1.0, 0.0, _mc_fallback.CLAIM_POINT, 1.0, 0.0,
        out_z, out_n,
    )
    return time.perf_counter() - start, out_z, out_n


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=100_000)
    args = parser.parse_args()

    print(f"active backend: {mc_backend()}")
    if _mc_core is None:
        print("compiled kernel not built; nothing to compare")
        return

    cases = [
        ("alpha=0.6, horizon=5 (light paths)", 0.6, 1.5, 5.0),
        ("alpha=1.0, horizon=5 (Poisson)", 1.0, 1.5, 5.0),
        ("alpha=0.6, horizon=200 (heavy paths)", 0.6, 1.5, 200.0),
    ]
    for label, alpha, lam, horizon in cases:
        n = args.paths if horizon <= 10 else max(args.paths // 10, 1000)
        t_c, z_c, n_c = run(_mc_core, n, [horizon / 2, horizon], alpha, lam, horizon)
        t_p, z_p, n_p = run(_mc_fallback, n, [horizon / 2, horizon], alpha, lam, horizon)
        assert np.array_equal(z_c, z_p) and np.array_equal(n_c, n_p), "backend mismatch"
        rate_c = n / t_c / 1e3
        rate_p = n / t_p / 1e3
        print(
            f"{label}: {n} paths | compiled {t_c:.3f}s ({rate_c:.0f}k paths/s) | "
            f"python {t_p:.3f}s ({rate_p:.0f}k paths/s) | speedup {t_p / t_c:.1f}x"
        )


if __name__ == "__main__":
    main()

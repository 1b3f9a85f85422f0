#!/usr/bin/env python3
"""Throughput comparison: compiled kernels vs the pure-numpy fallback.

Times each batch kernel on workloads shaped like the acceptance studies
(counting CDF sampling at T=2048, Bayesian folds at T=256/512, binomial
counting at n_shot=1024) and checks that both backends return identical
bits while they are at it.

Usage: python benchmarks/backend_bench.py [--trials N]
"""

import argparse
import time

import numpy as np

from qss import _kernels_py as pyk
from qss.phasedist import qc_loglik_tables, qc_mass_batch

try:
    from qss import _kernels as ck
except ImportError:
    ck = None


def timed(fn, *args, repeat=3):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def workloads(trials: int):
    rng = np.random.default_rng(0)
    phis = rng.random(trials) * 0.5

    cdf2048 = np.cumsum(qc_mass_batch(phis, 2048), axis=1)
    u1 = rng.random(trials)
    yield "sample_rows (PEA T=2048)", "sample_rows", (cdf2048, u1)

    p = rng.random(trials)
    u2 = rng.random((trials, 1024))
    yield "bernoulli_count (MC n_shot=1024)", "bernoulli_count_rows", (p, u2, 1024)

    _, ll256, va256 = qc_loglik_tables(256, 64)
    rows = rng.integers(0, 129, size=(trials, 4))
    yield (
        "gather_fold_argmax (BPEA T=256 x4)",
        "gather_fold_argmax",
        (rows, ll256, va256.view(np.uint8)),
    )

    cdf512 = np.cumsum(qc_mass_batch(phis, 512), axis=1)
    _, ll512, va512 = qc_loglik_tables(512, 64)
    u3 = rng.random((trials, 8))
    yield (
        "abpea_rows (T=512, 3..8 shots)",
        "abpea_rows",
        (cdf512, u3, ll512, va512.view(np.uint8), 0.8, 3, 8),
    )

    stages = np.array([0, 1, 2, 4, 8, 16], dtype=np.float64)
    grid = np.arange(64 * 64 // 2 * 2 + 1) / (64.0 * 64.0)
    ang = ((2.0 * stages + 1.0) * np.pi)[:, None] * grid[None, :]
    with np.errstate(divide="ignore"):
        ls = np.log(np.sin(ang) ** 2)
        lc = np.log(np.cos(ang) ** 2)
    h = rng.integers(0, 65, size=(trials, 6))
    yield "weighted_fold_argmax (MLAE t=6)", "weighted_fold_argmax", (h, 64, ls, lc)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=2000)
    args = parser.parse_args()

    if ck is None:
        print("compiled backend not built; nothing to compare")
        return 1

    print(f"{'kernel':38s} {'python':>9s} {'compiled':>9s} {'speedup':>8s}")
    for label, name, kargs in workloads(args.trials):
        t_py, out_py = timed(getattr(pyk, name), *kargs)
        t_c, out_c = timed(getattr(ck, name), *kargs)
        if isinstance(out_py, tuple):
            same = all(np.array_equal(a, b) for a, b in zip(out_py, out_c))
        else:
            same = np.array_equal(out_py, out_c)
        if not same:
            print(f"{label:38s} BACKENDS DISAGREE")
            return 1
        print(f"{label:38s} {t_py:8.3f}s {t_c:8.3f}s {t_py / t_c:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Runs each kernel on workloads matching the acceptance experiments and prints
a table of timings plus the speedup.  Also asserts that both backends return
bit-identical results on the benchmarked inputs.
"""

import time

import numpy as np

from quantlat import _kernels
from quantlat._kernels import _pykern
from quantlat.dynamics import rotation_matrix
from quantlat.quasiperiodic import irrational_matrix_2x2


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    compiled = _kernels.BACKEND == "cython"
    print(f"active backend: {_kernels.BACKEND}")
    if not compiled:
        print("compiled extension unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    L = np.ascontiguousarray(rotation_matrix(1.0))
    off = np.full(2, -0.5)
    mu = np.zeros(2)
    blocks = np.ascontiguousarray(np.eye(2)[None, :, :])

    pts_big = np.ascontiguousarray(rng.integers(-1000, 1000, (1_000_000, 2)))
    pts_mid = np.ascontiguousarray(rng.integers(-256, 256, (262_144, 2)))
    pts_clt = np.ascontiguousarray(rng.integers(99_000, 101_000, (10_000, 2)))
    lam = np.ascontiguousarray(irrational_matrix_2x2())
    corner = np.array([-1000, -1000], dtype=np.int64)
    edges = np.array([2000, 2000], dtype=np.int64)
    los = np.array([[0.0, 0.0]])
    his = np.array([[0.5, 0.7]])

    cases = [
        ("step_scan 1e6 pts", "step_scan", (L, pts_big, off, 1e-9)),
        ("orbit_errors 512^2 x4", "orbit_errors", (L, pts_mid, 4, off, 1e-9)),
        ("orbit_deviations 1e4 x400", "orbit_deviations", (L, pts_clt, 400, off, mu, blocks, 1e-9)),
        ("frac_box_count 2000^2", "frac_box_count", (lam, corner, edges, los, his)),
    ]

    print(f"{'kernel':<28}{'compiled':>10}{'fallback':>10}{'speedup':>9}")
    for label, name, args in cases:
        t_c, out_c = timed(getattr(_kernels, name), *args)
        t_p, out_p = timed(getattr(_pykern, name), *args, repeat=1)
        assert same(out_c, out_p), f"{name}: backends disagree"
        print(f"{label:<28}{t_c:>9.3f}s{t_p:>9.3f}s{t_p / t_c:>8.1f}x")
    print("all outputs bit-identical across backends")


if __name__ == "__main__":
    main()

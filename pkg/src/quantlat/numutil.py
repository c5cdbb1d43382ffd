"""Shared numeric helpers: fractional parts, compensated sums, quasi-random points."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

# Values this close to 1.0 after taking a fractional part are clamped to 0.0
# so that membership in half-open boxes stays consistent.
FRAC_CLAMP = 1e-12

# Components of a quantizer argument this close to a split plane are counted
# as boundary-grazing events in scan diagnostics.
BOUNDARY_TOL = 1e-9


def frac_unit(u: np.ndarray) -> np.ndarray:
    """Componentwise fractional part into [0, 1), clamping near-1 values to 0."""
    w = u - np.floor(u)
    w[w > 1.0 - FRAC_CLAMP] = 0.0
    return w


def floor_frac(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split u into integer and fractional parts with u = f + w, w in [0, 1).

    Fractional parts within FRAC_CLAMP of 1.0 are rounded up into the integer
    part so that the decomposition stays consistent with half-open boxes.
    """
    f = np.floor(u)
    w = u - f
    bump = w > 1.0 - FRAC_CLAMP
    w[bump] = 0.0
    f[bump] += 1.0
    return f.astype(np.int64), w


def fsum_chunks(chunk_sums: Iterable[float]) -> float:
    """Combine per-chunk partial sums exactly; order of the iterable is fixed."""
    return math.fsum(chunk_sums)


def matvec_cols(M: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Rows of pts mapped by M, accumulated column by column.

    This fixed accumulation order is the contract shared with the compiled
    kernels: every path that pairs a linear image with its quantized value
    must produce bit-identical floats.
    """
    out = np.zeros((pts.shape[0], M.shape[0]), dtype=np.float64)
    for k in range(M.shape[1]):
        out += pts[:, k : k + 1].astype(np.float64) * M[:, k][None, :]
    return out


def kronecker_points(count: int, dim: int) -> np.ndarray:
    """Deterministic low-discrepancy points in [0, 1)^dim (additive recurrence).

    Used for coverage checks where uniform-but-reproducible samples are wanted
    without dragging in an RNG seed.
    """
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    if dim > len(primes):
        raise ValueError(f"kronecker_points supports dim <= {len(primes)}")
    alpha = np.sqrt(np.array(primes[:dim], dtype=float))
    alpha -= np.floor(alpha)
    k = np.arange(1, count + 1, dtype=float)[:, None]
    return frac_unit(0.5 + k * alpha[None, :])


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator; per-sample draws do not depend on draw order
    across restarts with the same seed."""
    return np.random.Generator(np.random.Philox(key=seed))


def chunk_ranges(total: int, chunk: int):
    """Yield (start, stop) pairs covering range(total) in fixed-size chunks."""
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        yield start, stop
        start = stop

"""Pure numpy implementations of the hot lattice-scan kernels.

These are the fallback used when the compiled extension is unavailable.  Both
backends accumulate matrix-vector products in ascending column order and take
fractional parts the same way, so their outputs agree bit for bit; keep the
two files in sync when touching numerics.
"""

from __future__ import annotations

import numpy as np

from ..numutil import matvec_cols as _matvec_cols

BACKEND = "python"

# Fractional parts this close to 1.0 are treated as 0.0 (wrapped up).
_FRAC_CLAMP = 1e-12


def _floor_diff(u: np.ndarray, offset: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """floor(u - offset) without double rounding, plus the residual.

    The rounded difference u - offset can cross an integer that the exact
    difference does not reach (half-integer offsets make this systematic on
    cell boundaries); comparing u against floor +/- offset directly removes
    the error whenever offset plus an integer is representable.
    """
    v = u - offset
    f = np.floor(v)
    over = u < f + offset
    under = u >= (f + 1.0) + offset
    f = f - over + under
    return f, v - f


def step_scan(L, pts, offset, tol):
    """One quantized-map step for every point.

    L: (n, n) float64, pts: (m, n) int64, offset: (n,) cell lower corner.
    Returns (images (m, n) int64, grazing-point count).
    """
    u = _matvec_cols(L, pts)
    f, d = _floor_diff(u, offset[None, :])
    flags = int(np.count_nonzero(np.any((d < tol) | (d > 1.0 - tol), axis=1)))
    return f.astype(np.int64), flags


def orbit_errors(L, pts, nsteps, offset, tol):
    """Per-step quantization errors along nsteps iterations from each start.

    Returns (errors (m, nsteps, n) float64, grazing-point-step count).
    """
    m, n = pts.shape
    errors = np.empty((m, nsteps, n), dtype=np.float64)
    x = pts.copy()
    flags = 0
    for s in range(nsteps):
        u = _matvec_cols(L, x)
        f, d = _floor_diff(u, offset[None, :])
        flags += int(np.count_nonzero(np.any((d < tol) | (d > 1.0 - tol), axis=1)))
        y = f.astype(np.int64)
        errors[:, s, :] = u - y
        x = y
    return errors, flags


def orbit_deviations(L, pts, nsteps, offset, mu, blocks, tol):
    """Deviation accumulators along nsteps iterations from each start.

    blocks: (r, 2, n) row pairs projecting the deviation onto invariant planes.
    Returns (final deviation (m, n), per-block running max of the projected
    deviation norm (m, r), grazing count).
    """
    m, n = pts.shape
    r = blocks.shape[0]
    delta = np.zeros((m, n), dtype=np.float64)
    blockmax = np.zeros((m, r), dtype=np.float64)
    x = pts.copy()
    flags = 0
    for s in range(nsteps):
        u = _matvec_cols(L, x)
        f, d = _floor_diff(u, offset[None, :])
        flags += int(np.count_nonzero(np.any((d < tol) | (d > 1.0 - tol), axis=1)))
        y = f.astype(np.int64)
        err = u - y
        x = y
        dnew = np.zeros_like(delta)
        for k in range(n):
            dnew += delta[:, k : k + 1] * L[:, k][None, :]
        dnew += err
        dnew -= mu[None, :]
        delta = dnew
        for j in range(r):
            b0 = np.zeros(m)
            b1 = np.zeros(m)
            for k in range(n):
                b0 += blocks[j, 0, k] * delta[:, k]
                b1 += blocks[j, 1, k] * delta[:, k]
            np.maximum(blockmax[:, j], np.sqrt(b0 * b0 + b1 * b1), out=blockmax[:, j])
    return delta, blockmax, flags


def frac_box_count(Lam, corner, edges, los, his):
    """Count fragment points whose fractional linear image lies in a box union.

    Lam: (m, n); corner/edges: (n,) int64 fragment corner and edge lengths;
    los/his: (nb, m) box bounds.  Returns the hit count over the fragment.
    """
    n = corner.shape[0]
    total = 1
    for e in edges:
        total *= int(e)
    hits = 0
    chunk = 1 << 18
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        pts = np.empty((stop - start, n), dtype=np.int64)
        for k in range(n - 1, -1, -1):
            e = int(edges[k])
            pts[:, k] = corner[k] + idx % e
            idx //= e
        w = _matvec_cols(Lam, pts)
        w -= np.floor(w)
        w[w > 1.0 - _FRAC_CLAMP] = 0.0
        mask = np.zeros(stop - start, dtype=bool)
        for lo, hi in zip(los, his):
            mask |= np.all((w >= lo) & (w < hi), axis=1)
        hits += int(np.count_nonzero(mask))
    return hits

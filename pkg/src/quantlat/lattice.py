"""Integer-lattice primitives: rectangular fragments, averages over them,
frequency (point-fraction) estimates, and closed-form trigonometric averages.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .numutil import chunk_ranges, fsum_chunks

# Fixed chunk size for vectorized fragment scans.  Chunk boundaries never
# depend on the worker count, so parallel scans reproduce serial results
# bit-for-bit on counts and on compensated float sums.
SCAN_CHUNK = 1 << 18

# Hard cap on materialized candidate points in a single scan.
MAX_SCAN_POINTS = 200_000_000

# Tolerance for deciding that a real number is an integer in the closed-form
# trigonometric average; floating input cannot represent exact integrality.
INT_TOL = 1e-9


@dataclass(frozen=True)
class Fragment:
    """Axis-aligned discrete parallelepiped: points x with a_k <= x_k < a_k + ell_k."""

    a: tuple[int, ...]
    ell: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(v) for v in self.a)
        ell = tuple(int(v) for v in self.ell)
        if len(a) != len(ell) or not a:
            raise ValueError("corner and edge vectors must have equal positive length")
        if any(e < 1 for e in ell):
            raise ValueError(f"edge lengths must be >= 1, got {ell}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "ell", ell)
        if self.count > np.iinfo(np.int64).max:
            raise OverflowError(f"fragment point count {self.count} exceeds int64")

    @classmethod
    def centered(cls, edge: int | Sequence[int], dim: int | None = None) -> "Fragment":
        """Fragment of the given edge lengths roughly centered on the origin."""
        if isinstance(edge, int):
            if dim is None:
                raise ValueError("dim required when edge is a scalar")
            ell = (edge,) * dim
        else:
            ell = tuple(int(e) for e in edge)
        a = tuple(-(e // 2) for e in ell)
        return cls(a, ell)

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def count(self) -> int:
        c = 1
        for e in self.ell:
            c *= e
        return c

    def contains(self, x: Sequence[int]) -> bool:
        return all(a <= int(v) < a + e for a, e, v in zip(self.a, self.ell, x))

    def translated(self, z: Sequence[int]) -> "Fragment":
        return Fragment(tuple(a + int(v) for a, v in zip(self.a, z)), self.ell)

    def min_edge(self) -> int:
        return min(self.ell)


@dataclass(frozen=True)
class FrequencyEstimate:
    """Measured fraction of fragment points satisfying a predicate."""

    hits: int
    total: int
    fragment: Fragment

    @property
    def value(self) -> float:
        return self.hits / self.total

    def __post_init__(self):
        if not 0 <= self.hits <= self.total:
            raise ValueError(f"hits {self.hits} outside [0, {self.total}]")
        if self.total != self.fragment.count:
            raise ValueError("total must equal the fragment point count")


@dataclass
class SweepResult:
    """Per-fragment frequency estimates over a growing sweep, plus the max
    pairwise spread of the measured values (a convergence diagnostic)."""

    estimates: list[FrequencyEstimate] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [e.value for e in self.estimates]

    @property
    def spread(self) -> float:
        v = self.values
        return max(v) - min(v) if v else 0.0


def fragment_points(frag: Fragment) -> Iterator[tuple[int, ...]]:
    """Yield the fragment's points in lexicographic coordinate order."""
    if frag.count > MAX_SCAN_POINTS:
        raise OverflowError(
            f"fragment holds {frag.count} points; refusing to stream more than {MAX_SCAN_POINTS}"
        )
    ranges = [range(a, a + e) for a, e in zip(frag.a, frag.ell)]

    def rec(prefix: tuple[int, ...], k: int) -> Iterator[tuple[int, ...]]:
        if k == len(ranges):
            yield prefix
            return
        for v in ranges[k]:
            yield from rec(prefix + (v,), k + 1)

    return rec((), 0)


def fragment_grid(frag: Fragment) -> np.ndarray:
    """All fragment points as an (count, dim) int64 array, lexicographic order."""
    if frag.count > MAX_SCAN_POINTS:
        raise OverflowError(f"fragment holds {frag.count} points; scan cap is {MAX_SCAN_POINTS}")
    axes = [np.arange(a, a + e, dtype=np.int64) for a, e in zip(frag.a, frag.ell)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _grid_chunk(frag: Fragment, start: int, stop: int) -> np.ndarray:
    """Points with lexicographic ranks in [start, stop), as (stop-start, dim) int64."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, frag.dim), dtype=np.int64)
    for k in range(frag.dim - 1, -1, -1):
        e = frag.ell[k]
        out[:, k] = frag.a[k] + idx % e
        idx //= e
    return out


def average(
    f: Callable,
    frag: Fragment,
    *,
    batch: bool = False,
) -> float:
    """Mean of f over the fragment with compensated summation.

    With batch=True, f receives (m, dim) int64 arrays and must return a
    length-m float array; chunk boundaries are fixed so results do not depend
    on how the scan is split.
    """
    if batch:
        partials = []
        for start, stop in chunk_ranges(frag.count, SCAN_CHUNK):
            vals = np.asarray(f(_grid_chunk(frag, start, stop)), dtype=float)
            partials.append(float(np.sum(vals)))
        return fsum_chunks(partials) / frag.count
    return math.fsum(f(x) for x in fragment_points(frag)) / frag.count


def frequency(
    pred: Callable,
    frag: Fragment,
    *,
    batch: bool = False,
    workers: int = 1,
) -> FrequencyEstimate:
    """Count fragment points satisfying pred; exact integer reduction.

    With batch=True, pred maps an (m, dim) int64 array to a boolean array.
    workers > 1 splits the fixed-size chunks across threads; the merged count
    is identical to the serial scan.
    """
    if not batch:
        hits = sum(1 for x in fragment_points(frag) if pred(x))
        return FrequencyEstimate(hits, frag.count, frag)

    spans = list(chunk_ranges(frag.count, SCAN_CHUNK))

    def count_span(span):
        start, stop = span
        mask = np.asarray(pred(_grid_chunk(frag, start, stop)))
        return int(np.count_nonzero(mask))

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(count_span, spans))
    else:
        hits = sum(count_span(s) for s in spans)
    return FrequencyEstimate(hits, frag.count, frag)


def centered_sweep(base_edge: int, dim: int) -> list[Fragment]:
    """Centered fragments with edges base, 3x and 10x: the standard sweep for
    probing a frequency limit (the limit itself is never claimed, only the
    spread across the sweep)."""
    return [Fragment.centered(base_edge * k, dim) for k in (1, 3, 10)]


def frequency_sweep(
    pred: Callable,
    fragments: Sequence[Fragment],
    *,
    batch: bool = False,
    workers: int = 1,
) -> SweepResult:
    """Frequency estimates over a sweep of fragments with nondecreasing minimal edge."""
    edges = [f.min_edge() for f in fragments]
    if any(b < a for a, b in zip(edges, edges[1:])):
        raise ValueError("fragments must have nondecreasing minimal edge length")
    out = SweepResult()
    for frag in fragments:
        out.estimates.append(frequency(pred, frag, batch=batch, workers=workers))
    return out


def _phase_factor(u: int, v: float) -> float:
    """Averaging factor for one axis: exact sign for integer v, Dirichlet ratio otherwise."""
    r = round(v)
    if abs(v - r) < INT_TOL:
        return -1.0 if ((u - 1) * r) % 2 else 1.0
    return math.sin(math.pi * u * v) / (u * math.sin(math.pi * v))


def trig_average(omega: Sequence[float], frag: Fragment) -> complex:
    """Closed-form mean of exp(2*pi*i * omega.x) over the fragment."""
    om = np.asarray(omega, dtype=float)
    if om.shape != (frag.dim,):
        raise ValueError("omega dimension mismatch")
    if all(abs(w - round(w)) < INT_TOL for w in om):
        return complex(1.0, 0.0)  # integrand is identically one on the lattice
    phase = 2.0 * math.pi * sum(
        w * (a + (e - 1) / 2.0) for w, a, e in zip(om, frag.a, frag.ell)
    )
    mag = 1.0
    for w, e in zip(om, frag.ell):
        mag *= _phase_factor(e, w)
    return cmath.exp(1j * phase) * mag


def trig_average_direct(omega: Sequence[float], frag: Fragment) -> complex:
    """Direct-summation oracle for trig_average (independent of the closed form)."""
    om = np.asarray(omega, dtype=float)
    acc_re: list[float] = []
    acc_im: list[float] = []
    for start, stop in chunk_ranges(frag.count, SCAN_CHUNK):
        pts = _grid_chunk(frag, start, stop)
        ph = 2.0 * np.pi * (pts @ om)
        acc_re.append(float(np.sum(np.cos(ph))))
        acc_im.append(float(np.sum(np.sin(ph))))
    return complex(fsum_chunks(acc_re), fsum_chunks(acc_im)) / frag.count


def weyl_bound(omega: Sequence[float], N: int) -> float:
    """Upper bound on |trig_average| over every fragment with min edge >= N.

    All-integer omega has no nontrivial bound; returns +inf as a sentinel.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    om = np.asarray(omega, dtype=float)
    noninteger = [w for w in om if abs(w - round(w)) >= INT_TOL]
    if not noninteger:
        return math.inf
    bound = 1.0
    for w in noninteger:
        bound /= N * abs(math.sin(math.pi * w))
    return bound

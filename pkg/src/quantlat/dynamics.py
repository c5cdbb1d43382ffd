"""The quantized linear system: forward iteration through a quantizer, the
affine supporting system it shadows, per-step quantization errors, deviation
recurrences, set-valued preimages, and the companion backward-time system.

Lattice states are exact integers throughout; the only floating operation per
step is the single matrix-vector product fed to the quantizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .geometry import (
    Quantizer,
    cell_covariance,
    cell_mean,
    compensating_quantizer,
    roundoff_quantizer,
)
from .lattice import Fragment, fragment_grid
from .numutil import BOUNDARY_TOL, frac_unit, matvec_cols

# Inverse round-trip budget for the system matrix.
INV_RESIDUAL_TOL = 1e-10

# Enumeration guards.
PREIMAGE_CANDIDATE_CAP = 1_000_000
SCAN_CANDIDATE_CAP = 50_000_000

# Relative tolerance for the deviation recurrence against the direct
# two-trajectory difference.
DEVIATION_CHECK_TOL = 1e-6


class DynamicsError(RuntimeError):
    """Numerical-consistency hard failure inside a dynamics operation."""


@dataclass(frozen=True)
class QuantizedSystem:
    """Integer-lattice dynamics driven by a nonsingular matrix composed with a
    lattice quantizer, together with the derived data every experiment needs:
    the cell's mean and covariance and the compensating quantizer."""

    L: np.ndarray
    L_inv: np.ndarray
    det: float
    quantizer: Quantizer
    mu: np.ndarray
    Psi: np.ndarray
    quantizer_comp: Quantizer

    @classmethod
    def build(cls, L: np.ndarray, quantizer: Quantizer) -> "QuantizedSystem":
        L = np.asarray(L, dtype=float)
        n = quantizer.dim
        if L.shape != (n, n):
            raise ValueError(f"matrix shape {L.shape} does not match quantizer dim {n}")
        det = float(np.linalg.det(L))
        if det == 0.0:
            raise ValueError("matrix is singular")
        L_inv = np.linalg.inv(L)
        resid = float(np.max(np.abs(L @ L_inv - np.eye(n))))
        if resid >= INV_RESIDUAL_TOL:
            raise ValueError(f"inverse round-trip residual {resid:.3e} too large")
        mu = cell_mean(quantizer.cell)
        psi = cell_covariance(quantizer.cell)
        comp = compensating_quantizer(quantizer, L_inv, mu)
        for arr in (L, L_inv, mu, psi):
            arr.setflags(write=False)
        return cls(L, L_inv, det, quantizer, mu, psi, comp)

    @property
    def dim(self) -> int:
        return self.quantizer.dim


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_system(theta: float) -> QuantizedSystem:
    """Planar rotation composed with the nearest-node quantizer."""
    return QuantizedSystem.build(rotation_matrix(theta), roundoff_quantizer(2))


def rotation_system_exact(cos_val: float, sin_val: float) -> QuantizedSystem:
    """Rotation system from explicitly supplied matrix entries.

    Lattice points can land exactly on cell boundaries (for angles whose sine
    or cosine is representable); supplying the entries keeps those ties exact
    instead of depending on trig roundoff.
    """
    L = np.array([[cos_val, -sin_val], [sin_val, cos_val]])
    return QuantizedSystem.build(L, roundoff_quantizer(2))


def identity_system(n: int) -> QuantizedSystem:
    return QuantizedSystem.build(np.eye(n), roundoff_quantizer(n))


@dataclass(frozen=True)
class FiniteLatticeSet:
    """Canonical finite subset of the lattice: sorted distinct integer tuples.
    Hashable, so usable as a key in kernel tables."""

    elems: tuple[tuple[int, ...], ...]

    @classmethod
    def from_points(cls, pts: Iterable[Sequence[int]]) -> "FiniteLatticeSet":
        norm = {tuple(int(v) for v in p) for p in pts}
        return cls(tuple(sorted(norm)))

    @classmethod
    def empty(cls) -> "FiniteLatticeSet":
        return cls(())

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __contains__(self, p) -> bool:
        return tuple(int(v) for v in p) in set(self.elems)

    def points_array(self, dim: int) -> np.ndarray:
        if not self.elems:
            return np.empty((0, dim), dtype=np.int64)
        return np.asarray(self.elems, dtype=np.int64)

    def shifted(self, z: Sequence[int]) -> "FiniteLatticeSet":
        z = tuple(int(v) for v in z)
        return FiniteLatticeSet(tuple(tuple(a + b for a, b in zip(p, z)) for p in self.elems))


def _as_point(x: Sequence[int]) -> np.ndarray:
    return np.asarray(x, dtype=np.int64)


def linear_images(sys: QuantizedSystem, pts: np.ndarray) -> np.ndarray:
    """Linear images of integer rows, in the kernels' accumulation order."""
    return matvec_cols(sys.L, np.atleast_2d(pts))


def step(sys: QuantizedSystem, x: Sequence[int]) -> np.ndarray:
    """One forward step: quantized image of the linear image."""
    out, _ = step_points(sys, _as_point(x)[None, :])
    return out[0]


def step_points(sys: QuantizedSystem, pts: np.ndarray) -> tuple[np.ndarray, int]:
    """Forward step for every row; returns images and the count of points whose
    linear image grazed a quantizer split plane (within the boundary tolerance)."""
    pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.int64)
    if sys.quantizer.cube_offset is not None:
        offset = np.asarray(sys.quantizer.cube_offset)
        return _kernels.step_scan(np.ascontiguousarray(sys.L), pts, offset, BOUNDARY_TOL)
    u = linear_images(sys, pts)
    out = sys.quantizer.quantize_many(u)
    flags = _generic_flag_count(sys.quantizer, u)
    return out, flags


def _generic_flag_count(quantizer: Quantizer, u: np.ndarray) -> int:
    """Grazing count for arbitrary cells: fractional parts near any piece-box
    edge (integer planes included via the 0/1 edges)."""
    w = frac_unit(u.copy())
    near = np.zeros(len(w), dtype=bool)
    for k in range(quantizer.dim):
        edges = {0.0, 1.0}
        for lo, hi, _ in quantizer.cell._flat:
            edges.add(float(lo[k]))
            edges.add(float(hi[k]))
        grid = np.asarray(sorted(edges))
        dist = np.min(np.abs(w[:, k][:, None] - grid[None, :]), axis=1)
        near |= dist < BOUNDARY_TOL
    return int(np.count_nonzero(near))


def supporting_step(sys: QuantizedSystem, v: Sequence[float]) -> np.ndarray:
    """Affine companion map: the linear image shifted by the cell mean."""
    return sys.L @ np.asarray(v, dtype=float) - sys.mu


def supporting_inverse(sys: QuantizedSystem, v: Sequence[float]) -> np.ndarray:
    return sys.L_inv @ (np.asarray(v, dtype=float) + sys.mu)


def error(sys: QuantizedSystem, x: Sequence[int]) -> np.ndarray:
    """One-step quantization error; always a point of the quantizer cell."""
    x = _as_point(x)
    u = linear_images(sys, x[None, :])[0]
    e = u - step(sys, x)
    if not sys.quantizer.cell.region_contains(e):
        raise DynamicsError(f"error vector {e.tolist()} escaped the quantizer cell")
    return e


@dataclass(frozen=True)
class TrajectoryRecord:
    """Forward orbit with its per-step errors and both deviation sequences."""

    x0: tuple[int, ...]
    states: np.ndarray  # (N+1, n) int64
    errors: np.ndarray  # (N, n) float64
    delta: np.ndarray  # (N+1, n) deviation from the supporting orbit
    xi: np.ndarray  # (N+1, n) deviation pulled back to the start


def trajectory(sys: QuantizedSystem, x: Sequence[int], N: int) -> TrajectoryRecord:
    """Iterate N steps, recording errors and running both deviation recurrences.

    The recurrence result is cross-checked against the direct difference of the
    quantized and supporting orbits; a breach names the failing step.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n = sys.dim
    x0 = _as_point(x)
    states = np.empty((N + 1, n), dtype=np.int64)
    errors = np.empty((N, n))
    delta = np.zeros((N + 1, n))
    states[0] = x0
    support = x0.astype(float)
    for k in range(1, N + 1):
        u = linear_images(sys, states[k - 1][None, :])[0]
        states[k] = sys.quantizer.quantize_many(u[None, :])[0]
        errors[k - 1] = u - states[k]
        if not sys.quantizer.cell.region_contains(errors[k - 1]):
            raise DynamicsError(f"step {k}: error vector escaped the quantizer cell")
        delta[k] = sys.L @ delta[k - 1] + errors[k - 1] - sys.mu
        support = sys.L @ support - sys.mu
        direct = support - states[k]
        scale = max(1.0, float(np.linalg.norm(direct)))
        if np.linalg.norm(delta[k] - direct) > DEVIATION_CHECK_TOL * scale:
            raise DynamicsError(
                f"step {k}: deviation recurrence disagrees with the direct difference"
            )
    xi = np.zeros((N + 1, n))
    for k in range(1, N + 1):
        v = delta[k].copy()
        for _ in range(k):
            v = sys.L_inv @ v
        xi[k] = v
    return TrajectoryRecord(tuple(int(v) for v in x0), states, errors, delta, xi)


def _integer_hull(points: np.ndarray, pad: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise integer hull of a float point cloud, padded outward."""
    lo = np.floor(points.min(axis=0)).astype(np.int64) - pad
    hi = np.ceil(points.max(axis=0)).astype(np.int64) + pad
    return lo, hi


def _box_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    n = len(lo)
    corners = np.empty((1 << n, n))
    for i in range(1 << n):
        for k in range(n):
            corners[i, k] = hi[k] if (i >> k) & 1 else lo[k]
    return corners


def _enumerate_box(lo: np.ndarray, hi: np.ndarray, cap: int) -> np.ndarray:
    ell = hi - lo + 1
    count = 1
    for e in ell:
        count *= int(e)
        if count > cap:
            raise DynamicsError(f"candidate enumeration of {count}+ points exceeds cap {cap}")
    return fragment_grid(Fragment(tuple(int(v) for v in lo), tuple(int(v) for v in ell)))


def preimage(sys: QuantizedSystem, x: Sequence[int]) -> FiniteLatticeSet:
    """All lattice points mapping to x in one step.

    Candidates are the integer hull of the inverse image of x plus the cell,
    taken over transformed corner points and padded by one; the hull is then
    filtered by the forward map."""
    x = _as_point(x)
    clo, chi = sys.quantizer.cell.region_bbox()
    corners = _box_corners(x + clo, x + chi) @ sys.L_inv.T
    lo, hi = _integer_hull(corners)
    cand = _enumerate_box(lo, hi, PREIMAGE_CANDIDATE_CAP)
    images, _ = step_points(sys, cand)
    hits = cand[np.all(images == x, axis=1)]
    return FiniteLatticeSet.from_points(hits)


def basin(sys: QuantizedSystem, x: Sequence[int], N: int) -> list[FiniteLatticeSet]:
    """Iterated preimages of depth 1..N with deduplication; empty levels stay empty."""
    if N < 1:
        raise ValueError("N must be >= 1")
    levels = [preimage(sys, x)]
    for _ in range(1, N):
        acc: set[tuple[int, ...]] = set()
        for y in levels[-1]:
            acc.update(preimage(sys, y).elems)
            if len(acc) > PREIMAGE_CANDIDATE_CAP:
                raise DynamicsError("basin cardinality exceeded the enumeration cap")
        levels.append(FiniteLatticeSet(tuple(sorted(acc))))
    return levels


def compensating_step(sys: QuantizedSystem, x: Sequence[int]) -> np.ndarray:
    """One step of the backward-time companion system."""
    u = matvec_cols(sys.L_inv, _as_point(x)[None, :])[0]
    return sys.quantizer_comp.quantize_many(u[None, :])[0]


def compensating_error(sys: QuantizedSystem, x: Sequence[int]) -> np.ndarray:
    x = _as_point(x)
    u = matvec_cols(sys.L_inv, x[None, :])[0]
    e = u - sys.quantizer_comp.quantize_many(u[None, :])[0]
    if not sys.quantizer_comp.cell.region_contains(e):
        raise DynamicsError(f"companion error vector {e.tolist()} escaped its cell")
    return e


def _meet_candidates(sys: QuantizedSystem, base: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Integer candidates covering base + L^{-1}(anchors + cell)."""
    clo, chi = sys.quantizer.cell.region_bbox()
    all_corners = []
    for a in anchors:
        all_corners.append(base + _box_corners(a + clo, a + chi) @ sys.L_inv.T)
    lo, hi = _integer_hull(np.vstack(all_corners))
    return _enumerate_box(lo, hi, PREIMAGE_CANDIDATE_CAP)


def _meet_integer_points(
    sys: QuantizedSystem, base: np.ndarray, anchors: np.ndarray
) -> FiniteLatticeSet:
    """Integer points of base + L^{-1}(anchors + cell), anchors being a finite
    set of lattice points (rows).

    Membership is decided through the quantizer (z qualifies iff the quantized
    image of L(z - base) is an anchor), so boundary ties resolve exactly as in
    the forward map."""
    if len(anchors) == 0:
        return FiniteLatticeSet.empty()
    cand = _meet_candidates(sys, base, anchors)
    img = sys.quantizer.quantize_many((cand - base) @ sys.L.T)
    anchor_set = {tuple(int(v) for v in a) for a in anchors}
    mask = np.fromiter(
        (tuple(int(v) for v in r) in anchor_set for r in img), dtype=bool, count=len(img)
    )
    return FiniteLatticeSet.from_points(cand[mask])


def sigma(
    sys: QuantizedSystem, x: Sequence[int], N: int, *, check: bool = True
) -> list[FiniteLatticeSet]:
    """Set-valued offsets of the iterated preimages from the companion orbit,
    levels 1..N, computed by the one-step recurrence driven by the companion
    system's errors.

    With check=True every level is verified against the direct difference
    (iterated preimage translated back by the companion orbit); a mismatch is
    a hard failure naming the level.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n = sys.dim
    levels: list[FiniteLatticeSet] = []
    current = FiniteLatticeSet.from_points([(0,) * n])
    y = _as_point(x)
    for k in range(1, N + 1):
        y_next = compensating_step(sys, y)
        e_k = matvec_cols(sys.L_inv, y[None, :].astype(np.int64))[0] - y_next
        if not sys.quantizer_comp.cell.region_contains(e_k):
            raise DynamicsError(f"level {k}: companion error escaped its cell")
        # Candidate geometry from the one-step recurrence; membership decided
        # in absolute coordinates through the forward map, so boundary ties
        # match the direct preimage computation exactly.
        prev_abs = {tuple(int(v) for v in np.asarray(p) + y) for p in current}
        if prev_abs:
            cand = _meet_candidates(sys, e_k, current.points_array(n))
            img, _ = step_points(sys, cand + y_next)
            mask = np.fromiter(
                (tuple(int(v) for v in r) in prev_abs for r in img),
                dtype=bool,
                count=len(img),
            )
            current = FiniteLatticeSet.from_points(cand[mask])
        else:
            current = FiniteLatticeSet.empty()
        y = y_next
        levels.append(current)
    if check:
        direct_levels = basin(sys, x, N)
        z = _as_point(x)
        for k in range(1, N + 1):
            z_next = compensating_step(sys, z)
            z = z_next
            expected = direct_levels[k - 1].shifted(-z)
            if expected != levels[k - 1]:
                raise DynamicsError(
                    f"level {k}: recurrence offsets {levels[k - 1].elems} != "
                    f"direct offsets {expected.elems}"
                )
    return levels


def cardinalities(sys: QuantizedSystem, x: Sequence[int], N: int) -> list[int]:
    """Preimage-set sizes at depths 1..N."""
    return [len(b) for b in basin(sys, x, N)]


def preimage_count_scan(
    sys: QuantizedSystem, frag: Fragment, depth: int = 1
) -> tuple[np.ndarray, int]:
    """Preimage count at the given depth for every fragment point at once.

    Scans an outer box guaranteed to contain every depth-step preimage of the
    fragment (interval arithmetic on transformed corners), pushes it forward,
    and histograms the landings.  Returns (counts in lexicographic fragment
    order, grazing count)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n = sys.dim
    a = np.asarray(frag.a, dtype=float)
    ell = np.asarray(frag.ell, dtype=float)
    lo, hi = a, a + ell - 1.0
    clo, chi = sys.quantizer.cell.region_bbox()
    for _ in range(depth):
        corners = _box_corners(lo + clo, hi + chi) @ sys.L_inv.T
        ilo, ihi = _integer_hull(corners)
        lo, hi = ilo.astype(float), ihi.astype(float)
    outer = Fragment(tuple(int(v) for v in lo), tuple(int(v) for v in hi - lo + 1))
    if outer.count > SCAN_CANDIDATE_CAP:
        raise DynamicsError(f"outer scan of {outer.count} points exceeds cap {SCAN_CANDIDATE_CAP}")
    pts = fragment_grid(outer)
    flags = 0
    for _ in range(depth):
        pts, fl = step_points(sys, pts)
        flags += fl
    inside = np.all(
        (pts >= np.asarray(frag.a, dtype=np.int64))
        & (pts < np.asarray(frag.a, dtype=np.int64) + np.asarray(frag.ell, dtype=np.int64)),
        axis=1,
    )
    landed = pts[inside] - np.asarray(frag.a, dtype=np.int64)
    strides = np.ones(n, dtype=np.int64)
    for k in range(n - 2, -1, -1):
        strides[k] = strides[k + 1] * frag.ell[k + 1]
    idx = landed @ strides
    counts = np.bincount(idx, minlength=frag.count).astype(np.int64)
    return counts, flags

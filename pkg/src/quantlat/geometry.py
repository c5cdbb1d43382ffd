"""Half-open box unions in the unit cube, cells that tile space under integer
translation, quantizers built from them, and exact first/second moments of the
uniform distribution over a cell.

All boxes are half-open (lower edge included, upper excluded).  Boundary ties
everywhere resolve downward-closed, matching the half-open convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numutil import floor_frac, frac_unit, kronecker_points

# Measure bookkeeping tolerance for box splitting / translation.
MEASURE_TOL = 1e-12

# Cell validation: measure budget and coverage sample size.
CELL_MEASURE_TOL = 1e-9
CELL_COVERAGE_SAMPLES = 100_000

# Flat piece scan below this box count; per-axis interval index above.
FLAT_SCAN_LIMIT = 64


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open box [lo, hi)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must have equal positive length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"degenerate box: lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    def contains(self, u: Sequence[float]) -> bool:
        return all(a <= x < b for a, b, x in zip(self.lo, self.hi, u))

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts < hi), axis=1)

    def shifted(self, t: Sequence[float]) -> "Box":
        return Box(
            tuple(a + float(v) for a, v in zip(self.lo, t)),
            tuple(b + float(v) for b, v in zip(self.hi, t)),
        )


def box_intersect(a: Box, b: Box) -> Box | None:
    lo = tuple(max(x, y) for x, y in zip(a.lo, b.lo))
    hi = tuple(min(x, y) for x, y in zip(a.hi, b.hi))
    if any(p >= q for p, q in zip(lo, hi)):
        return None
    return Box(lo, hi)


def box_subtract(a: Box, b: Box) -> list[Box]:
    """a minus b as a list of disjoint boxes (may return [a])."""
    if box_intersect(a, b) is None:
        return [a]
    olo = [max(x, y) for x, y in zip(a.lo, b.lo)]
    ohi = [min(x, y) for x, y in zip(a.hi, b.hi)]
    pieces: list[Box] = []
    cur_lo = list(a.lo)
    cur_hi = list(a.hi)
    for k in range(a.dim):
        if cur_lo[k] < olo[k]:
            hi = cur_hi.copy()
            hi[k] = olo[k]
            pieces.append(Box(tuple(cur_lo), tuple(hi)))
            cur_lo[k] = olo[k]
        if ohi[k] < cur_hi[k]:
            lo = cur_lo.copy()
            lo[k] = ohi[k]
            pieces.append(Box(tuple(lo), tuple(cur_hi)))
            cur_hi[k] = ohi[k]
    return pieces


def _disjoint_union(boxes: Sequence[Box]) -> list[Box]:
    """Split boxes pairwise so the result is disjoint with the same union."""
    out: list[Box] = []
    for b in boxes:
        parts = [b]
        for d in out:
            parts = [p for part in parts for p in box_subtract(part, d)]
        out.extend(parts)
    return out


def _check_disjoint(boxes: Sequence[Box]) -> None:
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if box_intersect(boxes[i], boxes[j]) is not None:
                raise ValueError(f"boxes {i} and {j} overlap: {boxes[i]} / {boxes[j]}")


@dataclass(frozen=True)
class JordanSet:
    """Finite disjoint union of half-open boxes inside [0, 1)^dim."""

    dim: int
    boxes: tuple[Box, ...]

    def __post_init__(self):
        boxes = tuple(self.boxes)
        for b in boxes:
            if b.dim != self.dim:
                raise ValueError("box dimension mismatch")
            if any(a < 0.0 for a in b.lo) or any(c > 1.0 for c in b.hi):
                raise ValueError(f"box outside the unit cube: lo={b.lo} hi={b.hi}")
        _check_disjoint(boxes)
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def empty(cls, dim: int) -> "JordanSet":
        return cls(dim, ())

    @classmethod
    def full(cls, dim: int) -> "JordanSet":
        return cls(dim, (Box((0.0,) * dim, (1.0,) * dim),))

    @property
    def measure(self) -> float:
        return float(sum(b.volume for b in self.boxes))

    def contains(self, u: Sequence[float]) -> bool:
        return any(b.contains(u) for b in self.boxes)

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        mask = np.zeros(len(pts), dtype=bool)
        for b in self.boxes:
            mask |= b.contains_many(pts)
        return mask

    def complement(self) -> "JordanSet":
        parts = [Box((0.0,) * self.dim, (1.0,) * self.dim)]
        for b in self.boxes:
            parts = [p for part in parts for p in box_subtract(part, b)]
        return JordanSet(self.dim, tuple(parts))

    def intersect(self, other: "JordanSet") -> "JordanSet":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        parts = []
        for a in self.boxes:
            for b in other.boxes:
                c = box_intersect(a, b)
                if c is not None:
                    parts.append(c)
        return JordanSet(self.dim, tuple(parts))

    def union(self, other: "JordanSet") -> "JordanSet":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return JordanSet(self.dim, tuple(_disjoint_union(self.boxes + other.boxes)))

    def product(self, other: "JordanSet") -> "JordanSet":
        """Cartesian product, a Jordan set in the combined dimension."""
        boxes = tuple(
            Box(a.lo + b.lo, a.hi + b.hi) for a in self.boxes for b in other.boxes
        )
        return JordanSet(self.dim + other.dim, boxes)

    def translate_mod1(self, t: Sequence[float]) -> "JordanSet":
        """Translate by t on the torus: shift every box, wrap back into [0,1)^dim."""
        shift = frac_unit(np.asarray(t, dtype=float).copy())
        boxes = [b.shifted(shift) for b in self.boxes]
        for k in range(self.dim):
            split: list[Box] = []
            for b in boxes:
                if b.lo[k] < 1.0 < b.hi[k]:
                    hi = list(b.hi)
                    hi[k] = 1.0
                    lo = list(b.lo)
                    lo[k] = 1.0
                    split.append(Box(b.lo, tuple(hi)))
                    split.append(Box(tuple(lo), b.hi))
                else:
                    split.append(b)
            boxes = split
        wrapped = []
        for b in boxes:
            off = tuple(-1.0 if a >= 1.0 else 0.0 for a in b.lo)
            wrapped.append(b.shifted(off))
        return JordanSet(self.dim, tuple(wrapped))


def jordan_from_boxes(raw: Sequence[Box]) -> JordanSet:
    """Canonical disjoint form of a union of boxes in [0, 1)^dim."""
    if not raw:
        raise ValueError("at least one box required (use JordanSet.empty for the empty set)")
    dim = raw[0].dim
    return JordanSet(dim, tuple(_disjoint_union(list(raw))))


class CellError(ValueError):
    """Cell validation failure; message carries a witness where applicable."""


@dataclass(frozen=True)
class Cell:
    """Region whose integer translates partition space, in canonical form:
    pieces of [0, 1)^dim paired with the integer shift that places them."""

    dim: int
    pieces: tuple[tuple[JordanSet, tuple[int, ...]], ...]
    _flat: tuple = field(init=False, repr=False, compare=False)
    _index: tuple | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        shifts = [s for _, s in self.pieces]
        if len(set(shifts)) != len(shifts):
            raise CellError("duplicate piece shifts")
        flat = []
        for piece, shift in self.pieces:
            if piece.dim != self.dim or len(shift) != self.dim:
                raise CellError("piece dimension mismatch")
            for b in piece.boxes:
                flat.append((np.asarray(b.lo), np.asarray(b.hi), np.asarray(shift, dtype=np.int64)))
        object.__setattr__(self, "_flat", tuple(flat))
        object.__setattr__(self, "_index", self._build_index() if len(flat) > FLAT_SCAN_LIMIT else None)

    def _build_index(self):
        # Per-axis breakpoints; each bucket knows which boxes can contain it.
        cuts = []
        for k in range(self.dim):
            edges = sorted({0.0, 1.0} | {lo[k] for lo, _, _ in self._flat} | {hi[k] for _, hi, _ in self._flat})
            cuts.append(np.asarray(edges))
        buckets: dict[tuple[int, ...], list[int]] = {}
        for i, (lo, hi, _) in enumerate(self._flat):
            spans = [
                range(
                    int(np.searchsorted(cuts[k], lo[k], side="right")) - 1,
                    int(np.searchsorted(cuts[k], hi[k], side="left")),
                )
                for k in range(self.dim)
            ]
            idx = [(0,) * 0]
            for span in spans:
                idx = [t + (j,) for t in idx for j in span]
            for t in idx:
                buckets.setdefault(t, []).append(i)
        return (cuts, buckets)

    @property
    def measure(self) -> float:
        return float(sum(piece.measure for piece, _ in self.pieces))

    def locate_pieces(self, w: np.ndarray) -> np.ndarray:
        """Index of the flat box containing each point of w in [0,1)^dim, else -1."""
        w = np.atleast_2d(w)
        out = np.full(len(w), -1, dtype=np.int64)
        if self._index is None:
            for i, (lo, hi, _) in enumerate(self._flat):
                hit = np.all((w >= lo) & (w < hi), axis=1) & (out < 0)
                out[hit] = i
            return out
        cuts, buckets = self._index
        keys = np.stack(
            [np.searchsorted(cuts[k], w[:, k], side="right") - 1 for k in range(self.dim)],
            axis=1,
        )
        for row in range(len(w)):
            for i in buckets.get(tuple(int(v) for v in keys[row]), ()):
                lo, hi, _ = self._flat[i]
                if np.all((w[row] >= lo) & (w[row] < hi)):
                    out[row] = i
                    break
        return out

    def shift_of_flat(self, idx: np.ndarray) -> np.ndarray:
        shifts = np.stack([s for _, _, s in self._flat])
        return shifts[idx]

    def region_boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Absolute boxes (piece box + shift) whose disjoint union is the cell region."""
        return [(lo + s, hi + s) for lo, hi, s in self._flat]

    def region_contains_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        mask = np.zeros(len(pts), dtype=bool)
        for lo, hi in self.region_boxes():
            mask |= np.all((pts >= lo) & (pts < hi), axis=1)
        return mask

    def region_contains(self, u: Sequence[float]) -> bool:
        return bool(self.region_contains_many(np.asarray(u, dtype=float)[None, :])[0])

    def region_bbox(self) -> tuple[np.ndarray, np.ndarray]:
        los = np.stack([lo for lo, _ in self.region_boxes()])
        his = np.stack([hi for _, hi in self.region_boxes()])
        return los.min(axis=0), his.max(axis=0)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples from the cell region.

        Draws uniform points of [0,1)^dim and maps each through the cell's
        piece decomposition (the inverse of the fractional-part bijection),
        so the output is exactly uniform on the region.
        """
        w = rng.random((count, self.dim))
        idx = self.locate_pieces(w)
        if np.any(idx < 0):
            bad = w[idx < 0][0]
            raise CellError(f"cell does not cover sampled point {bad.tolist()}")
        return w + self.shift_of_flat(idx)


def cell_build(pieces: Sequence[tuple[JordanSet, Sequence[int]]]) -> Cell:
    """Validated cell: measure within 1e-9 of 1 and unique coverage of the unit
    cube on a deterministic quasi-random sample; failures carry a witness point.
    """
    norm = tuple((piece, tuple(int(v) for v in shift)) for piece, shift in pieces)
    if not norm:
        raise CellError("a cell needs at least one piece")
    dim = norm[0][0].dim
    cell = Cell(dim, norm)
    total = cell.measure
    if abs(total - 1.0) > CELL_MEASURE_TOL:
        kind = "deficit" if total < 1.0 else "excess"
        raise CellError(f"piece measures sum to {total!r} (measure {kind})")
    pts = kronecker_points(CELL_COVERAGE_SAMPLES, dim)
    cover = np.zeros(len(pts), dtype=np.int64)
    for piece, _ in norm:
        cover += piece.contains_many(pts).astype(np.int64)
    if np.any(cover != 1):
        bad = int(np.argmax(cover != 1))
        raise CellError(
            f"point {pts[bad].tolist()} covered {int(cover[bad])} times (expected exactly once)"
        )
    return cell


def _snap_integers(v: np.ndarray) -> np.ndarray:
    """Round coordinates within MEASURE_TOL of an integer to that integer."""
    r = np.round(v)
    near = np.abs(v - r) < MEASURE_TOL
    out = v.copy()
    out[near] = r[near]
    return out


def cell_translate(cell: Cell, u: Sequence[float]) -> Cell:
    """Cell whose region is the translate of cell's region by u, re-expressed
    in canonical (piece in [0,1)^dim, integer shift) form."""
    t = np.asarray(u, dtype=float)
    if t.shape != (cell.dim,):
        raise ValueError("translation dimension mismatch")
    # Snapping near-integer edges first keeps the integer splits free of
    # measure-zero slivers; total volume moves by less than MEASURE_TOL.
    moved = [
        (_snap_integers(lo + t), _snap_integers(hi + t)) for lo, hi in cell.region_boxes()
    ]
    moved = [(lo, hi) for lo, hi in moved if np.all(hi > lo)]
    # Split each box at interior integer hyperplanes (at most one per axis:
    # piece boxes have unit-bounded extent).
    for k in range(cell.dim):
        split = []
        for lo, hi in moved:
            cut = np.ceil(lo[k])
            if cut <= lo[k]:
                cut += 1.0
            if cut < hi[k]:
                mid_hi = hi.copy()
                mid_hi[k] = cut
                mid_lo = lo.copy()
                mid_lo[k] = cut
                split.append((lo, mid_hi))
                split.append((mid_lo, hi))
            else:
                split.append((lo, hi))
        moved = split
    grouped: dict[tuple[int, ...], list[Box]] = {}
    for lo, hi in moved:
        base = np.floor(lo)
        shift = tuple(int(v) for v in base)
        grouped.setdefault(shift, []).append(Box(tuple(lo - base), tuple(hi - base)))
    pieces = tuple(
        (JordanSet(cell.dim, tuple(boxes)), shift) for shift, boxes in sorted(grouped.items())
    )
    return Cell(cell.dim, pieces)


def unit_cube_cell(n: int) -> Cell:
    return Cell(n, ((JordanSet.full(n), (0,) * n),))


def roundoff_cell(n: int) -> Cell:
    """The cell of the nearest-node quantizer: the cube centered at the origin."""
    return cell_translate(unit_cube_cell(n), (-0.5,) * n)


def cross_cell() -> Cell:
    """A nontrivial planar cell: the central cross of the unit square stays
    put and the four corner squares are dispatched to the diagonal neighbours."""
    third = 1.0 / 3.0
    cross = jordan_from_boxes(
        [
            Box((0.0, third), (1.0, 2 * third)),
            Box((third, 0.0), (2 * third, 1.0)),
        ]
    )
    corners = [
        (Box((0.0, 0.0), (third, third)), (-1, -1)),
        (Box((2 * third, 0.0), (1.0, third)), (1, -1)),
        (Box((0.0, 2 * third), (third, 1.0)), (-1, 1)),
        (Box((2 * third, 2 * third), (1.0, 1.0)), (1, 1)),
    ]
    pieces = [(cross, (0, 0))]
    pieces += [(JordanSet(2, (b,)), s) for b, s in corners]
    return cell_build(pieces)


@dataclass(frozen=True)
class Quantizer:
    """Map from real vectors to integer lattice nodes commuting with integer
    translations; fully determined by the cell that the origin's preimage forms."""

    cell: Cell
    cube_offset: tuple[float, ...] | None = None

    @classmethod
    def from_cell(cls, cell: Cell) -> "Quantizer":
        lo, hi = cell.region_bbox()
        if np.all(np.abs(hi - lo - 1.0) < MEASURE_TOL):
            return cls(cell, tuple(float(v) for v in lo))
        return cls(cell, None)

    @property
    def dim(self) -> int:
        return self.cell.dim

    def quantize_many(self, u: np.ndarray) -> np.ndarray:
        """The unique integer z with u - z in the quantizer cell, per row."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.cube_offset is not None:
            # floor of the exact difference: the rounded u - offset can cross
            # an integer the exact value does not reach (systematic for the
            # half-integer offsets of centered cells).
            off = np.asarray(self.cube_offset)
            f = np.floor(u - off)
            f = f - (u < f + off) + (u >= (f + 1.0) + off)
            return f.astype(np.int64)
        f, w = floor_frac(u.copy())
        idx = self.cell.locate_pieces(w)
        if np.any(idx < 0):
            bad = u[idx < 0][0]
            raise CellError(f"quantizer cell does not cover fractional part of {bad.tolist()}")
        return f - self.cell.shift_of_flat(idx)

    def quantize(self, u: Sequence[float]) -> np.ndarray:
        return self.quantize_many(np.asarray(u, dtype=float)[None, :])[0]


def roundoff_quantizer(n: int) -> Quantizer:
    return Quantizer.from_cell(roundoff_cell(n))


def cell_mean(cell: Cell) -> np.ndarray:
    """Mean vector of the uniform distribution over the cell region (analytic)."""
    mu = np.zeros(cell.dim)
    for lo, hi in cell.region_boxes():
        vol = float(np.prod(hi - lo))
        mu += vol * (lo + hi) / 2.0
    return mu


def cell_covariance(cell: Cell) -> np.ndarray:
    """Covariance of the uniform distribution over the cell region (analytic).

    Built from exact per-box second moments; a non positive definite result
    signals a construction bug and is a hard failure.
    """
    mu = cell_mean(cell)
    second = np.zeros((cell.dim, cell.dim))
    for lo, hi in cell.region_boxes():
        vol = float(np.prod(hi - lo))
        c = (lo + hi) / 2.0
        w = hi - lo
        second += vol * (np.outer(c, c) + np.diag(w * w / 12.0))
    psi = second - np.outer(mu, mu)
    psi = (psi + psi.T) / 2.0
    try:
        np.linalg.cholesky(psi)
    except np.linalg.LinAlgError as exc:
        raise CellError(f"cell covariance is not positive definite: {psi}") from exc
    return psi


def compensating_quantizer(quantizer: Quantizer, L_inv: np.ndarray, mu: np.ndarray) -> Quantizer:
    """Quantizer of the companion backward-time system; its cell is the original
    cell translated by -(I + L^{-1}) mu."""
    n = quantizer.dim
    shift = -(np.eye(n) + np.asarray(L_inv)) @ np.asarray(mu, dtype=float)
    return Quantizer.from_cell(cell_translate(quantizer.cell, shift))

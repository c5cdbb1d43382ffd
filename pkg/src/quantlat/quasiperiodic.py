"""Quasiperiodic subsets of the integer lattice: membership through the
fractional part of a linear image, their set algebra, stacked power matrices,
and a bounded search for integer resonance relations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import _kernels
from .geometry import Box, JordanSet
from .lattice import Fragment, FrequencyEstimate
from .numutil import frac_unit, rng_from_seed

# Residual budget for powers computed by repeated multiplication.
POWER_RESIDUAL_TOL = 1e-8

# Exhaustive resonance enumeration is limited to this many row dimensions;
# larger stacks use a seeded randomized search.
EXHAUSTIVE_ROWS = 4


@dataclass(frozen=True)
class QuasiperiodicSet:
    """Lattice points whose image under a real matrix lands (mod 1) in a
    Jordan-measurable window of the unit cube."""

    Lambda: np.ndarray
    G: JordanSet

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.Lambda, dtype=float))
        if lam.shape[0] != self.G.dim:
            raise ValueError(
                f"window dimension {self.G.dim} does not match matrix rows {lam.shape[0]}"
            )
        lam.setflags(write=False)
        object.__setattr__(self, "Lambda", lam)

    @property
    def m(self) -> int:
        return self.Lambda.shape[0]

    @property
    def n(self) -> int:
        return self.Lambda.shape[1]

    def member(self, x: Sequence[int]) -> bool:
        return bool(self.contains_many(np.asarray(x, dtype=np.int64)[None, :])[0])

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.n:
            raise ValueError("point dimension mismatch")
        w = frac_unit(pts.astype(float) @ self.Lambda.T)
        return self.G.contains_many(w)

    def complement(self) -> "QuasiperiodicSet":
        return QuasiperiodicSet(self.Lambda, self.G.complement())

    def intersect(self, other: "QuasiperiodicSet") -> "QuasiperiodicSet":
        self._require_same_matrix(other)
        return QuasiperiodicSet(self.Lambda, self.G.intersect(other.G))

    def union(self, other: "QuasiperiodicSet") -> "QuasiperiodicSet":
        self._require_same_matrix(other)
        return QuasiperiodicSet(self.Lambda, self.G.union(other.G))

    def stack(self, other: "QuasiperiodicSet") -> "QuasiperiodicSet":
        """Intersection across different matrices: rows concatenate and the
        windows multiply, so membership is the conjunction of memberships."""
        if other.n != self.n:
            raise ValueError("column dimension mismatch")
        lam = np.vstack([self.Lambda, other.Lambda])
        return QuasiperiodicSet(lam, self.G.product(other.G))

    def translated(self, z: Sequence[int]) -> "QuasiperiodicSet":
        """The set shifted by an integer vector: the window slides by the
        fractional image of the shift."""
        z = np.asarray(z, dtype=np.int64)
        t = frac_unit(self.Lambda @ z.astype(float))
        return QuasiperiodicSet(self.Lambda, self.G.translate_mod1(t))

    def _require_same_matrix(self, other: "QuasiperiodicSet") -> None:
        if other.Lambda.shape != self.Lambda.shape or not np.array_equal(
            other.Lambda, self.Lambda
        ):
            raise ValueError("set-algebra operations require the same matrix")


def theoretical_frequency(q: QuasiperiodicSet) -> float:
    """Limit point-fraction of the set in growing fragments, valid when the
    matrix carries no integer resonance (caller's responsibility; see
    resonance_search)."""
    return q.G.measure


def fragment_frequency(q: QuasiperiodicSet, frag: Fragment) -> FrequencyEstimate:
    """Exact member count of the set over a fragment, through the scan kernel."""
    los = np.ascontiguousarray(np.stack([np.asarray(b.lo) for b in q.G.boxes]))
    his = np.ascontiguousarray(np.stack([np.asarray(b.hi) for b in q.G.boxes]))
    hits = _kernels.frac_box_count(
        np.ascontiguousarray(q.Lambda),
        np.asarray(frag.a, dtype=np.int64),
        np.asarray(frag.ell, dtype=np.int64),
        los,
        his,
    )
    return FrequencyEstimate(int(hits), frag.count, frag)


@dataclass(frozen=True)
class PowerStack:
    """Stack of matrix powers, rows ordered by the exponent sequence."""

    base: np.ndarray
    exponents: tuple[int, ...]
    stacked: np.ndarray

    @property
    def n(self) -> int:
        return self.base.shape[0]

    def block(self, k: int) -> np.ndarray:
        i = self.exponents.index(k)
        return self.stacked[i * self.n : (i + 1) * self.n]


def power_stack(
    L: np.ndarray, N: int, sign: Literal["forward", "backward", "both"] = "forward"
) -> PowerStack:
    """Stack the powers L^1..L^N, L^-N..L^-1, or both, checking each power's
    round-trip residual against the inverse."""
    L = np.asarray(L, dtype=float)
    if N < 1:
        raise ValueError("N must be positive")
    n = L.shape[0]
    L_inv = np.linalg.inv(L)
    pow_fwd = [np.eye(n)]
    pow_bwd = [np.eye(n)]
    for _ in range(N):
        pow_fwd.append(pow_fwd[-1] @ L)
        pow_bwd.append(pow_bwd[-1] @ L_inv)
    for k in range(1, N + 1):
        resid = np.max(np.abs(pow_fwd[k] @ pow_bwd[k] - np.eye(n)))
        if resid >= POWER_RESIDUAL_TOL:
            raise ValueError(f"power {k} fails the round-trip residual check: {resid:.3e}")
    if sign == "forward":
        exps = tuple(range(1, N + 1))
        blocks = [pow_fwd[k] for k in range(1, N + 1)]
    elif sign == "backward":
        exps = tuple(range(-N, 0))
        blocks = [pow_bwd[-k] for k in range(-N, 0)]
    elif sign == "both":
        exps = tuple(range(-N, 0)) + tuple(range(1, N + 1))
        blocks = [pow_bwd[-k] for k in range(-N, 0)] + [pow_fwd[k] for k in range(1, N + 1)]
    else:
        raise ValueError(f"unknown sign {sign!r}")
    return PowerStack(L, exps, np.vstack(blocks))


def stack_event(
    L: np.ndarray, N: int, G: JordanSet, sign: Literal["forward", "backward"] = "forward"
) -> QuasiperiodicSet:
    """Quasiperiodic event over the stacked powers of L with window G."""
    st = power_stack(L, N, sign)
    if G.dim != st.stacked.shape[0]:
        raise ValueError("window dimension must equal stack rows")
    return QuasiperiodicSet(st.stacked, G)


def slab_window(dim: int, measure: float, axis: int = 0) -> JordanSet:
    """Axis-aligned window [0, measure) on one axis, full range elsewhere."""
    if not 0.0 < measure <= 1.0:
        raise ValueError("measure must lie in (0, 1]")
    lo = [0.0] * dim
    hi = [1.0] * dim
    hi[axis] = measure
    return JordanSet(dim, (Box(tuple(lo), tuple(hi)),))


def _int_distance(v: np.ndarray) -> np.ndarray:
    """Max-norm distance of each row to the nearest integer vector."""
    return np.max(np.abs(v - np.round(v)), axis=-1)


def resonance_search(
    Lambda: np.ndarray,
    coeff_bound: int,
    tol: float = 1e-9,
    *,
    draws: int = 200_000,
    seed: int = 0,
) -> np.ndarray | None:
    """Search for a nonzero integer vector u with ||u||_inf <= coeff_bound whose
    transpose-image lies within tol of an integer vector.

    Returns such a u (evidence of resonance) or None (heuristic evidence of
    nonresonance at this bound).  Exhaustive for up to EXHAUSTIVE_ROWS rows;
    a seeded randomized search above that.
    """
    lam = np.atleast_2d(np.asarray(Lambda, dtype=float))
    m = lam.shape[0]
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be positive")
    if m <= EXHAUSTIVE_ROWS:
        # Enumerate slices over the leading coordinate so memory stays at
        # (2B+1)^(m-1) rows even for wide bounds.
        axes = [np.arange(-coeff_bound, coeff_bound + 1)] * (m - 1)
        if axes:
            mesh = np.meshgrid(*axes, indexing="ij")
            tail = np.stack([g.reshape(-1) for g in mesh], axis=1)
        else:
            tail = np.zeros((1, 0), dtype=np.int64)
        found = []
        for lead in range(-coeff_bound, coeff_bound + 1):
            grid = np.hstack([np.full((len(tail), 1), lead, dtype=np.int64), tail])
            grid = grid[np.any(grid != 0, axis=1)]
            if not len(grid):
                continue
            dist = _int_distance(grid.astype(float) @ lam)
            hits = np.flatnonzero(dist < tol)
            if hits.size:
                found.append(grid[hits])
        if not found:
            return None
        # Deterministic choice: smallest max-norm, then lexicographic.
        cand = np.vstack(found)
        order = np.lexsort(tuple(cand[:, k] for k in range(m - 1, -1, -1)))
        cand = cand[order]
        norms = np.max(np.abs(cand), axis=1)
        return cand[int(np.argmin(norms))].astype(np.int64)
    rng = rng_from_seed(seed)
    for _ in range(max(1, draws // 10_000)):
        u = rng.integers(-coeff_bound, coeff_bound + 1, size=(10_000, m))
        u = u[np.any(u != 0, axis=1)]
        dist = _int_distance(u.astype(float) @ lam)
        hits = np.flatnonzero(dist < tol)
        if hits.size:
            return u[hits[0]].astype(np.int64)
    return None


def irrational_matrix_2x2() -> np.ndarray:
    """A 2x2 matrix with entries built from square-root and golden-ratio
    generators; passes resonance_search cleanly at moderate bounds."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    return np.array(
        [
            [np.sqrt(2.0) - 1.0, np.sqrt(3.0) - 1.0],
            [phi - 1.0, np.sqrt(6.0) - 2.0],
        ]
    )

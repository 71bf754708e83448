"""Bit-level linear algebra over F_2^n plus the fast Walsh-Hadamard transform.

Points of F_2^n are machine ints in [0, 2^n); bit i is coordinate i, index 0
is the zero vector.  Dense real/complex tables over F_2^n are numpy arrays of
length exactly 2^n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import ContractError, DimensionMismatchError


@dataclass(frozen=True)
class GF2Vector:
    """A point of F_2^n as a bitmask; bit i = coordinate i."""

    bits: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ContractError(f"negative dimension {self.n}")
        if not 0 <= self.bits < (1 << self.n):
            raise ContractError(f"bitmask {self.bits} out of range for F_2^{self.n}")

    def __xor__(self, other: "GF2Vector") -> "GF2Vector":
        if self.n != other.n:
            raise DimensionMismatchError(f"dimensions {self.n} != {other.n}")
        return GF2Vector(self.bits ^ other.bits, self.n)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")


def rank_of_masks(masks: Iterable[int]) -> int:
    """Rank over GF(2) of bitmask row vectors (Gaussian elimination)."""
    pivots: list[int] = []
    for row in masks:
        for p in pivots:
            row = min(row, row ^ p)
        if row:
            pivots.append(row)
    return len(pivots)


def rank_of(vectors: Sequence[GF2Vector]) -> int:
    """Dimension of the span of `vectors`; 0 for an empty list."""
    if not vectors:
        return 0
    n = vectors[0].n
    for v in vectors:
        if v.n != n:
            raise DimensionMismatchError(f"mixed dimensions {n} and {v.n}")
    return rank_of_masks(v.bits for v in vectors)


def rref(masks: Iterable[int]) -> list[int]:
    """Reduced row-echelon basis (pivot = highest set bit), ascending ints."""
    rows: list[int] = []
    for row in masks:
        for r in rows:
            row = min(row, row ^ r)
        if row:
            rows.append(row)
            rows.sort(reverse=True)
    # back-substitute so each pivot bit appears in exactly one row
    for i, r in enumerate(rows):
        p = r.bit_length() - 1
        for j in range(len(rows)):
            if j != i and (rows[j] >> p) & 1:
                rows[j] ^= r
    return sorted(rows)


def in_span(v: int, basis: Sequence[int]) -> bool:
    for b in basis:
        v = min(v, v ^ b)
    return v == 0


@dataclass(frozen=True)
class GF2Subspace:
    """Subspace of F_2^n given by a reduced-echelon basis (ascending ints)."""

    basis: tuple[GF2Vector, ...]
    ambient_dim: int

    def __post_init__(self) -> None:
        masks = [v.bits for v in self.basis]
        if any(v.n != self.ambient_dim for v in self.basis):
            raise DimensionMismatchError("basis vector outside ambient space")
        if any(m == 0 for m in masks):
            raise ContractError("zero vector in basis")
        if rref(masks) != sorted(masks):
            raise ContractError("basis is not in reduced echelon form")

    @classmethod
    def from_spanning(cls, masks: Iterable[int], n: int) -> "GF2Subspace":
        return cls(tuple(GF2Vector(m, n) for m in rref(masks)), n)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, bits: int) -> bool:
        return in_span(bits, [v.bits for v in self.basis])

    def elements(self) -> Iterator[int]:
        """All 2^dim elements, in no particular order."""
        masks = [v.bits for v in self.basis]
        for combo in range(1 << len(masks)):
            x = 0
            c = combo
            i = 0
            while c:
                if c & 1:
                    x ^= masks[i]
                c >>= 1
                i += 1
            yield x


# ---------------------------------------------------------------------------
# Dense tables and the Walsh-Hadamard transform
# ---------------------------------------------------------------------------


def table_dim(values: np.ndarray) -> int:
    """Validate a dense table over F_2^n and return n."""
    m = values.shape[-1]
    if m <= 0 or m & (m - 1):
        raise ContractError(f"table length {m} is not a power of two")
    if not np.all(np.isfinite(values)):
        raise ContractError("table has non-finite entries")
    return m.bit_length() - 1


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterfly along the last axis."""
    a = np.array(values, copy=True)
    m = a.shape[-1]
    h = 1
    while h < m:
        x = a.reshape(a.shape[:-1] + (m // (2 * h), 2, h))
        s = x[..., 0, :] + x[..., 1, :]
        d = x[..., 0, :] - x[..., 1, :]
        a = np.stack([s, d], axis=-2).reshape(a.shape)
        h *= 2
    return a


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Forward transform: fhat(xi) = E_x f(x) (-1)^{x.xi}, so fhat(0) = E[f]."""
    arr = np.asarray(values)
    n = table_dim(arr)
    return fwht(arr) / (1 << n)


def inverse_walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Inverse of `walsh_hadamard` (the unnormalized butterfly)."""
    arr = np.asarray(values)
    table_dim(arr)
    return fwht(arr)


# ---------------------------------------------------------------------------
# Maximum subspace avoiding a point set
# ---------------------------------------------------------------------------

# Search state: canonical generating sequences v_1 < v_2 < ... where each v_i
# is the minimum of its coset v_i + span(previous).  Every subspace has exactly
# one such sequence, and it equals its reduced-echelon basis sorted ascending,
# so depth-first order realizes the lexicographically-smallest-basis tie-break.


def _dfs_max_subspace(
    candidates: list[int],
    forbidden: frozenset[int],
    target: Optional[int],
) -> list[int]:
    best: list[int] = []

    def recurse(chosen: list[int], span_nz: list[int], cands: list[int]) -> bool:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
            if target is not None and len(best) >= target:
                return True
        # counting bound: growing by s dimensions adds 2^s - 1 new cosets of the
        # current span, and each coset minimum is a distinct remaining candidate
        t = len(chosen)
        s = (len(cands) + 1).bit_length() - 1  # max s with 2^s - 1 <= |cands|
        goal = target if target is not None else len(best) + 1
        if t + s < goal:
            return False
        for idx, c in enumerate(cands):
            new_span = span_nz + [c] + [c ^ v for v in span_nz]
            nxt: list[int] = []
            for u in cands[idx + 1 :]:
                if u == c:
                    continue
                ok = True
                for w in (c, *(c ^ v for v in span_nz)):
                    if u == w or (u ^ w) in forbidden or (u ^ w) < u:
                        ok = False
                        break
                if ok:
                    nxt.append(u)
            if recurse(chosen + [c], new_span, nxt):
                return True
        return False

    recurse([], [], candidates)
    return best


def max_subspace_avoiding(
    points: Iterable[int],
    n: int,
    target_dim: Optional[int] = None,
    within: Optional[GF2Subspace] = None,
) -> GF2Subspace:
    """Maximum-dimension subspace whose nonzero elements all avoid `points`.

    With `target_dim`, returns the first subspace reaching that dimension (in
    canonical order) instead of a guaranteed maximum.  With `within`, the
    search is restricted to subspaces of the given subspace.
    """
    forbidden = frozenset(points)
    if 0 in forbidden:
        raise ContractError("point set must exclude the zero vector")
    if within is not None:
        if within.ambient_dim != n:
            raise DimensionMismatchError("`within` lives in a different ambient space")
        local = _local_coordinates(within)
        local_forbidden = {i for i, g in enumerate(local) if g in forbidden}
        sub = max_subspace_avoiding(local_forbidden, within.dim, target_dim=target_dim)
        return GF2Subspace.from_spanning([local[v.bits] for v in sub.basis], n)
    candidates = [
        v for v in range(1, 1 << n) if v not in forbidden
    ]
    if target_dim is None:
        basis = _dfs_max_subspace(candidates, forbidden, None)
        # re-run with the found dimension as an early-exit target so the first
        # (lexicographically least) witness of maximum dimension is returned
        if len(basis) > 0:
            basis = _dfs_max_subspace(candidates, forbidden, len(basis))
    else:
        basis = _dfs_max_subspace(candidates, forbidden, target_dim)
        if len(basis) < target_dim:
            basis = []
    return GF2Subspace.from_spanning(basis, n)


def _local_coordinates(space: GF2Subspace) -> list[int]:
    """Table mapping local index x in [0, 2^dim) to the global element."""
    masks = [v.bits for v in space.basis]
    table = [0] * (1 << len(masks))
    for x in range(1 << len(masks)):
        g = 0
        for i, m in enumerate(masks):
            if (x >> i) & 1:
                g ^= m
        table[x] = g
    return table


def all_subspaces(n: int) -> list[frozenset[int]]:
    """Every subspace of F_2^n as a frozenset of elements (test oracle)."""
    seen: set[frozenset[int]] = {frozenset({0})}
    frontier = [frozenset({0})]
    while frontier:
        nxt = []
        for sp in frontier:
            for v in range(1, 1 << n):
                if v in sp:
                    continue
                grown = frozenset(x ^ w for x in sp for w in (0, v)) | {v}
                if grown not in seen:
                    seen.add(grown)
                    nxt.append(grown)
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(s)))

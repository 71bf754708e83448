"""Simple binary matroids: geometries, critical number, containment, counting.

A matroid here is a full-rank subset of F_2^r \\ {0}, stored as a frozenset of
point indices (ints in [1, 2^r)).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .errors import (
    ContractError,
    DimensionMismatchError,
    MatroidParseError,
    ParameterError,
    ensure_budget,
)
from .gf2 import GF2Vector, max_subspace_avoiding, rank_of_masks


@dataclass(frozen=True)
class Matroid:
    rank: int
    elements: frozenset[int]

    def __post_init__(self) -> None:
        r = self.rank
        if r < 1:
            raise ContractError(f"rank must be positive, got {r}")
        if 0 in self.elements:
            raise ContractError("matroid contains the zero vector")
        if any(not 0 < e < (1 << r) for e in self.elements):
            raise ContractError(f"element outside F_2^{r}")
        if rank_of_masks(self.elements) != r:
            raise ContractError(
                f"element set has rank {rank_of_masks(self.elements)}, declared {r}"
            )

    @classmethod
    def from_elements(cls, elements: Iterable[int], rank: Optional[int] = None) -> "Matroid":
        elems = frozenset(elements)
        if rank is None:
            rank = rank_of_masks(elems)
        return cls(rank, elems)

    @cached_property
    def sorted_elements(self) -> tuple[int, ...]:
        return tuple(sorted(self.elements))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, point: int) -> bool:
        return point in self.elements

    def indicator(self) -> np.ndarray:
        ind = np.zeros(1 << self.rank)
        ind[list(self.elements)] = 1.0
        return ind

    def density(self) -> float:
        return len(self.elements) / (1 << self.rank)


@dataclass(frozen=True)
class LinearInjection:
    """Images of the domain's standard basis under a linear injection."""

    images: tuple[GF2Vector, ...]

    def __post_init__(self) -> None:
        if self.images and rank_of_masks(v.bits for v in self.images) != len(self.images):
            raise ContractError("basis images are linearly dependent")

    def apply(self, x: int) -> int:
        y = 0
        for i, v in enumerate(self.images):
            if (x >> i) & 1:
                y ^= v.bits
        return y

    def maps_into(self, N: Matroid, targets: frozenset[int]) -> bool:
        return all(self.apply(x) in targets for x in N.elements)


# ---------------------------------------------------------------------------
# Standard geometries
# ---------------------------------------------------------------------------


def pg(r: int) -> Matroid:
    """Projective geometry PG(r-1, 2): all nonzero points of F_2^r."""
    if r < 1:
        raise ParameterError("PG needs rank >= 1")
    return Matroid(r, frozenset(range(1, 1 << r)))


def ag(r: int) -> Matroid:
    """Affine geometry AG(r-1, 2): complement of the bottom hyperplane."""
    if r < 1:
        raise ParameterError("AG needs rank >= 1")
    return bb(r, 1)


def bb(r: int, c: int) -> Matroid:
    """Bose-Burton geometry BB(r, c): points with a nonzero top-c coordinate."""
    if not 1 <= c <= r:
        raise ParameterError(f"BB(r, c) needs 1 <= c <= r, got r={r}, c={c}")
    low = 1 << (r - c)
    return Matroid(r, frozenset(range(low, 1 << r)))


def n_geometry(ell: int, c: int, k: int) -> Matroid:
    """BB(ell, c-1) together with k unit vectors from its complement subspace."""
    if c <= 1:
        raise ParameterError("N(ell, c, k) needs c > 1")
    if k < 1:
        raise ParameterError("N(ell, c, k) needs k >= 1")
    if ell < c + k - 1:
        raise ParameterError("N(ell, c, k) needs ell >= c + k - 1")
    base = bb(ell, c - 1)
    extra = frozenset(1 << i for i in range(k))
    return Matroid(ell, base.elements | extra)


_GEOMETRY_RE = re.compile(r"^(PG|AG|BB|N)\(([0-9]+(?:,[0-9]+)*)\)$")


def make_geometry(kind: str) -> Matroid:
    """Parse 'PG(r-1,2)' / 'AG(r-1,2)' / 'BB(r,c)' / 'N(ell,c,k)' descriptors."""
    m = _GEOMETRY_RE.match(kind.replace(" ", ""))
    if not m:
        raise ParameterError(f"unrecognized geometry {kind!r}")
    name, args = m.group(1), [int(a) for a in m.group(2).split(",")]
    if name == "PG":
        if len(args) != 2 or args[1] != 2:
            raise ParameterError("PG takes (r-1, 2)")
        return pg(args[0] + 1)
    if name == "AG":
        if len(args) != 2 or args[1] != 2:
            raise ParameterError("AG takes (r-1, 2)")
        return ag(args[0] + 1)
    if name == "BB":
        if len(args) != 2:
            raise ParameterError("BB takes (r, c)")
        return bb(*args)
    if len(args) != 3:
        raise ParameterError("N takes (ell, c, k)")
    return n_geometry(*args)


# ---------------------------------------------------------------------------
# Critical number
# ---------------------------------------------------------------------------


def critical_number(M: Matroid) -> int:
    """Smallest c such that some (r-c)-dimensional subspace avoids M."""
    avoid = max_subspace_avoiding(M.elements, M.rank)
    return M.rank - avoid.dim


# ---------------------------------------------------------------------------
# Containment and injection counting
# ---------------------------------------------------------------------------


def _levels(N: Matroid) -> list[list[int]]:
    """N's elements grouped by highest set coordinate (prefix-pruning order)."""
    levels: list[list[int]] = [[] for _ in range(N.rank)]
    for e in N.sorted_elements:
        levels[e.bit_length() - 1].append(e)
    return levels


def _search_maps(
    targets: frozenset[int],
    ambient: int,
    N: Matroid,
    injective: bool,
    count_all: bool,
    budget: Optional[int] = None,
):
    """Backtracking over basis images; constraints checked level by level.

    Returns an int count when `count_all`, else the first witness image list
    (or None).
    """
    ell = N.rank
    ensure_budget(1 << (ell * ambient), budget, "linear-map search")
    levels = _levels(N)
    size = 1 << ambient
    images: list[int] = []
    span: set[int] = set()

    def level_ok(t: int) -> bool:
        b = images[t]
        for e in levels[t]:
            img = b
            rest = e & ~(1 << t)
            i = 0
            while rest:
                if rest & 1:
                    img ^= images[i]
                rest >>= 1
                i += 1
            if img not in targets:
                return False
        return True

    def recurse(t: int):
        if t == ell:
            return 1 if count_all else list(images)
        total = 0
        for b in range(size):
            if injective and (b == 0 or b in span):
                continue
            images.append(b)
            if level_ok(t):
                if injective:
                    added = [b] + [b ^ s for s in span]
                    span.update(added)
                    sub = recurse(t + 1)
                    span.difference_update(added)
                else:
                    sub = recurse(t + 1)
                if count_all:
                    total += sub
                elif sub is not None:
                    images.pop()
                    return sub
            images.pop()
        return total if count_all else None

    return recurse(0)


def contains_copy(M: Matroid, N: Matroid, budget: Optional[int] = None) -> Optional[LinearInjection]:
    """Witness linear injection with iota(N) inside M, or None."""
    if N.rank > M.rank:
        return None
    found = _search_maps(M.elements, M.rank, N, injective=True, count_all=False, budget=budget)
    if found is None:
        return None
    return LinearInjection(tuple(GF2Vector(b, M.rank) for b in found))


def count_injections(M: Matroid, N: Matroid, budget: Optional[int] = None) -> int:
    """Number of linear injections sending every element of N into M."""
    if N.rank > M.rank:
        return 0
    return _search_maps(M.elements, M.rank, N, injective=True, count_all=True, budget=budget)


def automorphism_count(N: Matroid, budget: Optional[int] = None) -> int:
    return count_injections(N, N, budget=budget)


def count_copies(M: Matroid, N: Matroid, budget: Optional[int] = None) -> int:
    """Distinct copies: injections divided by |Aut(N)| (always exact)."""
    inj = count_injections(M, N, budget=budget)
    aut = automorphism_count(N, budget=budget)
    if inj % aut:
        raise AssertionError(f"injection count {inj} not divisible by |Aut| = {aut}")
    return inj // aut


def sampled_injection_count(
    M: Matroid, N: Matroid, trials: int, seed: int
) -> dict[str, float]:
    """Unbiased sampling estimate of the injection count, with a 95% CI."""
    rng = np.random.default_rng(seed)
    ell, n = N.rank, M.rank
    forms = N.sorted_elements
    ind = np.zeros(1 << n, dtype=bool)
    ind[list(M.elements)] = True
    xs = rng.integers(0, 1 << n, size=(trials, ell), dtype=np.int64)
    hits = np.zeros(trials, dtype=bool)
    for t in range(trials):
        row = xs[t]
        if rank_of_masks(int(v) for v in row) != ell:
            continue
        ok = True
        for e in forms:
            img = 0
            for i in range(ell):
                if (e >> i) & 1:
                    img ^= int(row[i])
            if not ind[img]:
                ok = False
                break
        hits[t] = ok
    p = float(hits.mean())
    scale = float((1 << n)) ** ell
    half = 1.96 * np.sqrt(max(p * (1 - p), 0.0) / trials) * scale
    return {
        "estimate": p * scale,
        "ci95_low": p * scale - half,
        "ci95_high": p * scale + half,
        "trials": trials,
        "seed": seed,
    }


# ---------------------------------------------------------------------------
# Shifts and doubling
# ---------------------------------------------------------------------------


def shifted_intersection(M: Matroid, h: int) -> frozenset[int]:
    """{w in M : w + h in M}; raw point set, need not be full rank."""
    if not 0 <= h < (1 << M.rank):
        raise ContractError(f"shift {h} outside F_2^{M.rank}")
    return frozenset(w for w in M.elements if (w ^ h) in M.elements)


def double(N: Matroid) -> Matroid:
    """Union of N with its translate by a new independent direction."""
    v = 1 << N.rank
    return Matroid(N.rank + 1, N.elements | frozenset(x ^ v for x in N.elements))


def iterated_double(N: Matroid, k: int) -> Matroid:
    if k < 0:
        raise ParameterError("doubling count must be nonnegative")
    for _ in range(k):
        N = double(N)
    return N


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def format_matroid(M: Matroid) -> str:
    lines = [f"rank {M.rank}"]
    lines += [format(e, f"0{M.rank}b") for e in M.sorted_elements]
    return "\n".join(lines) + "\n"


def parse_matroid(text: str) -> Matroid:
    rank: Optional[int] = None
    elements: list[int] = []
    seen: set[int] = set()
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        last_line = lineno
        if rank is None:
            m = re.match(r"^rank\s+(\d+)$", line)
            if not m:
                raise MatroidParseError(
                    MatroidParseError.SYNTAX, lineno, f"expected 'rank <r>', got {line!r}"
                )
            rank = int(m.group(1))
            if rank < 1:
                raise MatroidParseError(MatroidParseError.SYNTAX, lineno, "rank must be >= 1")
            continue
        if not re.fullmatch(r"[01]+", line) or len(line) != rank:
            raise MatroidParseError(
                MatroidParseError.SYNTAX,
                lineno,
                f"expected {rank}-character binary string, got {line!r}",
            )
        value = int(line, 2)
        if value == 0:
            raise MatroidParseError(MatroidParseError.ZERO_VECTOR, lineno, "zero vector")
        if value in seen:
            raise MatroidParseError(MatroidParseError.DUPLICATE, lineno, f"duplicate element {line}")
        seen.add(value)
        elements.append(value)
    if rank is None:
        raise MatroidParseError(MatroidParseError.SYNTAX, 1, "missing 'rank <r>' header")
    if rank_of_masks(elements) != rank:
        raise MatroidParseError(
            MatroidParseError.RANK_DEFICIENT,
            last_line,
            f"elements span rank {rank_of_masks(elements)} < declared {rank}",
        )
    return Matroid(rank, frozenset(elements))

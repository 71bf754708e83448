"""Nonclassical polynomials F_2^n -> T in monomial form, plus table machinery.

A monomial-form polynomial is a set of terms (S, k) with S a nonempty subset
of the variables and k >= 0; the term contributes 1/2^{k+1} whenever S is
contained in the support of x.  Term degree is |S| + k; shift is fixed to 0,
so P(0) = 0 always.  Derived polynomials (derivatives, combinations) are kept
as dense value tables rather than symbolic forms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import ContractError, ParameterError, ensure_budget
from .gf2 import GF2Subspace, max_subspace_avoiding
from .torus import DyadicTorus

Term = tuple[int, int]  # (variable-subset bitmask, depth k)


@dataclass(frozen=True)
class NonclassicalPoly:
    """Monomial-form polynomial: coefficient 1 on each listed (S, k) term."""

    n: int
    terms: frozenset[Term]

    def __post_init__(self) -> None:
        for mask, k in self.terms:
            if mask == 0:
                raise ContractError("terms must have nonempty variable support")
            if mask >= (1 << self.n):
                raise ContractError(f"term mask {mask} outside {self.n} variables")
            if k < 0:
                raise ContractError("term depth must be nonnegative")

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Term]) -> "NonclassicalPoly":
        return cls(n, frozenset(terms))

    @classmethod
    def zero(cls, n: int) -> "NonclassicalPoly":
        return cls(n, frozenset())

    @classmethod
    def linear(cls, n: int, xi: int) -> "NonclassicalPoly":
        """Classical linear polynomial <xi, x> / 2."""
        return cls(n, frozenset(((1 << i), 0) for i in range(n) if (xi >> i) & 1))

    @property
    def degree(self) -> int:
        return max((mask.bit_count() + k for mask, k in self.terms), default=0)

    @property
    def depth(self) -> int:
        return max((k for _, k in self.terms), default=0)

    def eval(self, x: int) -> DyadicTorus:
        prec = self.depth + 1
        num = 0
        for mask, k in self.terms:
            if mask & x == mask:
                num += 1 << (prec - k - 1)
        return DyadicTorus(num, prec)

    def table(self) -> "PolyTable":
        prec = self.depth + 1
        xs = np.arange(1 << self.n, dtype=np.int64)
        nums = np.zeros(1 << self.n, dtype=np.int64)
        for mask, k in self.terms:
            nums += np.where((xs & mask) == mask, 1 << (prec - k - 1), 0)
        return PolyTable(nums % (1 << prec), prec, self.n)


@dataclass(frozen=True)
class PolyTable:
    """Dense polynomial values num[x] / 2^prec over F_2^n."""

    nums: np.ndarray
    prec: int
    n: int
    declared_degree: Optional[int] = field(default=None, compare=False)
    declared_depth: Optional[int] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.prec < 1:
            raise ContractError("precision must be positive")
        if self.nums.shape != (1 << self.n,):
            raise ContractError(
                f"table has {self.nums.shape} entries, expected 2^{self.n}"
            )
        if np.any(self.nums < 0) or np.any(self.nums >= (1 << self.prec)):
            raise ContractError("numerators out of range for declared precision")
        if self.nums[0] != 0:
            raise ContractError("shift-0 polynomials must vanish at 0")

    def value(self, x: int) -> DyadicTorus:
        return DyadicTorus(int(self.nums[x]), self.prec)

    def values(self) -> list[DyadicTorus]:
        return [DyadicTorus(int(v), self.prec) for v in self.nums]

    def measured_depth(self) -> int:
        """Smallest k with every value in U_{k+1}."""
        nz = self.nums[self.nums != 0]
        if nz.size == 0:
            return 0
        low = min(int(v & -v).bit_length() - 1 for v in map(int, nz))
        return max(self.prec - low - 1, 0)

    def as_float(self) -> np.ndarray:
        return self.nums / float(1 << self.prec)

    def phase(self) -> np.ndarray:
        """e(P) table: exp(2 pi i P(x)), exact roots of unity per entry."""
        roots = np.exp(2j * np.pi * np.arange(1 << self.prec) / (1 << self.prec))
        return roots[self.nums]

    def key(self) -> bytes:
        reduced = _canonical_pair(self.nums, self.prec)
        return reduced[0].tobytes() + bytes([reduced[1]])


def _canonical_pair(nums: np.ndarray, prec: int) -> tuple[np.ndarray, int]:
    while prec > 1 and not np.any(nums & 1):
        nums = nums >> 1
        prec -= 1
    return nums, prec


def table_of(P: NonclassicalPoly | PolyTable) -> PolyTable:
    return P.table() if isinstance(P, NonclassicalPoly) else P


# ---------------------------------------------------------------------------
# Degree verification via vanishing of iterated differences
# ---------------------------------------------------------------------------

_XS_CACHE: dict[int, np.ndarray] = {}


def _xs(n: int) -> np.ndarray:
    if n not in _XS_CACHE:
        _XS_CACHE[n] = np.arange(1 << n, dtype=np.int64)
    return _XS_CACHE[n]


def _diff(nums: np.ndarray, prec: int, h: int, n: int) -> np.ndarray:
    """Numerators of P(x+h) - P(x) mod 1."""
    return (nums[_xs(n) ^ h] - nums) % (1 << prec)


def verify_degree(
    P: NonclassicalPoly | PolyTable,
    d: int,
    mode: str = "exhaustive",
    samples: int = 0,
    seed: int = 0,
    budget: Optional[int] = None,
) -> bool:
    """True iff every (d+1)-fold alternating difference of P vanishes (deg <= d)."""
    if d < 0:
        raise ParameterError("degree bound must be nonnegative")
    T = table_of(P)
    if mode == "sampled":
        return _verify_degree_sampled(T, d, samples, seed)
    if mode != "exhaustive":
        raise ParameterError(f"unknown mode {mode!r}")
    ensure_budget(1 << (T.n * (d + 2)), budget, "exhaustive degree check")
    memo: dict[tuple[bytes, int], bool] = {}

    def vanishes(nums: np.ndarray, prec: int, dd: int) -> bool:
        nums, prec = _canonical_pair(nums, prec)
        if not np.any(nums):
            return True
        if dd == 0:
            # difference tables may be nonzero constants; degree <= 0 means constant
            return bool(np.all(nums == nums[0]))
        key = (nums.tobytes() + bytes([prec]), dd)
        if key in memo:
            return memo[key]
        out = all(
            vanishes(_diff(nums, prec, h, T.n), prec, dd - 1)
            for h in range(1, 1 << T.n)
        )
        memo[key] = out
        return out

    return vanishes(T.nums, T.prec, d)


def _verify_degree_sampled(T: PolyTable, d: int, samples: int, seed: int) -> bool:
    if samples <= 0:
        raise ParameterError("sampled mode needs a positive sample count")
    rng = np.random.default_rng(seed)
    modulus = 1 << T.prec
    for _ in range(samples):
        x = int(rng.integers(0, 1 << T.n))
        hs = [int(rng.integers(0, 1 << T.n)) for _ in range(d + 1)]
        acc = 0
        for pattern in range(1 << (d + 1)):
            y = x
            for j in range(d + 1):
                if (pattern >> j) & 1:
                    y ^= hs[j]
            sign = -1 if pattern.bit_count() & 1 else 1
            acc += sign * int(T.nums[y])
        if acc % modulus:
            return False
    return True


def measured_degree(P: NonclassicalPoly | PolyTable, budget: Optional[int] = None) -> int:
    """Smallest d with all (d+1)-fold differences vanishing."""
    T = table_of(P)
    cap = T.n + T.prec
    for d in range(cap + 1):
        if verify_degree(T, d, budget=budget):
            return d
    raise AssertionError(f"degree exceeds structural cap {cap}")


# ---------------------------------------------------------------------------
# Additive derivative
# ---------------------------------------------------------------------------


def derivative(P: NonclassicalPoly | PolyTable, h: int, budget: Optional[int] = None) -> PolyTable:
    """Table of P(x+h) - P(x) - P(h), with measured degree and depth."""
    T = table_of(P)
    if not 0 <= h < (1 << T.n):
        raise ContractError(f"direction {h} outside F_2^{T.n}")
    modulus = 1 << T.prec
    nums = (T.nums[_xs(T.n) ^ h] - T.nums - int(T.nums[h])) % modulus
    nums, prec = _canonical_pair(nums, T.prec)
    out = PolyTable(nums, prec, T.n)
    deg = measured_degree(out, budget=budget)
    return PolyTable(nums, prec, T.n, declared_degree=deg, declared_depth=out.measured_depth())


# ---------------------------------------------------------------------------
# Shift-subgroup refinement
# ---------------------------------------------------------------------------


def _value_group_exponent(T: PolyTable) -> Optional[int]:
    """If the attained value set is exactly U_j for some j, return j, else None."""
    nums, prec = _canonical_pair(T.nums, T.prec)
    attained = {int(v) for v in nums}
    if attained == {0}:
        return 0
    return prec if attained == set(range(1 << prec)) else None


def shift_subgroup_refine(
    P: NonclassicalPoly | PolyTable,
    W: GF2Subspace,
    budget: Optional[int] = None,
) -> GF2Subspace:
    """Subspace W' <= W (codim <= depth+1) on which P(h) lies in the value
    group of the derivative in direction h.

    Requires each derivative's attained values to form a subgroup of the
    torus; a direction violating that raises a contract error naming it.
    """
    T = table_of(P)
    if W.ambient_dim != T.n:
        raise ContractError("subspace and polynomial live in different spaces")
    k = T.measured_depth()
    good: set[int] = set()
    for h in sorted(W.elements()):
        D = derivative_table_raw(T, h)
        j = _value_group_exponent(D)
        if j is None:
            raise ContractError(
                f"derivative in direction {h} does not attain a full value subgroup"
            )
        in_group = T.value(h).num == 0 if j == 0 else T.value(h).in_subgroup(j - 1)
        if in_group:
            good.add(h)
    bad = {h for h in W.elements() if h != 0 and h not in good}
    refined = max_subspace_avoiding(bad, T.n, within=W)
    codim = W.dim - refined.dim
    if codim > k + 1:
        raise AssertionError(
            f"refinement codimension {codim} exceeds depth bound {k + 1}"
        )
    return refined


def derivative_table_raw(T: PolyTable, h: int) -> PolyTable:
    """Derivative table without the measured-degree pass (cheap scan path)."""
    modulus = 1 << T.prec
    nums = (T.nums[_xs(T.n) ^ h] - T.nums - int(T.nums[h])) % modulus
    nums, prec = _canonical_pair(nums, T.prec)
    return PolyTable(nums, prec, T.n)


# ---------------------------------------------------------------------------
# Catalogs
# ---------------------------------------------------------------------------


def possible_terms(n: int, max_degree: int, max_depth: int) -> list[Term]:
    out = []
    for k in range(max_depth + 1):
        for bits in range(1, 1 << n):
            if bits.bit_count() + k <= max_degree:
                out.append((bits, k))
    return sorted(out)


def polynomial_catalog(
    n: int, max_degree: int = 3, max_depth: int = 1, budget: Optional[int] = None
) -> Iterator[NonclassicalPoly]:
    """All monomial-form polynomials on n variables within the given bounds."""
    terms = possible_terms(n, max_degree, max_depth)
    ensure_budget((1 << len(terms)) * (1 << n), budget, "polynomial catalog")
    for r in range(len(terms) + 1):
        for combo in itertools.combinations(terms, r):
            yield NonclassicalPoly.from_terms(n, combo)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------


def format_poly(P: NonclassicalPoly) -> str:
    lines = [f"vars {P.n}"]
    for mask, k in sorted(P.terms, key=lambda t: (t[1], t[0])):
        vs = ",".join(str(i + 1) for i in range(P.n) if (mask >> i) & 1)
        lines.append(f"term {vs} depth {k}")
    return "\n".join(lines) + "\n"


def parse_poly(text: str) -> NonclassicalPoly:
    n: Optional[int] = None
    terms: list[Term] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            m = re.match(r"^vars\s+(\d+)$", line)
            if not m:
                raise ContractError(f"line {lineno}: expected 'vars <n>', got {line!r}")
            n = int(m.group(1))
            continue
        m = re.match(r"^term\s+([0-9,]+)\s+depth\s+(\d+)$", line)
        if not m:
            raise ContractError(f"line {lineno}: bad term line {line!r}")
        mask = 0
        for v in m.group(1).split(","):
            i = int(v)
            if not 1 <= i <= n:
                raise ContractError(f"line {lineno}: variable {i} out of range")
            mask |= 1 << (i - 1)
        terms.append((mask, int(m.group(2))))
    if n is None:
        raise ContractError("missing 'vars <n>' header")
    return NonclassicalPoly.from_terms(n, terms)


def format_poly_table(T: PolyTable) -> str:
    return "\n".join(f"{int(v)}/{T.prec}" for v in T.nums) + "\n"


def parse_poly_table(text: str) -> PolyTable:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^(\d+)/(\d+)$", line)
        if not m:
            raise ContractError(f"line {lineno}: expected 'num/prec', got {line!r}")
        pairs.append((int(m.group(1)), int(m.group(2))))
    if not pairs:
        raise ContractError("empty polynomial table")
    size = len(pairs)
    if size & (size - 1):
        raise ContractError(f"table length {size} is not a power of two")
    prec = max(p for _, p in pairs)
    nums = np.array([num << (prec - p) for num, p in pairs], dtype=np.int64)
    return PolyTable(nums % (1 << prec), prec, size.bit_length() - 1)

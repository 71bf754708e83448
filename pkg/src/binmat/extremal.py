"""Greedy extended Bose-Burton selection, witnesses, exhaustive extremal
numbers, and the threshold demonstration pipeline.

All inequality bookkeeping in this module is exact: set sizes stay integers
and the certificate compares Fractions, never floats.  The greedy step's
averaging argument guarantees feasibility for every input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ContractError, ParameterError, ensure_budget
from .gf2 import GF2Vector, rank_of_masks
from .matroid import (
    LinearInjection,
    Matroid,
    contains_copy,
    n_geometry,
    pg,
    shifted_intersection,
)
from .regularity import Decomposition, decompose_linear, reduced_matroid

# ---------------------------------------------------------------------------
# Dyadic groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicGroup:
    """Direct sum of cyclic 2-groups; coordinate i has modulus 2^{k_i+1}."""

    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        for m in self.moduli:
            if m < 2 or m & (m - 1):
                raise ParameterError(f"modulus {m} is not a power of two >= 2")

    @property
    def size(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    def index_of(self, element: Sequence[int]) -> int:
        idx = 0
        stride = 1
        for digit, m in zip(element, self.moduli):
            idx += (digit % m) * stride
            stride *= m
        return idx

    def element_of(self, index: int) -> tuple[int, ...]:
        out = []
        for m in self.moduli:
            out.append(index % m)
            index //= m
        return tuple(out)

    def digit_matrix(self) -> np.ndarray:
        """(size, n) array of digit vectors in index order."""
        cols = []
        stride = 1
        for m in self.moduli:
            cols.append((np.arange(self.size) // stride) % m)
            stride *= m
        return np.stack(cols, axis=1).astype(np.int64)


@dataclass(frozen=True)
class CoordinateSubgroup:
    """Per-coordinate cyclic subgroup orders, each dividing its modulus."""

    orders: tuple[int, ...]

    def validate(self, G: DyadicGroup) -> None:
        if len(self.orders) != len(G.moduli):
            raise ParameterError("subgroup orders must match group coordinates")
        for o, m in zip(self.orders, G.moduli):
            if o < 1 or o & (o - 1) or m % o:
                raise ParameterError(f"order {o} does not divide modulus {m}")

    @property
    def size(self) -> int:
        out = 1
        for o in self.orders:
            out *= o
        return out


@dataclass(frozen=True)
class StarCertificate:
    step: int
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs

    def to_json(self) -> dict:
        return {
            "i": self.step,
            "lhs": f"{self.lhs.numerator}/{self.lhs.denominator}",
            "rhs": f"{self.rhs.numerator}/{self.rhs.denominator}",
            "star_holds": self.holds,
        }


def extbb_greedy(
    G: DyadicGroup,
    H: CoordinateSubgroup,
    sets: Sequence[Iterable[Sequence[int]]],
) -> tuple[list[tuple[int, ...]], list[StarCertificate]]:
    """Pick cosets H_1..H_c of H greedily so the averaged intersection
    inequality holds at every step, and return exact certificates.

    `sets` lists M_1..M_{2^c-1} as collections of digit tuples.  Step i
    maximizes the left side over candidate cosets (ties to the smallest
    canonical representative), which beats the right side because the right
    side is exactly the average over cosets.
    """
    H.validate(G)
    count = len(sets)
    c = (count + 1).bit_length() - 1
    if count != (1 << c) - 1 or c < 1:
        raise ParameterError(f"need 2^c - 1 sets for some c >= 1, got {count}")
    n = len(G.moduli)
    strides_sub = []  # coset-space radix per coordinate: m_i / o_i
    stride = 1
    for m, o in zip(G.moduli, H.orders):
        strides_sub.append(m // o)
        stride *= m

    digits = G.digit_matrix()  # (|G|, n)
    sub_radix = np.array(strides_sub, dtype=np.int64)
    coset_stride = np.cumprod(np.concatenate([[1], sub_radix[:-1]])).astype(np.int64)
    coset_index_all = ((digits % sub_radix) * coset_stride).sum(axis=1)
    num_cosets = int(np.prod(sub_radix))

    indicators = []
    for j, s in enumerate(sets, start=1):
        ind = np.zeros(G.size, dtype=bool)
        for el in s:
            if len(el) != n:
                raise ContractError(f"set {j} element {el} has wrong arity")
            ind[G.index_of(el)] = True
        indicators.append(ind)
    set_sizes = [int(ind.sum()) for ind in indicators]
    coset_counts = [
        np.bincount(coset_index_all[ind], minlength=num_cosets).astype(np.int64)
        for ind in indicators
    ]

    # canonical coset representatives; itertools.product emits them in
    # lexicographic tuple order, so argmax ties resolve to the smallest rep
    reps_digits = np.array(
        list(itertools.product(*(range(int(r)) for r in sub_radix))), dtype=np.int64
    ).reshape(num_cosets, n)

    chosen: list[tuple[int, ...]] = []
    certificates: list[StarCertificate] = []
    moduli = np.array(G.moduli, dtype=np.int64)
    for i in range(1, c + 1):
        lhs_counts = np.zeros(num_cosets, dtype=np.int64)
        rhs_total = 0
        for x_bits in range(1 << (i - 1)):
            offset = np.zeros(n, dtype=np.int64)
            for j in range(i - 1):
                if (x_bits >> j) & 1:
                    offset = (offset + np.array(chosen[j], dtype=np.int64)) % moduli
            set_idx = (1 << (i - 1)) + x_bits - 1  # 0-based position of M_{2^{i-1}+sum}
            shifted = (reps_digits + offset) % moduli
            coset_of = ((shifted % sub_radix) * coset_stride).sum(axis=1)
            lhs_counts += coset_counts[set_idx][coset_of]
            rhs_total += set_sizes[set_idx]
        best = int(np.argmax(lhs_counts))
        chosen.append(tuple(int(v) for v in reps_digits[best]))
        lhs = Fraction(int(lhs_counts[best]), H.size)
        rhs = Fraction(rhs_total, G.size)
        cert = StarCertificate(step=i, lhs=lhs, rhs=rhs)
        if not cert.holds:
            raise AssertionError(f"greedy step {i} lost to the average: {lhs} < {rhs}")
        certificates.append(cert)
    return chosen, certificates


# ---------------------------------------------------------------------------
# Bose-Burton witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoseBurtonResult:
    witness: Optional[LinearInjection]
    bound: int
    size: int
    reason: Optional[str]

    @property
    def refused(self) -> bool:
        return self.witness is None


def bose_burton_witness(M: Matroid, c: int) -> BoseBurtonResult:
    """Independent points h_1..h_c with every nonzero combination inside M.

    Needs |M| > 2^r - 2^{r-c+1}; the greedy certificate then forces each
    integer left side to its maximum 2^{i-1}, which makes every combination
    land in M and the points independent.
    """
    r = M.rank
    if not 1 <= c <= r:
        raise ParameterError(f"need 1 <= c <= rank, got c={c}, rank={r}")
    bound = (1 << r) - (1 << (r - c + 1))
    if len(M) <= bound:
        return BoseBurtonResult(
            witness=None,
            bound=bound,
            size=len(M),
            reason=f"|M| = {len(M)} does not exceed 2^r - 2^(r-c+1) = {bound}",
        )
    G = DyadicGroup((2,) * r)
    H = CoordinateSubgroup((1,) * r)
    as_tuples = [tuple((e >> i) & 1 for i in range(r)) for e in M.sorted_elements]
    chosen, certs = extbb_greedy(G, H, [as_tuples] * ((1 << c) - 1))
    points = [sum(d << i for i, d in enumerate(t)) for t in chosen]
    for i, cert in enumerate(certs, start=1):
        if cert.lhs != Fraction(1 << (i - 1)):
            raise AssertionError(
                f"forcing argument failed at step {i}: LHS {cert.lhs} != {1 << (i - 1)}"
            )
    for combo in range(1, 1 << c):
        img = 0
        for i in range(c):
            if (combo >> i) & 1:
                img ^= points[i]
        if img not in M.elements:
            raise AssertionError("witness combination escaped M")
    if rank_of_masks(points) != c:
        raise AssertionError("witness points are dependent")
    witness = LinearInjection(tuple(GF2Vector(p, r) for p in points))
    return BoseBurtonResult(witness=witness, bound=bound, size=len(M), reason=None)


def pg_copy_from_dense_set(points: frozenset[int], n: int, c: int) -> Optional[list[int]]:
    """Greedy extraction of a projective-geometry copy from a raw point set.

    Works on arbitrary subsets of F_2^n (no matroid axioms needed); returns
    None when the density precondition fails.
    """
    bound = (1 << n) - (1 << (n - c + 1))
    if len(points) <= bound:
        return None
    G = DyadicGroup((2,) * n)
    H = CoordinateSubgroup((1,) * n)
    as_tuples = [tuple((e >> i) & 1 for i in range(n)) for e in sorted(points)]
    chosen, _ = extbb_greedy(G, H, [as_tuples] * ((1 << c) - 1))
    out = [sum(d << i for i, d in enumerate(t)) for t in chosen]
    for combo in range(1, 1 << c):
        img = 0
        for i in range(c):
            if (combo >> i) & 1:
                img ^= out[i]
        if img not in points:
            return None
    if rank_of_masks(out) != c:
        return None
    return out


# ---------------------------------------------------------------------------
# Exhaustive extremal numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremalResult:
    value: int
    witness: Optional[Matroid]
    exact: bool


def _coordinate_canonical_masks(n: int) -> np.ndarray:
    """Masks over F_2^n \\ 0 that are minimal under coordinate permutations."""
    num_points = (1 << n) - 1
    masks = np.arange(1 << num_points, dtype=np.int64)
    canonical = masks.copy()
    for perm in itertools.permutations(range(n)):
        point_map = np.zeros(num_points + 1, dtype=np.int64)
        for p in range(1, num_points + 1):
            q = 0
            for i in range(n):
                if (p >> i) & 1:
                    q |= 1 << perm[i]
            point_map[p] = q
        permuted = np.zeros_like(masks)
        for p in range(1, num_points + 1):
            bit = (masks >> (p - 1)) & 1
            permuted |= bit << (int(point_map[p]) - 1)
        canonical = np.minimum(canonical, permuted)
    return masks[canonical == masks]


def exhaustive_extremal(
    n: int,
    N: Matroid,
    mode: str = "exact",
    trials: int = 0,
    seed: int = 0,
    budget: Optional[int] = None,
) -> ExtremalResult:
    """Largest N-free full-rank matroid of rank n (exact for n <= 4).

    When no full-rank N-free matroid exists (every nonzero point forms a copy
    of N), the value is 0 with no witness.  Random mode reports the best
    matroid found by seeded greedy passes, a lower estimate.
    """
    if mode == "exact":
        ensure_budget(1 << ((1 << n) - 1), budget, "exact extremal enumeration")
        if n > 4:
            raise ParameterError("exact mode is limited to n <= 4")
        candidates = _coordinate_canonical_masks(n)
        popcounts = np.array([int(m).bit_count() for m in candidates])
        for size in range(int(popcounts.max()), 0, -1):
            for mask in candidates[popcounts == size]:
                elements = [p + 1 for p in range((1 << n) - 1) if (int(mask) >> p) & 1]
                if rank_of_masks(elements) != n:
                    continue
                M = Matroid(n, frozenset(elements))
                if contains_copy(M, N, budget=budget) is None:
                    return ExtremalResult(value=size, witness=M, exact=True)
        return ExtremalResult(value=0, witness=None, exact=True)
    if mode != "random":
        raise ParameterError(f"unknown mode {mode!r}")
    if trials < 1:
        raise ParameterError("random mode needs trials >= 1")
    rng = np.random.default_rng(seed)
    best_value, best_witness = 0, None
    points = list(range(1, 1 << n))
    for _ in range(trials):
        order = rng.permutation(points)
        chosen: set[int] = set()
        for p in order:
            p = int(p)
            chosen.add(p)
            trial_rank = rank_of_masks(chosen)
            if trial_rank >= N.rank:
                candidate = Matroid.from_elements(chosen, rank=trial_rank)
                if contains_copy(candidate, N, budget=budget) is not None:
                    chosen.remove(p)
        if rank_of_masks(chosen) == n and len(chosen) > best_value:
            M = Matroid(n, frozenset(chosen))
            best_value, best_witness = len(chosen), M
    return ExtremalResult(value=best_value, witness=best_witness, exact=False)


# ---------------------------------------------------------------------------
# Threshold demonstration for N(ell, 2, 1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    case: str
    outcome: str  # "copy" | "critical_certificate" | "not_found"
    witness: Optional[LinearInjection]
    chi_bound: Optional[int]
    certificate_basis: Optional[tuple[int, ...]]
    complexity: int
    sizes: dict
    triangle_count: Optional[int]
    busiest_h: Optional[int]
    r_lower_bound: Optional[float]
    r_triangle: Optional[tuple[int, ...]] = None

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "outcome": self.outcome,
            "witness": [v.bits for v in self.witness.images] if self.witness else None,
            "chi_bound": self.chi_bound,
            "certificate_basis": list(self.certificate_basis)
            if self.certificate_basis
            else None,
            "complexity": self.complexity,
            "sizes": self.sizes,
            "triangle_count": self.triangle_count,
            "busiest_h": self.busiest_h,
            "r_lower_bound": self.r_lower_bound,
            "r_triangle": list(self.r_triangle) if self.r_triangle else None,
        }


def _affine_copy_with_shift(
    points: frozenset[int], n: int, h: int, dim: int
) -> Optional[tuple[int, list[int]]]:
    """Base point a and a dim-dimensional direction space V with a + V inside
    `points`, V avoiding {h, a + h}.  Then (a+V) | (a+V+h) | {h} assembles the
    target copy.
    """
    from .gf2 import max_subspace_avoiding

    for a in sorted(points):
        allowed = {v for v in range(1, 1 << n) if (a ^ v) in points}
        bad = set(range(1, 1 << n)) - allowed
        bad.add(h)
        bad.add(a ^ h)
        bad.discard(0)
        if len(allowed) + 1 < (1 << dim):
            continue
        sub = max_subspace_avoiding(bad, n, target_dim=dim)
        if sub.dim >= dim:
            return a, [v.bits for v in sub.basis[:dim]]
    return None


def _assemble_witness(M: Matroid, h: int, a: int, vs: list[int], ell: int) -> LinearInjection:
    images = [GF2Vector(h, M.rank)]
    images += [GF2Vector(v, M.rank) for v in vs]
    images.append(GF2Vector(a, M.rank))
    injection = LinearInjection(tuple(images))
    target = n_geometry(ell, 2, 1)
    if not injection.maps_into(target, M.elements):
        raise AssertionError("assembled witness escapes M")
    return injection


def threshold_demo_n21(
    M: Matroid,
    delta: float,
    ell: int,
    eta_prime: Optional[float] = None,
    epsilon: float = 0.1,
    max_h_trials: int = 32,
    budget: Optional[int] = None,
) -> ThresholdReport:
    """Find a copy of N(ell, 2, 1) in a dense matroid, or certify small
    critical number via the decomposition's zero atom.

    Case 1 (some atom is (1/2 + zeta)-dense): shift by an element of M in the
    zero atom and search the shifted intersection for an affine copy.  Case 2:
    the reduced set has density above 1/2, so a triangle extraction plus the
    busiest shift produces the copy.
    """
    r = M.rank
    if ell < 2:
        raise ParameterError("ell must be at least 2")
    if r < ell:
        raise ParameterError(f"rank {r} too small for ell = {ell}")
    if len(M) < (0.25 + delta) * (1 << r):
        raise ParameterError(
            f"|M| = {len(M)} below the (1/4 + delta) 2^r = {(0.25 + delta) * (1 << r):.1f} threshold"
        )
    zeta = delta / 2.0
    if eta_prime is None:
        eta_prime = max(zeta / 2.0, 0.05)
    f = M.indicator()
    D = decompose_linear(f, eta_prime, budget=budget)
    C = D.factor.complexity
    R = reduced_matroid(M, D, epsilon, zeta)
    dense = reduced_matroid(M, D, epsilon, 0.5 + zeta)
    sizes = {
        "M": len(M),
        "R": R.size(),
        "D": dense.size(),
        "n": r,
    }

    def finish_with_h(h: int, case: str, extra: dict) -> Optional[ThresholdReport]:
        mh = shifted_intersection(M, h)
        found = _affine_copy_with_shift(mh, r, h, ell - 2)
        if found is None:
            return None
        a, vs = found
        witness = _assemble_witness(M, h, a, vs, ell)
        return ThresholdReport(
            case=case,
            outcome="copy",
            witness=witness,
            chi_bound=None,
            certificate_basis=None,
            complexity=C,
            sizes=sizes,
            triangle_count=extra.get("triangle_count"),
            busiest_h=extra.get("busiest_h"),
            r_lower_bound=extra.get("r_lower_bound"),
            r_triangle=extra.get("r_triangle"),
        )

    if dense.size() > 0:
        zero_atom = D.factor.atom_of(0).index
        atom_mask = D.factor.atom_table == zero_atom
        in_zero_atom = [p for p in M.sorted_elements if atom_mask[p]]
        if not in_zero_atom:
            basis = tuple(
                v.bits
                for v in _zero_atom_subspace(D).basis
            )
            return ThresholdReport(
                case="case1",
                outcome="critical_certificate",
                witness=None,
                chi_bound=C,
                certificate_basis=basis,
                complexity=C,
                sizes=sizes,
                triangle_count=None,
                busiest_h=None,
                r_lower_bound=None,
            )
        for h in in_zero_atom[:max_h_trials]:
            report = finish_with_h(h, "case1", {})
            if report is not None:
                return report
        return ThresholdReport(
            case="case1",
            outcome="not_found",
            witness=None,
            chi_bound=None,
            certificate_basis=None,
            complexity=C,
            sizes=sizes,
            triangle_count=None,
            busiest_h=None,
            r_lower_bound=None,
        )

    # Case 2: every atom is either error-heavy or below (1/2 + zeta)-dense
    r_bound = (0.5 + 2 * (delta - 2 * zeta)) * (1 << r)
    triangle_from_r = pg_copy_from_dense_set(R.points, r, 2)
    ind = M.indicator().astype(bool)
    xs = np.arange(1 << r, dtype=np.int64)
    per_h = {}
    total_triangles = 0
    for h in M.sorted_elements:
        mh_size = int(np.count_nonzero(ind & ind[xs ^ h]))
        per_h[h] = mh_size // 2
        total_triangles += mh_size // 2
    total_triangles //= 3
    busy_order = sorted(per_h, key=lambda h: (-per_h[h], h))
    extra = {
        "triangle_count": total_triangles,
        "r_lower_bound": r_bound,
        "r_triangle": tuple(triangle_from_r) if triangle_from_r else None,
    }
    for h in busy_order[:max_h_trials]:
        if per_h[h] == 0:
            break
        extra["busiest_h"] = h
        report = finish_with_h(h, "case2", extra)
        if report is not None:
            return report
    return ThresholdReport(
        case="case2",
        outcome="not_found",
        witness=None,
        chi_bound=None,
        certificate_basis=None,
        complexity=C,
        sizes=sizes,
        triangle_count=total_triangles,
        busiest_h=None,
        r_lower_bound=r_bound,
        r_triangle=tuple(triangle_from_r) if triangle_from_r else None,
    )


def _zero_atom_subspace(D: Decomposition):
    """The zero atom of a linear factor is the joint kernel subspace."""
    from .gf2 import GF2Subspace

    zero_atom = D.factor.atom_of(0).index
    members = [int(p) for p in np.flatnonzero(D.factor.atom_table == zero_atom) if p]
    return GF2Subspace.from_spanning(members, D.n)

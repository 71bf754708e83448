"""Polynomial factors: atoms, order, uniformity, shifted extension, and the
consistency-group machinery behind near-equidistribution checks.

Factor rank is never computed; measured epsilon-uniformity (the largest
Gowers norm over nonzero integer combinations of the defining polynomials)
stands in for it everywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ContractError, ensure_budget
from .forms import LinearFormSystem, _form_grid, _var_axes
from .gowers import gowers_norm
from .polynomial import (
    NonclassicalPoly,
    PolyTable,
    derivative,
    possible_terms,
    table_of,
)
from .torus import DyadicTorus


@dataclass(frozen=True)
class AtomIndex:
    """Mixed-radix atom label; digit i is the value of polynomial i."""

    index: int
    radices: tuple[int, ...]

    def digits(self) -> tuple[int, ...]:
        out = []
        v = self.index
        for r in self.radices:
            out.append(v % r)
            v //= r
        return tuple(out)

    def values(self) -> tuple[DyadicTorus, ...]:
        return tuple(
            DyadicTorus(d, r.bit_length() - 1)
            for d, r in zip(self.digits(), self.radices)
        )


class PolynomialFactor:
    """Ordered list of polynomials partitioning F_2^n by joint level sets."""

    def __init__(self, polys: Sequence[NonclassicalPoly | PolyTable], n: Optional[int] = None):
        tables = [table_of(P) for P in polys]
        if n is None:
            if not tables:
                raise ContractError("empty factor needs an explicit dimension")
            n = tables[0].n
        if any(T.n != n for T in tables):
            raise ContractError("factor polynomials live in different spaces")
        self.n = n
        self.tables: tuple[PolyTable, ...] = tuple(tables)
        self.sources: tuple[Optional[NonclassicalPoly], ...] = tuple(
            P if isinstance(P, NonclassicalPoly) else None for P in polys
        )
        self.depths = tuple(T.measured_depth() for T in tables)

    @property
    def complexity(self) -> int:
        return len(self.tables)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        from .polynomial import measured_degree

        return tuple(measured_degree(T) for T in self.tables)

    @property
    def degree(self) -> int:
        return max(self.degrees, default=0)

    @property
    def order(self) -> int:
        out = 1
        for k in self.depths:
            out *= 1 << (k + 1)
        return out

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(1 << (k + 1) for k in self.depths)

    @cached_property
    def atom_table(self) -> np.ndarray:
        """Atom index of every point of F_2^n."""
        idx = np.zeros(1 << self.n, dtype=np.int64)
        stride = 1
        for T, k in zip(self.tables, self.depths):
            digits = T.nums >> (T.prec - (k + 1))
            idx += stride * digits
            stride *= 1 << (k + 1)
        return idx

    def atom_of(self, x: int) -> AtomIndex:
        return AtomIndex(int(self.atom_table[x]), self.radices)

    def atom_histogram(self) -> np.ndarray:
        return np.bincount(self.atom_table, minlength=self.order)

    def atom_size_deviation(self) -> float:
        """max over atoms of |Pr[atom] - 1 / order|."""
        probs = self.atom_histogram() / (1 << self.n)
        return float(np.max(np.abs(probs - 1.0 / self.order)))

    def combination_table(self, lambdas: Sequence[int]) -> PolyTable:
        """sum_i lambda_i P_i as a table."""
        prec = max((T.prec for T in self.tables), default=1)
        nums = np.zeros(1 << self.n, dtype=np.int64)
        for lam, T in zip(lambdas, self.tables):
            nums += (lam % (1 << prec)) * (T.nums << (prec - T.prec))
        return PolyTable(nums % (1 << prec), prec, self.n)

    def conditional_mean(self, f: np.ndarray) -> np.ndarray:
        """E[f | atom] as a table over F_2^n."""
        counts = np.bincount(self.atom_table, minlength=self.order)
        sums = np.bincount(self.atom_table, weights=np.asarray(f, dtype=float), minlength=self.order)
        means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
        return means[self.atom_table]


def factor_uniformity(
    B: PolynomialFactor,
    norm_order: Optional[int] = None,
    budget: Optional[int] = None,
) -> float:
    """max over nonzero residue tuples lambda of ||e(sum lambda_i P_i)||_{U^D}.

    D defaults to the factor degree (clamped to >= 1).  A factor is declared
    epsilon-uniform iff the result is below epsilon.
    """
    if B.complexity == 0:
        return 0.0
    D = norm_order if norm_order is not None else max(B.degree, 1)
    ensure_budget(B.order * (1 << B.n) * max(D, 1), budget, "factor uniformity scan")
    worst = 0.0
    for lambdas in itertools.product(*(range(r) for r in B.radices)):
        if not any(lambdas):
            continue
        combo = B.combination_table(lambdas)
        strategy = "wht_base" if D >= 2 else "direct"
        worst = max(worst, gowers_norm(combo.phase(), D, strategy=strategy, budget=budget))
    return worst


def factor_shift_extend(B: PolynomialFactor, h: int, budget: Optional[int] = None) -> PolynomialFactor:
    """Factor refined by the derivatives in direction h (2C polynomials)."""
    derived = [derivative(T, h, budget=budget) for T in B.tables]
    return PolynomialFactor(list(B.tables) + derived, n=B.n)


# ---------------------------------------------------------------------------
# Consistency groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyGroup:
    """Achievable value tuples of one polynomial across a form system.

    `elements` collects (beta_1..beta_m) numerators at precision k+1 over all
    catalog polynomials of degree <= d, depth <= k, and all evaluation points;
    `dependency_set` is the annihilator inside [0, 2^{k+1})^m.
    """

    d: int
    k: int
    num_forms: int
    elements: frozenset[tuple[int, ...]]
    generators: tuple[tuple[int, ...], ...]
    dependency_set: tuple[tuple[int, ...], ...]
    exact_degree_elements: frozenset[tuple[int, ...]]
    n0: int
    stable: bool

    @property
    def size(self) -> int:
        return len(self.elements)

    def tuples(self) -> list[tuple[DyadicTorus, ...]]:
        return [
            tuple(DyadicTorus(b, self.k + 1) for b in beta)
            for beta in sorted(self.elements)
        ]


def _phi_elements(
    system: LinearFormSystem, d: int, k: int, n0: int, budget: Optional[int]
) -> tuple[frozenset[tuple[int, ...]], frozenset[tuple[int, ...]]]:
    terms = possible_terms(n0, d, k)
    m = len(system)
    ell = system.num_vars
    points = 1 << (n0 * ell)
    ensure_budget((1 << len(terms)) * points * m, budget, "consistency enumeration")
    axes = _var_axes(n0, ell)
    full = ((1 << n0),) * ell
    grids = [
        np.broadcast_to(_form_grid(row, n0, ell, axes), full).ravel()
        for row in system.rows
    ]
    prec = k + 1
    seen: set[tuple[int, ...]] = set()
    seen_exact: set[tuple[int, ...]] = set()
    xs = np.arange(1 << n0, dtype=np.int64)
    for r in range(len(terms) + 1):
        for combo in itertools.combinations(terms, r):
            nums = np.zeros(1 << n0, dtype=np.int64)
            degree = 0
            for mask, kk in combo:
                nums += np.where((xs & mask) == mask, 1 << (prec - kk - 1), 0)
                degree = max(degree, mask.bit_count() + kk)
            nums %= 1 << prec
            stacked = np.stack([nums[g] for g in grids], axis=1)
            tuples = set(map(tuple, stacked.tolist()))
            seen |= tuples
            if degree == d:
                seen_exact |= tuples
    return frozenset(seen), frozenset(seen_exact)


def _group_generators(elements: frozenset[tuple[int, ...]], prec: int) -> tuple[tuple[int, ...], ...]:
    generators: list[tuple[int, ...]] = []
    span: set[tuple[int, ...]] = {tuple([0] * len(next(iter(elements))))}
    modulus = 1 << prec
    for beta in sorted(elements):
        if beta in span:
            continue
        generators.append(beta)
        new_span = set(span)
        for s in span:
            current = s
            for _ in range(modulus):
                current = tuple((a + b) % modulus for a, b in zip(current, beta))
                new_span.add(current)
        span = new_span
    return tuple(generators)


def _closed_under_addition(elements: frozenset[tuple[int, ...]], prec: int) -> bool:
    modulus = 1 << prec
    for a in elements:
        for b in elements:
            if tuple((x + y) % modulus for x, y in zip(a, b)) not in elements:
                return False
    return True


def consistency_group(
    system: LinearFormSystem,
    d: int,
    k: int,
    n0: Optional[int] = None,
    cross_check: bool = True,
    budget: Optional[int] = None,
) -> ConsistencyGroup:
    """Value-tuple group Phi_{d,k} of the system, with its annihilator.

    Enumerates monomial-form polynomials of degree <= d and depth <= k on n0
    variables (default ell + d) across all evaluation points; `stable` records
    whether rerunning at n0 + 1 reproduces the same set.
    """
    if d < 1 or k < 0:
        raise ContractError("need degree >= 1 and depth >= 0")
    ell = system.num_vars
    if n0 is None:
        n0 = ell + d
    elements, exact = _phi_elements(system, d, k, n0, budget)
    stable = True
    if cross_check:
        bigger, _ = _phi_elements(system, d, k, n0 + 1, budget)
        stable = bigger == elements
    prec = k + 1
    if not _closed_under_addition(elements, prec):
        raise AssertionError("enumerated consistency set is not a group")
    m = len(system)
    modulus = 1 << prec
    perp = []
    for lams in itertools.product(range(modulus), repeat=m):
        if all(
            sum(l * b for l, b in zip(lams, beta)) % modulus == 0 for beta in elements
        ):
            perp.append(lams)
    return ConsistencyGroup(
        d=d,
        k=k,
        num_forms=m,
        elements=elements,
        generators=_group_generators(elements, prec),
        dependency_set=tuple(perp),
        exact_degree_elements=exact,
        n0=n0,
        stable=stable,
    )


# ---------------------------------------------------------------------------
# Near-equidistribution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquidistributionReport:
    deviation: float
    probability: float
    target: float
    K: int
    epsilon_measured: float
    order: int
    atom_count: int
    max_atom_deviation: float
    factor_uniform: bool

    def to_json(self) -> dict:
        return {
            "deviation": self.deviation,
            "probability": self.probability,
            "target": self.target,
            "K": self.K,
            "epsilon_measured": self.epsilon_measured,
            "order": self.order,
            "atom_count": self.atom_count,
            "max_deviation": self.max_atom_deviation,
            "factor_uniform": self.factor_uniform,
        }


def equidistribution_report(
    B: PolynomialFactor,
    system: LinearFormSystem,
    assignment: Sequence[Sequence[int]],
    epsilon: Optional[float] = None,
    phi_groups: Optional[Sequence[ConsistencyGroup]] = None,
    budget: Optional[int] = None,
) -> EquidistributionReport:
    """|Pr_X[P_i(L_j(X)) = beta_{i,j} for all i, j] - 1/K|.

    `assignment` row i gives numerators of beta_{i,.} at precision depth_i + 1.
    Rows must be consistent (lie in Phi_{d_i, k_i}); K multiplies the Phi
    sizes.  The report carries the measured factor uniformity so the
    equidistribution bound can be checked against it.
    """
    m = len(system)
    C = B.complexity
    if len(assignment) != C:
        raise ContractError(f"{len(assignment)} assignment rows for {C} polynomials")
    groups = list(phi_groups) if phi_groups is not None else []
    if not groups:
        cache: dict[tuple[int, int], ConsistencyGroup] = {}
        for d_i, k_i in zip(B.degrees, B.depths):
            key = (max(d_i, 1), k_i)
            if key not in cache:
                cache[key] = consistency_group(system, *key, budget=budget)
            groups.append(cache[key])
    K = 1
    for i, group in enumerate(groups):
        row = tuple(int(b) for b in assignment[i])
        if len(row) != m:
            raise ContractError(f"assignment row {i} has {len(row)} entries for {m} forms")
        if row not in group.elements:
            raise ContractError(f"assignment row {i} = {row} is not consistent")
        K *= group.size
    n = B.n
    ell = system.num_vars
    total = 1 << (n * ell)
    ensure_budget(total * m * C, budget, "equidistribution scan")
    axes = _var_axes(n, ell)
    match = None
    for i, (T, k_i) in enumerate(zip(B.tables, B.depths)):
        digits = T.nums >> (T.prec - (k_i + 1))
        for j, row in enumerate(system.rows):
            grid = _form_grid(row, n, ell, axes)
            hit = digits[grid] == int(assignment[i][j])
            match = hit if match is None else (match & hit)
    count = int(np.broadcast_to(match, (1 << n,) * ell).sum()) if match is not None else total
    probability = Fraction(count, total)
    deviation = abs(probability - Fraction(1, K))
    uniformity = factor_uniformity(B, budget=budget)
    hist = B.atom_histogram()
    threshold = epsilon if epsilon is not None else 1.0 - 1e-9
    return EquidistributionReport(
        deviation=float(deviation),
        probability=float(probability),
        target=1.0 / K,
        K=K,
        epsilon_measured=uniformity,
        order=B.order,
        atom_count=int(np.count_nonzero(hist)),
        max_atom_deviation=B.atom_size_deviation(),
        factor_uniform=bool(uniformity < threshold),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def format_factor(B: PolynomialFactor) -> str:
    from .polynomial import format_poly, format_poly_table

    chunks = [f"factor C {B.complexity}"]
    for T, src in zip(B.tables, B.sources):
        chunks.append("poly")
        body = format_poly(src) if src is not None else format_poly_table(T)
        chunks.append(body.rstrip("\n"))
    return "\n".join(chunks) + "\n"


def parse_factor(text: str) -> PolynomialFactor:
    from .polynomial import parse_poly, parse_poly_table

    lines = [ln for ln in text.splitlines()]
    header = None
    blocks: list[list[str]] = []
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            if not line.startswith("factor C "):
                raise ContractError(f"expected 'factor C <complexity>', got {line!r}")
            header = int(line.split()[2])
            continue
        if line == "poly":
            blocks.append([])
            continue
        if not blocks:
            raise ContractError("polynomial body before any 'poly' marker")
        blocks[-1].append(line)
    if header is None:
        raise ContractError("missing factor header")
    if len(blocks) != header:
        raise ContractError(f"declared complexity {header}, found {len(blocks)} blocks")
    polys: list[NonclassicalPoly | PolyTable] = []
    for block in blocks:
        body = "\n".join(block)
        if block and block[0].startswith("vars"):
            polys.append(parse_poly(body))
        else:
            polys.append(parse_poly_table(body))
    return PolynomialFactor(polys)


def uniformity_report_json(B: PolynomialFactor, budget: Optional[int] = None) -> dict:
    hist = B.atom_histogram()
    return {
        "epsilon_measured": factor_uniformity(B, budget=budget),
        "order": B.order,
        "atom_count": int(np.count_nonzero(hist)),
        "max_deviation": B.atom_size_deviation(),
    }

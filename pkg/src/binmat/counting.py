"""Homomorphism search and the counting-bound checker.

Ties together the expectation engine, reduced matroids, and factor
uniformity: given a decomposition of M and a pattern N, checks that the
brute-force copy count clears the guaranteed lower bound whenever every
measured hypothesis of the bound holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, ensure_budget
from .factor import consistency_group, factor_uniformity
from .forms import LinearFormSystem, linear_forms_of, product_expectation
from .gowers import gowers_norm
from .matroid import Matroid, automorphism_count, count_injections
from .regularity import Decomposition, EtaSchedule, reduced_matroid

__all__ = [
    "LinearFormSystem",
    "linear_forms_of",
    "product_expectation",
    "homomorphism_exists",
    "degenerate_map_count",
    "degenerate_map_bound",
    "gowers_count_bound_check",
    "counting_bound_check",
    "GowersCountReport",
    "CountingReport",
]


def homomorphism_exists(
    points: frozenset[int],
    n: int,
    N: Matroid,
    budget: Optional[int] = None,
) -> Optional[list[int]]:
    """Witness basis images for a linear map sending N into `points`, or None.

    The map need not be injective; candidates are tried from 0 upward, so
    contractions are found early.
    """
    ell = N.rank
    ensure_budget(1 << (ell * n), budget, "homomorphism search")
    levels: list[list[int]] = [[] for _ in range(ell)]
    for e in N.sorted_elements:
        levels[e.bit_length() - 1].append(e)
    images: list[int] = []

    def level_ok(t: int) -> bool:
        for e in levels[t]:
            img = images[t]
            rest = e & ~(1 << t)
            i = 0
            while rest:
                if rest & 1:
                    img ^= images[i]
                rest >>= 1
                i += 1
            if img not in points:
                return False
        return True

    def recurse(t: int) -> Optional[list[int]]:
        if t == ell:
            return list(images)
        for b in range(1 << n):
            images.append(b)
            if level_ok(t):
                found = recurse(t + 1)
                if found is not None:
                    images.pop()
                    return found
            images.pop()
        return None

    return recurse(0)


def degenerate_map_count(n: int, ell: int) -> int:
    """Exact number of non-injective linear maps F_2^ell -> F_2^n."""
    total = (1 << n) ** ell
    injective = 1
    for i in range(ell):
        injective *= (1 << n) - (1 << i)
    return total - injective


def degenerate_map_bound(n: int, ell: int) -> int:
    """ell * (2^n)^{ell-1} * 2^{ell-1}: the sparse-degenerate-map bound."""
    return ell * (1 << n) ** (ell - 1) * (1 << (ell - 1))


# ---------------------------------------------------------------------------
# Product-expectation bound (min Gowers norm)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GowersCountReport:
    lhs: float
    rhs: float
    norms: tuple[float, ...]
    holds: bool

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "norms": list(self.norms),
            "holds": self.holds,
        }


def gowers_count_bound_check(
    tables: Sequence[np.ndarray],
    system: LinearFormSystem,
    s: int,
    budget: Optional[int] = None,
) -> GowersCountReport:
    """|E prod f_j(L_j(X))| vs min_j ||f_j||_{U^{s+1}} (needs s >= m - 2)."""
    m = len(system)
    if s < m - 2:
        raise ContractError(f"need s >= m - 2 = {m - 2}, got {s}")
    for t in tables:
        if float(np.max(np.abs(np.asarray(t)))) > 1 + 1e-12:
            raise ContractError("tables must be bounded by 1 in modulus")
    value = product_expectation(tables, system, budget=budget)
    lhs = abs(value)
    norms = tuple(gowers_norm(t, s + 1, budget=budget) for t in tables)
    rhs = min(norms)
    return GowersCountReport(lhs=float(lhs), rhs=float(rhs), norms=norms, holds=lhs <= rhs + 1e-9)


# ---------------------------------------------------------------------------
# Counting-bound end-to-end check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountingReport:
    verdict: str  # "pass" | "fail" | "hypotheses unmet"
    injections: int
    aut: int
    copies: int
    bound: float
    beta: float
    K: int
    alphaC: float
    eta_target: float
    eta_measured: float
    uniformity_measured: float
    main_term: float
    main_term_target: float
    hom_witness: Optional[tuple[int, ...]]
    degenerate_fraction: float

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "count": self.copies,
            "injections": self.injections,
            "aut": self.aut,
            "bound": self.bound,
            "beta": self.beta,
            "K": self.K,
            "alphaC": self.alphaC,
            "eta_target": self.eta_target,
            "eta_measured": self.eta_measured,
            "uniformity_measured": self.uniformity_measured,
            "main_term": self.main_term,
            "main_term_target": self.main_term_target,
            "hom_witness": list(self.hom_witness) if self.hom_witness else None,
            "degenerate_fraction": self.degenerate_fraction,
        }


def counting_bound_check(
    M: Matroid,
    D: Decomposition,
    N: Matroid,
    epsilon: float,
    zeta: float,
    budget: Optional[int] = None,
) -> CountingReport:
    """Compare the brute-force copy count of N in M against the guaranteed
    lower bound beta * (2^n)^ell / order^m, with per-ingredient margins.

    Hypotheses measured: a homomorphism from N into the reduced matroid,
    ||f2|| against the eta schedule, factor uniformity against alpha(C), and
    the atom-restricted main term against (1/K - alpha) zeta^m.
    """
    system = linear_forms_of(N)
    m = len(system)
    ell = N.rank
    n = M.rank
    d = D.params.degree
    if d < m - 2:
        raise ContractError(f"need decomposition degree d >= |N| - 2 = {m - 2}, got {d}")
    B = D.factor
    C = B.complexity
    order = B.order

    R = reduced_matroid(M, D, epsilon, zeta)
    witness = homomorphism_exists(R.points, n, N, budget=budget)

    eta_target = EtaSchedule.counting_default(zeta, m, d)(C)
    eta_measured = gowers_norm(D.f2, d + 1, budget=budget)
    alphaC = 2.0 ** (-2 * d * C * m)
    uniformity = factor_uniformity(B, budget=budget)

    K = 1
    cache: dict[tuple[int, int], int] = {}
    for d_i, k_i in zip(B.degrees, B.depths):
        key = (max(d_i, 1), k_i)
        if key not in cache:
            cache[key] = consistency_group(system, *key, budget=budget).size
        K *= cache[key]

    main_term = 0.0
    main_target = (1.0 / K - alphaC) * zeta**m
    if witness is not None:
        atom_idx = B.atom_table
        masks = []
        for row in system.rows:
            img = 0
            for i in range(ell):
                if (row >> i) & 1:
                    img ^= witness[i]
            masks.append((atom_idx == atom_idx[img]).astype(float))
        main_term = float(
            product_expectation([D.f1] * m, system, masks=masks, budget=budget)
        )

    injections = count_injections(M, N, budget=budget)
    aut = automorphism_count(N, budget=budget)
    copies = injections // aut
    beta = zeta**m / (5.0 * 2.0 ** (ell * ell))
    bound = beta * float(1 << n) ** ell / float(order) ** m
    degenerate_fraction = degenerate_map_count(n, ell) / float(1 << n) ** ell

    hypotheses = (
        witness is not None
        and eta_measured <= eta_target + 1e-9
        and uniformity <= alphaC + 1e-9
        and main_term >= main_target - 1e-9
    )
    if not hypotheses:
        verdict = "hypotheses unmet"
    else:
        verdict = "pass" if copies >= bound else "fail"
    return CountingReport(
        verdict=verdict,
        injections=injections,
        aut=aut,
        copies=copies,
        bound=bound,
        beta=beta,
        K=K,
        alphaC=alphaC,
        eta_target=eta_target,
        eta_measured=eta_measured,
        uniformity_measured=uniformity,
        main_term=main_term,
        main_term_target=main_target,
        hom_witness=tuple(witness) if witness is not None else None,
        degenerate_fraction=degenerate_fraction,
    )

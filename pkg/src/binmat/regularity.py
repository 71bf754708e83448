"""Constructive degree-1 decompositions and verification of supplied ones.

A decomposition splits f into a structured part f1 (constant on the atoms of
a polynomial factor), a Gowers-uniform part f2, and a small L2 error f3.  The
degree-1 builder is constructive (spectral energy increment); for higher
degree the workflow is verify-only: callers supply the parts and
`verify_partition` certifies every condition, with measured factor uniformity
standing in for factor rank.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ContractError, ParameterError
from .factor import PolynomialFactor, factor_uniformity, format_factor, parse_factor
from .gf2 import table_dim, walsh_hadamard
from .gowers import fourier_bias, gowers_norm
from .matroid import Matroid
from .polynomial import NonclassicalPoly


@dataclass(frozen=True)
class PartitionParams:
    delta: float
    eta: float
    degree: int


@dataclass(frozen=True)
class Decomposition:
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    factor: PolynomialFactor
    params: PartitionParams

    def __post_init__(self) -> None:
        n = table_dim(self.f1)
        if table_dim(self.f2) != n or table_dim(self.f3) != n:
            raise ContractError("decomposition parts have mixed lengths")
        if self.factor.n != n:
            raise ContractError("factor dimension does not match tables")

    @property
    def n(self) -> int:
        return table_dim(self.f1)

    def total(self) -> np.ndarray:
        return self.f1 + self.f2 + self.f3


# ---------------------------------------------------------------------------
# Eta schedules
# ---------------------------------------------------------------------------

_CLOSED_FORM_RE = re.compile(
    r"^\s*([0-9.eE+-]+)\s*\*\s*2\^\(\s*-\s*([0-9.eE+-]+)\s*\*\s*C\s*\)\s*$"
)


class EtaSchedule:
    """Non-increasing complexity -> threshold map (table or a * 2^(-b * C))."""

    def __init__(self, fn: Callable[[int], float], description: str):
        self._fn = fn
        self.description = description

    def __call__(self, complexity: int) -> float:
        return self._fn(complexity)

    @classmethod
    def constant(cls, value: float) -> "EtaSchedule":
        return cls(lambda C: value, f"constant {value}")

    @classmethod
    def from_table(cls, values: Sequence[float]) -> "EtaSchedule":
        vals = [float(v) for v in values]
        if not vals:
            raise ParameterError("empty schedule table")
        if any(b > a + 1e-15 for a, b in zip(vals, vals[1:])):
            raise ParameterError("schedule table must be non-increasing")
        return cls(lambda C: vals[min(C, len(vals) - 1)], f"table {vals}")

    @classmethod
    def from_string(cls, text: str) -> "EtaSchedule":
        m = _CLOSED_FORM_RE.match(text)
        if not m:
            raise ParameterError(f"unrecognized schedule {text!r}; expected a*2^(-b*C)")
        a, b = float(m.group(1)), float(m.group(2))
        if a <= 0 or b < 0:
            raise ParameterError("schedule needs a > 0 and b >= 0")
        return cls(lambda C: a * 2.0 ** (-b * C), text.strip())

    @classmethod
    def counting_default(cls, zeta: float, m: int, d: int) -> "EtaSchedule":
        """eta(C) = (zeta/3)^m * 2^(-d*C*m - 3)."""
        a = (zeta / 3.0) ** m * 2.0**-3
        return cls.from_string(f"{a!r}*2^(-{d * m}*C)")


# ---------------------------------------------------------------------------
# Constructive degree-1 decomposition
# ---------------------------------------------------------------------------


def decompose_linear(f: np.ndarray, eta_prime: float, budget: Optional[int] = None) -> Decomposition:
    """Spectral refinement until the centered part has Fourier bias <= eta'.

    Each round conditions f on the factor of the characters chosen so far and
    appends the largest-bias character of the remainder; the atom-mean energy
    grows by more than eta'^2 per round, so at most ceil(eta'^-2) rounds run.
    Output has f3 = 0 and ||f2||_{U^2} <= sqrt(eta').
    """
    arr = np.asarray(f, dtype=float)
    n = table_dim(arr)
    if np.min(arr) < 0 or np.max(arr) > 1:
        raise ContractError("decompose_linear expects a [0,1]-valued table")
    if eta_prime <= 0:
        raise ParameterError("eta' must be positive")
    characters: list[int] = []
    factor = PolynomialFactor([], n=n)
    max_rounds = int(np.ceil(eta_prime**-2))
    for _ in range(max_rounds + 1):
        f1 = factor.conditional_mean(arr)
        g = arr - f1
        spectrum = walsh_hadamard(g)
        magnitudes = np.abs(spectrum)
        magnitudes[0] = 0.0
        xi = int(np.argmax(magnitudes))
        if magnitudes[xi] <= eta_prime:
            return Decomposition(
                f1=f1,
                f2=g,
                f3=np.zeros_like(arr),
                factor=factor,
                params=PartitionParams(delta=0.0, eta=eta_prime, degree=1),
            )
        characters.append(xi)
        factor = PolynomialFactor(
            [NonclassicalPoly.linear(n, c) for c in characters], n=n
        )
    raise AssertionError("energy increment failed to terminate within its bound")


# ---------------------------------------------------------------------------
# Verification of supplied partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    measured: float
    threshold: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class PartitionReport:
    conditions: tuple[ConditionResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def to_json(self) -> dict:
        return {
            "all_pass": self.all_passed,
            "conditions": [c.to_json() for c in self.conditions],
        }


def verify_partition(
    f: np.ndarray,
    D: Decomposition,
    delta: float,
    eta: EtaSchedule,
    d: int,
    epsilon_target: float,
    budget: Optional[int] = None,
) -> PartitionReport:
    """Check the six decomposition conditions; failures are report entries."""
    arr = np.asarray(f, dtype=float)
    if table_dim(arr) != D.n:
        raise ContractError("function and decomposition lengths differ")
    tol = 1e-12
    results = []

    sum_err = float(np.max(np.abs(D.total() - arr)))
    results.append(ConditionResult("i:sum", sum_err <= tol, sum_err, tol))

    cond_err = float(np.max(np.abs(D.f1 - D.factor.conditional_mean(arr))))
    results.append(ConditionResult("ii:conditional-mean", cond_err <= tol, cond_err, tol))

    C = D.factor.complexity
    eta_value = eta(C)
    norm_f2 = gowers_norm(D.f2, d + 1, budget=budget)
    results.append(ConditionResult("iii:uniform-part", norm_f2 <= eta_value + 1e-9, norm_f2, eta_value))

    l2_f3 = float(np.sqrt(np.mean(D.f3**2)))
    results.append(ConditionResult("iv:error-part", l2_f3 <= delta + tol, l2_f3, delta))

    range_err = max(
        float(np.max(np.maximum(-D.f1, D.f1 - 1), initial=0.0)),
        float(np.max(np.maximum(-(D.f1 + D.f3), (D.f1 + D.f3) - 1), initial=0.0)),
        float(np.max(np.abs(D.f2), initial=0.0) - 1.0),
        float(np.max(np.abs(D.f3), initial=0.0) - 1.0),
    )
    results.append(ConditionResult("v:ranges", range_err <= tol, max(range_err, 0.0), tol))

    uniformity = factor_uniformity(D.factor, budget=budget)
    results.append(
        ConditionResult("vi:factor-uniformity", uniformity < epsilon_target, uniformity, epsilon_target)
    )
    return PartitionReport(tuple(results))


# ---------------------------------------------------------------------------
# Reduced matroids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedMatroid:
    atoms: frozenset[int]
    points: frozenset[int]
    epsilon: float
    zeta: float
    order: int
    zero_atom: int

    def size(self) -> int:
        return len(self.points)


def reduced_matroid(
    M: Matroid,
    D: Decomposition,
    epsilon: float,
    zeta: float,
) -> ReducedMatroid:
    """Atoms where the L2 error is epsilon-small and M is zeta-dense."""
    f = M.indicator()
    if table_dim(f) != D.n:
        raise ContractError("matroid rank does not match decomposition")
    if float(np.max(np.abs(D.total() - f))) > 1e-12:
        raise ContractError("decomposition does not sum to the matroid indicator")
    atom_idx = D.factor.atom_table
    order = D.factor.order
    counts = np.bincount(atom_idx, minlength=order).astype(float)
    occupied = counts > 0
    err_mean = np.bincount(atom_idx, weights=D.f3**2, minlength=order)
    dens_mean = np.bincount(atom_idx, weights=f, minlength=order)
    with np.errstate(invalid="ignore", divide="ignore"):
        err_mean = np.divide(err_mean, counts, out=np.zeros_like(err_mean), where=occupied)
        dens_mean = np.divide(dens_mean, counts, out=np.zeros_like(dens_mean), where=occupied)
    good = occupied & (err_mean <= epsilon**2) & (dens_mean >= zeta)
    atoms = frozenset(int(a) for a in np.flatnonzero(good))
    member = good[atom_idx]
    points = frozenset(int(p) for p in np.flatnonzero(member))
    return ReducedMatroid(
        atoms=atoms,
        points=points,
        epsilon=epsilon,
        zeta=zeta,
        order=order,
        zero_atom=int(atom_idx[0]),
    )


def reduced_points(R: ReducedMatroid, D: Decomposition, exclude_zero_atom: bool = False) -> frozenset[int]:
    """Point set of R, optionally dropping the whole atom containing 0."""
    if not exclude_zero_atom or R.zero_atom not in R.atoms:
        return R.points
    atom_idx = D.factor.atom_table
    return frozenset(p for p in R.points if int(atom_idx[p]) != R.zero_atom)


# ---------------------------------------------------------------------------
# Disk bundles
# ---------------------------------------------------------------------------


def save_bundle(D: Decomposition, directory: str | Path) -> None:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    for name, table in (("f1", D.f1), ("f2", D.f2), ("f3", D.f3)):
        (path / f"{name}.tbl").write_text(
            "\n".join(repr(float(v)) for v in table) + "\n"
        )
    (path / "factor.txt").write_text(format_factor(D.factor))
    (path / "params.json").write_text(
        json.dumps(
            {
                "delta": D.params.delta,
                "eta": D.params.eta,
                "d": D.params.degree,
                "n": D.n,
                "complexity": D.factor.complexity,
            },
            sort_keys=True,
        )
        + "\n"
    )


def load_table(path: str | Path) -> np.ndarray:
    values = [float(line) for line in Path(path).read_text().split()]
    arr = np.array(values, dtype=float)
    table_dim(arr)
    return arr


def load_bundle(directory: str | Path) -> Decomposition:
    path = Path(directory)
    f1 = load_table(path / "f1.tbl")
    f2 = load_table(path / "f2.tbl")
    f3 = load_table(path / "f3.tbl")
    factor = parse_factor((path / "factor.txt").read_text())
    params = json.loads((path / "params.json").read_text())
    return Decomposition(
        f1=f1,
        f2=f2,
        f3=f3,
        factor=factor,
        params=PartitionParams(
            delta=float(params["delta"]), eta=float(params["eta"]), degree=int(params["d"])
        ),
    )

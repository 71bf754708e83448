"""Systems of linear forms over F_2 and the exact product-expectation engine.

A form on ell variables is a bitmask over the variables; applying it to a
tuple X = (x_1..x_ell) of points XORs the selected coordinates.  Matroid
elements read as forms turn homomorphism counting into expectations of
products over the form system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, ensure_budget
from .matroid import Matroid

_FULL_GRID_LIMIT = 1 << 22  # largest 2^{n*ell} materialized in one block


@dataclass(frozen=True)
class LinearFormSystem:
    """Rows are distinct nonzero bitmasks over `num_vars` variables."""

    rows: tuple[int, ...]
    num_vars: int

    def __post_init__(self) -> None:
        if any(r == 0 for r in self.rows):
            raise ContractError("zero linear form")
        if any(r >= (1 << self.num_vars) for r in self.rows):
            raise ContractError("form uses a variable outside the system")
        if len(set(self.rows)) != len(self.rows):
            raise ContractError("duplicate linear forms")

    def __len__(self) -> int:
        return len(self.rows)

    def apply(self, row: int, X: Sequence[int]) -> int:
        y = 0
        for i in range(self.num_vars):
            if (row >> i) & 1:
                y ^= X[i]
        return y


def linear_forms_of(N: Matroid) -> LinearFormSystem:
    """Each element of N as a linear form on r(N) variables."""
    return LinearFormSystem(N.sorted_elements, N.rank)


def glued_double_system(N: LinearFormSystem) -> LinearFormSystem:
    """Two copies of the system sharing only their first form.

    Requires the first row to be the single-variable form x_1; rows m+1..2m-1
    re-apply rows 2..m to (x_1, y_2..y_ell) on 2*ell - 1 variables.
    """
    if N.rows[0] != 1:
        raise ContractError("glued system needs x_1 as the first form")
    ell = N.num_vars
    rows = list(N.rows)
    for r in N.rows[1:]:
        shifted = (r & 1) | ((r >> 1) << ell)
        rows.append(shifted)
    return LinearFormSystem(tuple(rows), 2 * ell - 1)


# ---------------------------------------------------------------------------
# Product expectations
# ---------------------------------------------------------------------------


def _form_grid(row: int, n: int, ell: int, var_axes: list[np.ndarray]) -> np.ndarray:
    idx = np.zeros((1,) * ell, dtype=np.int64)
    for i in range(ell):
        if (row >> i) & 1:
            idx = idx ^ var_axes[i]
    return idx


def _var_axes(n: int, ell: int) -> list[np.ndarray]:
    size = 1 << n
    axes = []
    for i in range(ell):
        shape = [1] * ell
        shape[i] = size
        axes.append(np.arange(size, dtype=np.int64).reshape(shape))
    return axes


def product_expectation(
    tables: Sequence[np.ndarray],
    system: LinearFormSystem,
    masks: Optional[Sequence[Optional[np.ndarray]]] = None,
    budget: Optional[int] = None,
) -> float | complex:
    """Exact E_X prod_j f_j(L_j(X)) over X in (F_2^n)^ell.

    `masks` optionally multiplies each slot by a 0/1 restriction table
    (atom-restricted counting).  Indicator inputs scaled by (2^n)^ell give
    homomorphism counts.
    """
    m = len(system)
    if len(tables) != m:
        raise ContractError(f"{len(tables)} tables for {m} forms")
    arrays = [np.asarray(t) for t in tables]
    size = arrays[0].shape[-1]
    if any(a.shape != (size,) for a in arrays):
        raise ContractError("tables must share one length")
    if size & (size - 1):
        raise ContractError("table length must be a power of two")
    n = size.bit_length() - 1
    ell = system.num_vars
    if masks is not None:
        if len(masks) != m:
            raise ContractError("one mask slot per form required")
        arrays = [
            a if mk is None else a * np.asarray(mk)
            for a, mk in zip(arrays, masks)
        ]
    total = 1 << (n * ell)
    ensure_budget(total * m, budget, "product expectation")
    complex_mode = any(np.iscomplexobj(a) for a in arrays)
    if total <= _FULL_GRID_LIMIT:
        axes = _var_axes(n, ell)
        acc = None
        for row, table in zip(system.rows, arrays):
            vals = table[_form_grid(row, n, ell, axes)]
            acc = vals if acc is None else acc * vals
        value = acc.mean()
    else:
        # split off x_1 and sweep it in a python loop over full inner grids
        inner_axes = _var_axes(n, ell - 1)
        inner_grids = [
            _form_grid(row >> 1, n, ell - 1, inner_axes) for row in system.rows
        ]
        acc_total = 0.0 + 0.0j if complex_mode else 0.0
        for x1 in range(size):
            acc = None
            for row, table, grid in zip(system.rows, arrays, inner_grids):
                offset = x1 if row & 1 else 0
                vals = table[grid ^ offset]
                acc = vals if acc is None else acc * vals
            acc_total += acc.mean()
        value = acc_total / size
    if complex_mode:
        return complex(value)
    return float(value)


def homomorphism_count(points: frozenset[int], n: int, N: Matroid, budget=None) -> int:
    """Number of (not necessarily injective) linear maps sending N into the set."""
    ind = np.zeros(1 << n)
    ind[list(points)] = 1.0
    system = linear_forms_of(N)
    expectation = product_expectation([ind] * len(system), system, budget=budget)
    scaled = expectation * float(1 << n) ** N.rank
    return round(scaled)

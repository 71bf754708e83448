"""Error taxonomy shared by every module.

Contract violations (bad parameters, malformed files, inconsistent inputs)
map to CLI exit code 2; blown resource budgets map to exit code 3.
"""

from __future__ import annotations


class ContractError(ValueError):
    """Precondition or input-contract violation."""


class ParameterError(ContractError):
    """Invalid parameter combination."""


class DimensionMismatchError(ContractError):
    """Operands live in different ambient dimensions."""


class MatroidParseError(ContractError):
    """Malformed matroid text.  `code` distinguishes the failure kind."""

    SYNTAX = "syntax"
    ZERO_VECTOR = "zero-vector"
    DUPLICATE = "duplicate"
    RANK_DEFICIENT = "rank-deficient"

    def __init__(self, code: str, line: int, message: str):
        super().__init__(f"line {line}: {message} [{code}]")
        self.code = code
        self.line = line


class BudgetError(RuntimeError):
    """Requested computation exceeds the configured operation budget."""


DEFAULT_MAX_OPS = 2**34


def ensure_budget(ops: int, budget: int | None, what: str) -> None:
    """Raise BudgetError if `ops` elementary steps exceed the cap."""
    cap = DEFAULT_MAX_OPS if budget is None else budget
    if ops > cap:
        raise BudgetError(f"{what} needs ~2^{ops.bit_length() - 1} ops, budget is {cap}")

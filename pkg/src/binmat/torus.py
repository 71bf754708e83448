"""Exact dyadic elements of the torus R/Z: values num / 2^prec mod 1."""

from __future__ import annotations

from .errors import ContractError


class DyadicTorus:
    """num / 2^prec mod 1, kept in canonical form (num odd or zero, prec >= 1)."""

    __slots__ = ("num", "prec")

    def __init__(self, num: int, prec: int):
        if prec < 1:
            raise ContractError(f"precision must be positive, got {prec}")
        num %= 1 << prec
        while num and num % 2 == 0 and prec > 1:
            num //= 2
            prec -= 1
        if num == 0:
            prec = 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, *args) -> None:
        raise AttributeError("DyadicTorus is immutable")

    # -- group structure ----------------------------------------------------

    def __add__(self, other: "DyadicTorus") -> "DyadicTorus":
        prec = max(self.prec, other.prec)
        a = self.num << (prec - self.prec)
        b = other.num << (prec - other.prec)
        return DyadicTorus(a + b, prec)

    def __neg__(self) -> "DyadicTorus":
        return DyadicTorus(-self.num, self.prec)

    def __sub__(self, other: "DyadicTorus") -> "DyadicTorus":
        return self + (-other)

    def __rmul__(self, k: int) -> "DyadicTorus":
        if not isinstance(k, int):
            return NotImplemented
        return DyadicTorus(k * self.num, self.prec)

    # -- queries -------------------------------------------------------------

    def in_subgroup(self, k: int) -> bool:
        """True iff the value lies in U_{k+1} = (1/2^{k+1}) Z / Z."""
        return self.num == 0 or self.prec <= k + 1

    def depth_bound(self) -> int:
        """Smallest k with value in U_{k+1}."""
        return 0 if self.num == 0 else self.prec - 1

    def as_float(self) -> float:
        return self.num / (1 << self.prec)

    def numerator_at(self, prec: int) -> int:
        """num scaled so the value reads numerator / 2^prec."""
        if prec < self.prec:
            raise ContractError(f"precision {prec} too small for {self}")
        return self.num << (prec - self.prec)

    # -- plumbing ------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DyadicTorus)
            and self.num == other.num
            and self.prec == other.prec
        )

    def __hash__(self) -> int:
        return hash((self.num, self.prec))

    def __repr__(self) -> str:
        return f"DyadicTorus({self.num}, {self.prec})"

    def __str__(self) -> str:
        return f"{self.num}/{1 << self.prec}"


ZERO = DyadicTorus(0, 1)
HALF = DyadicTorus(1, 1)

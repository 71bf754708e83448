"""Gowers uniformity norms (three evaluation strategies) and Fourier bias."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import ContractError, ParameterError, ensure_budget
from .gf2 import fwht, table_dim, walsh_hadamard
from .polynomial import NonclassicalPoly, PolyTable, measured_degree, table_of

_IDX_CACHE: dict[tuple[int, int], list[tuple[int, np.ndarray]]] = {}


def _as_complex(f: np.ndarray) -> np.ndarray:
    arr = np.asarray(f)
    table_dim(arr)
    return arr.astype(np.complex128)


def _subset_indices(n: int, d: int) -> list[tuple[int, np.ndarray]]:
    """For each subset pattern of (h_1..h_d): parity and XOR-index grid.

    Grids have shape (2^n,) * (d+1) with axes (x, h_1, ..., h_d), built once
    per (n, d) and cached.
    """
    key = (n, d)
    if key in _IDX_CACHE:
        return _IDX_CACHE[key]
    size = 1 << n
    axes = []
    for a in range(d + 1):
        shape = [1] * (d + 1)
        shape[a] = size
        axes.append(np.arange(size, dtype=np.int64).reshape(shape))
    out = []
    for pattern in range(1 << d):
        idx = axes[0]
        for j in range(d):
            if (pattern >> j) & 1:
                idx = idx ^ axes[j + 1]
        out.append((pattern.bit_count() & 1, np.broadcast_to(idx, (size,) * (d + 1))))
    _IDX_CACHE[key] = out
    return out


def _norm_direct(f: np.ndarray, d: int, budget: Optional[int]) -> float:
    n = table_dim(f)
    ensure_budget((1 << (n * (d + 1))) * (1 << d), budget, "direct Gowers norm")
    fc = _as_complex(f)
    acc = np.ones((1 << n,) * (d + 1), dtype=np.complex128)
    for parity, idx in _subset_indices(n, d):
        vals = fc[idx]
        acc = acc * (np.conj(vals) if parity else vals)
    mean = acc.mean()
    return float(max(mean.real, 0.0)) ** (1.0 / (1 << d))


def _mult_derivative(fc: np.ndarray, h: int, n: int) -> np.ndarray:
    xs = np.arange(1 << n, dtype=np.int64)
    return fc[xs ^ h] * np.conj(fc)


def _norm_recursive(f: np.ndarray, d: int, budget: Optional[int]) -> float:
    n = table_dim(f)
    ensure_budget(1 << (n * d + n), budget, "recursive Gowers norm")
    fc = _as_complex(f)

    def power(g: np.ndarray, dd: int) -> float:
        # returns ||g||_{U^dd}^{2^dd}
        if dd == 1:
            m = g.mean()
            return float((m * np.conj(m)).real)
        return float(
            np.mean([power(_mult_derivative(g, h, n), dd - 1) for h in range(1 << n)])
        )

    return max(power(fc, d), 0.0) ** (1.0 / (1 << d))


def _norm_wht_base(f: np.ndarray, d: int, budget: Optional[int]) -> float:
    if d < 2:
        raise ParameterError("wht_base strategy needs d >= 2")
    n = table_dim(f)
    ensure_budget((1 << (n * (d - 2))) * (n + 1) * (1 << n), budget, "wht Gowers norm")
    fc = _as_complex(f)
    size = 1 << n
    tables = fc[np.newaxis, :]
    for _ in range(d - 2):
        xs = np.arange(size, dtype=np.int64)
        shifted = tables[:, xs[np.newaxis, :] ^ xs[:, np.newaxis]]  # (batch, h, x)
        tables = (shifted * np.conj(tables)[:, np.newaxis, :]).reshape(-1, size)
    spectra = fwht(tables) / size
    u2_4 = np.sum(np.abs(spectra) ** 4, axis=1)
    return float(max(u2_4.mean(), 0.0)) ** (1.0 / (1 << d))


_STRATEGIES = {
    "direct": _norm_direct,
    "recursive": _norm_recursive,
    "wht_base": _norm_wht_base,
}


def gowers_norm(
    f: np.ndarray,
    d: int,
    strategy: Optional[str] = None,
    budget: Optional[int] = None,
) -> float:
    """||f||_{U^d}.  Strategies agree to 1e-9; `direct` is the oracle.

    Default picks wht_base for d >= 2 (cheapest) and direct for d = 1.
    """
    if d < 1:
        raise ParameterError("Gowers norm order must be >= 1")
    if strategy is None:
        strategy = "wht_base" if d >= 2 else "direct"
    if strategy == "wht_base" and d == 1:
        raise ParameterError("wht_base strategy is undefined at d = 1")
    if strategy not in _STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}")
    return _STRATEGIES[strategy](np.asarray(f), d, budget)


def fourier_bias(f: np.ndarray) -> float:
    """max over nonzero xi of |fhat(xi)|."""
    spectrum = walsh_hadamard(np.asarray(f))
    return float(np.max(np.abs(spectrum[1:]))) if spectrum.shape[-1] > 1 else 0.0


def phase_table(P: NonclassicalPoly | PolyTable) -> np.ndarray:
    """e(P) as a complex table."""
    return table_of(P).phase()


def modulation_invariance_check(
    f: np.ndarray,
    P: NonclassicalPoly | PolyTable,
    d: Optional[int] = None,
    strategy: Optional[str] = None,
    budget: Optional[int] = None,
) -> float:
    """|  ||f e(P)||_{U^{d+1}} - ||f||_{U^{d+1}}  | with d defaulting to deg P."""
    T = table_of(P)
    arr = np.asarray(f)
    if table_dim(arr) != T.n:
        raise ContractError("table and polynomial dimensions differ")
    if d is None:
        d = measured_degree(T, budget=budget)
    base = gowers_norm(arr, d + 1, strategy=strategy, budget=budget)
    modulated = gowers_norm(
        _as_complex(arr) * T.phase(), d + 1, strategy=strategy, budget=budget
    )
    return abs(modulated - base)

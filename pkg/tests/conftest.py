"""Shared helpers and independent oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from binmat.gf2 import rank_of_masks
from binmat.matroid import Matroid


def random_table(rng: np.random.Generator, n: int, low=0.0, high=1.0) -> np.ndarray:
    return rng.uniform(low, high, size=1 << n)


def random_complex_table(rng: np.random.Generator, n: int) -> np.ndarray:
    mag = rng.uniform(0, 1, size=1 << n)
    phase = rng.uniform(0, 2 * np.pi, size=1 << n)
    return mag * np.exp(1j * phase)


def random_matroid(rng: np.random.Generator, n: int, size: int) -> Matroid:
    for _ in range(200):
        pts = rng.choice(np.arange(1, 1 << n), size=size, replace=False)
        elems = frozenset(int(p) for p in pts)
        if rank_of_masks(elems) == n:
            return Matroid(n, elems)
    raise RuntimeError("could not sample a full-rank matroid")


def brute_injection_count(M: Matroid, N: Matroid) -> int:
    """Oracle: iterate every tuple of basis images, no pruning."""
    ell, n = N.rank, M.rank
    count = 0
    for images in itertools.product(range(1 << n), repeat=ell):
        if rank_of_masks(images) != ell:
            continue
        ok = True
        for e in N.elements:
            img = 0
            for i in range(ell):
                if (e >> i) & 1:
                    img ^= images[i]
            if img not in M.elements:
                ok = False
                break
        if ok:
            count += 1
    return count


def brute_product_expectation(tables, rows, ell: int):
    """Oracle: nested loops over every X tuple."""
    size = len(tables[0])
    total = 0.0 if not any(np.iscomplexobj(t) for t in tables) else 0.0 + 0.0j
    for X in itertools.product(range(size), repeat=ell):
        prod = 1.0
        for row, table in zip(rows, tables):
            img = 0
            for i in range(ell):
                if (row >> i) & 1:
                    img ^= X[i]
            prod = prod * table[img]
        total += prod
    return total / size**ell


def brute_walsh(f: np.ndarray) -> np.ndarray:
    """Oracle: quadratic-time character sums, fhat(xi) = E_x f(x) (-1)^{x.xi}."""
    size = len(f)
    out = np.zeros(size, dtype=complex if np.iscomplexobj(f) else float)
    for xi in range(size):
        acc = 0.0
        for x in range(size):
            sign = -1.0 if (x & xi).bit_count() & 1 else 1.0
            acc += f[x] * sign
        out[xi] = acc / size
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)

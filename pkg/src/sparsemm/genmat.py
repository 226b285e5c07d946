"""Deterministic, seeded generators for the benchmark matrix families.

Three families: the five-point stencil of a Dirichlet boundary value problem
on a square grid (``fd``), square matrices with a fixed number of random
entries per row (``random``), and the same construction with a per-row fill
ratio instead of a fixed count (``fill``).

Randomness comes from splitmix64 so a given seed reproduces bit-identical
matrices on any platform or interpreter.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .formats import CsrBuilder, CsrMatrix

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """splitmix64: 64-bit state advanced by a fixed increment, then mixed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        # Modulo draw; bias is negligible for n far below 2**64 and the
        # reduction is trivially portable across languages.
        return self.next_u64() % n

    def next_unit(self) -> float:
        """Uniform double in (0, 1], built from the top 53 bits."""
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53


FAMILIES = ("fd", "random", "fill")


@dataclass(frozen=True)
class GenSpec:
    """One generator configuration.

    ``n`` is the matrix dimension; for the ``fd`` family the generator picks
    the grid side closest to sqrt(n) and the actual dimension is its square.
    """

    family: str
    n: int
    k: int = 5
    fill: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.family == "random" and not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if self.family == "fill" and not 0.0 < self.fill <= 1.0:
            raise ValueError("need 0 < fill <= 1")


def gen_fd(grid: int) -> CsrMatrix:
    """Five-point stencil matrix on a grid x grid square, N = grid**2.

    Row i holds 4.0 on the diagonal and -1.0 for each of the up to four grid
    neighbors; neighbor links are suppressed across the grid boundary, so
    interior points have 5 entries, edge points 4 and corner points 3.
    """
    if grid < 1:
        raise ValueError("grid must be at least 1")
    n = grid * grid
    builder = CsrBuilder(n, n, 5 * n)
    for i in range(n):
        x = i % grid
        y = i // grid
        if y > 0:
            builder.append(i - grid, -1.0)
        if x > 0:
            builder.append(i - 1, -1.0)
        builder.append(i, 4.0)
        if x < grid - 1:
            builder.append(i + 1, -1.0)
        if y < grid - 1:
            builder.append(i + grid, -1.0)
        builder.finalize_row()
    return builder.finish()


def gen_random_k(n: int, k: int, seed: int) -> CsrMatrix:
    """n x n matrix with exactly k entries per row at distinct random columns.

    Column positions are drawn uniformly with rejection of repeats, each
    accepted column immediately receives a value uniform in (0, 1], and the
    row is sorted by column before being appended.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    rng = SplitMix64(seed)
    builder = CsrBuilder(n, n, n * k)
    for _ in range(n):
        cols = set()
        row = []
        while len(row) < k:
            c = rng.next_below(n)
            if c in cols:
                continue
            cols.add(c)
            row.append((c, rng.next_unit()))
        row.sort()
        for c, v in row:
            builder.append(c, v)
        builder.finalize_row()
    return builder.finish()


def fill_row_count(n: int, fill: float) -> int:
    """Entries per row implied by a fill ratio: round half up, at least 1."""
    if not 0.0 < fill <= 1.0:
        raise ValueError("need 0 < fill <= 1")
    return max(1, int(fill * n + 0.5))


def gen_fill_ratio(n: int, fill: float, seed: int) -> CsrMatrix:
    """Random matrix with a per-row fill ratio instead of a fixed count."""
    return gen_random_k(n, fill_row_count(n, fill), seed)


def generate(spec: GenSpec) -> CsrMatrix:
    if spec.family == "fd":
        grid = max(1, round(math.sqrt(spec.n)))
        return gen_fd(grid)
    if spec.family == "random":
        return gen_random_k(spec.n, spec.k, spec.seed)
    return gen_fill_ratio(spec.n, spec.fill, spec.seed)


def matrix_fingerprint(m: CsrMatrix) -> str:
    """sha256 over the canonical little-endian bytes of a CSR matrix.

    Two matrices get the same fingerprint iff their dimensions and all three
    arrays are bit-identical; used to assert reproducibility across processes.
    """
    h = hashlib.sha256()
    h.update(f"csr:{m.rows}:{m.cols}:".encode())
    h.update(np.ascontiguousarray(m.row_ptr, dtype="<u8").tobytes())
    h.update(np.ascontiguousarray(m.col_idx, dtype="<u8").tobytes())
    h.update(np.ascontiguousarray(m.values, dtype="<f8").tobytes())
    return h.hexdigest()

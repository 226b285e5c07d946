"""Shared helpers for the test suite."""

import os
import sys

import numpy as np

SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from sparsemm.formats import CscMatrix, CsrMatrix  # noqa: E402
from sparsemm.genmat import SplitMix64, gen_random_k  # noqa: E402


def csr(dense) -> CsrMatrix:
    return CsrMatrix.from_dense(np.asarray(dense, dtype=float))


def csc(dense) -> CscMatrix:
    return CscMatrix.from_dense(np.asarray(dense, dtype=float))


def identity_csr(n: int) -> CsrMatrix:
    return csr(np.eye(n))


def assert_csr_bitwise_equal(a: CsrMatrix, b: CsrMatrix) -> None:
    assert (a.rows, a.cols) == (b.rows, b.cols)
    assert a.row_ptr.tobytes() == b.row_ptr.tobytes()
    assert a.col_idx.tobytes() == b.col_idx.tobytes()
    assert a.values.tobytes() == b.values.tobytes()


def assert_csc_bitwise_equal(a: CscMatrix, b: CscMatrix) -> None:
    assert (a.rows, a.cols) == (b.rows, b.cols)
    assert a.col_ptr.tobytes() == b.col_ptr.tobytes()
    assert a.row_idx.tobytes() == b.row_idx.tobytes()
    assert a.values.tobytes() == b.values.tobytes()


def assert_matches_dense(sparse, expected: np.ndarray, rtol: float = 1e-12) -> None:
    """Same sparsity pattern and entrywise values within relative tolerance."""
    got = sparse.to_dense()
    assert np.array_equal(got != 0.0, expected != 0.0), "sparsity patterns differ"
    assert np.allclose(got, expected, rtol=rtol, atol=0.0)


def random_pair(seed: int, n_min: int = 4, n_max: int = 64):
    """Deterministic random operand pair; the dimension itself is drawn from
    the seed and the per-row count is 5 capped at the dimension."""
    rng = SplitMix64(seed ^ 0xA5A5A5A5)
    n = n_min + rng.next_below(n_max - n_min + 1)
    k = min(5, n)
    a = gen_random_k(n, k, seed)
    b = gen_random_k(n, k, seed + 1)
    return a, b

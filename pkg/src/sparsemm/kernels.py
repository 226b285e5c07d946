"""Sparse matrix-matrix multiplication kernels.

Two algorithm families are implemented:

* the classic kernel, which forms every result element as a merge ("dot
  product") of a sparse row of the left operand with a sparse column of the
  right operand, and
* the row-major kernel (with its column-major mirror), which scatters each
  nonzero of a left-operand row into a dense accumulator spanning one result
  row, then compresses that row into the output.

Compression of the dense accumulator is pluggable: ``StrategyKind`` selects
how the nonzero positions are found (full scan, bit or byte lookup vector,
tracked min/max range, or sorting a list of touched indices). All strategies
append the same entries in the same order, so their outputs are identical
down to the bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .formats import (
    CscBuilder,
    CscMatrix,
    CsrBuilder,
    CsrMatrix,
    csc_to_csr,
    csr_to_csc,
    estimate_nnz,
    estimate_nnz_csc,
)


class StrategyKind(str, Enum):
    """How a fully accumulated dense row is compressed into the result."""

    BRUTE_FORCE_DOUBLE = "bfdouble"
    BRUTE_FORCE_BOOL = "bfbool"
    BRUTE_FORCE_CHAR = "bfchar"
    MIN_MAX = "minmax"
    MIN_MAX_CHAR = "minmaxchar"
    SORT = "sort"
    COMBINED = "combined"


_BIT = (1, 2, 4, 8, 16, 32, 64, 128)

_NEEDS_BITS = frozenset({StrategyKind.BRUTE_FORCE_BOOL})
_NEEDS_BYTES = frozenset({StrategyKind.BRUTE_FORCE_CHAR, StrategyKind.MIN_MAX_CHAR})
_NEEDS_TOUCHED = frozenset({StrategyKind.SORT, StrategyKind.COMBINED})


@dataclass
class KernelStats:
    """Optional instrumentation: pass to a kernel to record what it did."""

    multiplications: int = 0
    conversions: int = 0
    row_choices: list = field(default_factory=list)  # (major index, StrategyKind)


class RowAccumulator:
    """Dense scratch vector plus the auxiliary state one strategy needs.

    Between rows every slot of ``dense`` is exactly zero, the lookup vector
    (if any) is all-clear, the touched list is empty and the min/max trackers
    sit at their sentinels (min at ``length``, max at 0). ``accumulate`` and
    ``store_row`` maintain that invariant together.
    """

    def __init__(self, length: int, strategy: StrategyKind):
        self.length = length
        self.strategy = strategy = StrategyKind(strategy)
        self.dense = [0.0] * length
        self.lookup_bits = bytearray((length + 7) >> 3) if strategy in _NEEDS_BITS else None
        self.lookup = bytearray(length) if strategy in _NEEDS_BYTES else None
        self.touched = [] if strategy in _NEEDS_TOUCHED else None
        self.min_idx = length
        self.max_idx = 0

    def accumulate(self, maj_idx, maj_val, other_ptr, other_idx, other_val) -> int:
        """Scatter one major slice of the left operand against the right one.

        ``maj_idx``/``maj_val`` hold the entries of the current slice (a row
        of A in the row-major kernel); for each entry k the slice
        ``other_ptr[k]:other_ptr[k + 1]`` of the right operand is scaled and
        added into ``dense``. Returns the number of multiplications done.
        """
        dense = self.dense
        strategy = self.strategy
        mults = 0
        if strategy is StrategyKind.BRUTE_FORCE_DOUBLE:
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    dense[x] += av * bv
        elif strategy is StrategyKind.BRUTE_FORCE_BOOL:
            bits = self.lookup_bits
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    dense[x] += av * bv
                    bits[x >> 3] |= _BIT[x & 7]
        elif strategy is StrategyKind.BRUTE_FORCE_CHAR:
            lookup = self.lookup
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    dense[x] += av * bv
                    lookup[x] = 1
        elif strategy is StrategyKind.MIN_MAX:
            min_idx = self.min_idx
            max_idx = self.max_idx
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    dense[x] += av * bv
                    if x < min_idx:
                        min_idx = x
                    if x > max_idx:
                        max_idx = x
            self.min_idx = min_idx
            self.max_idx = max_idx
        elif strategy is StrategyKind.MIN_MAX_CHAR:
            lookup = self.lookup
            min_idx = self.min_idx
            max_idx = self.max_idx
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    dense[x] += av * bv
                    lookup[x] = 1
                    if x < min_idx:
                        min_idx = x
                    if x > max_idx:
                        max_idx = x
            self.min_idx = min_idx
            self.max_idx = max_idx
        elif strategy is StrategyKind.SORT:
            touched = self.touched
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    if dense[x] == 0.0:
                        touched.append(x)
                    dense[x] += av * bv
        elif strategy is StrategyKind.COMBINED:
            touched = self.touched
            min_idx = self.min_idx
            max_idx = self.max_idx
            for pos, k in enumerate(maj_idx):
                av = maj_val[pos]
                lo, hi = other_ptr[k], other_ptr[k + 1]
                mults += hi - lo
                for x, bv in zip(other_idx[lo:hi], other_val[lo:hi]):
                    if dense[x] == 0.0:
                        touched.append(x)
                    dense[x] += av * bv
                    if x < min_idx:
                        min_idx = x
                    if x > max_idx:
                        max_idx = x
            self.min_idx = min_idx
            self.max_idx = max_idx
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        return mults


def combined_select(range_len: int, row_nnz: int) -> StrategyKind:
    """Per-row choice of the combined kernel: range scan when the touched
    region is smaller than twice the row's nonzero count, otherwise sort."""
    if range_len < 2 * row_nnz:
        return StrategyKind.MIN_MAX
    return StrategyKind.SORT


def store_row(acc: RowAccumulator, strategy: StrategyKind, builder,
              stats: KernelStats | None = None, major: int = 0) -> None:
    """Compress the accumulated row into the builder and reset the accumulator.

    Entries are appended in increasing index order; values that accumulated
    to exactly zero are dropped by every strategy. Seals the current major
    slice on the builder and leaves the accumulator all-clear for the next
    row. ``major`` is only used to tag instrumentation records.
    """
    strategy = StrategyKind(strategy)
    if strategy is not acc.strategy:
        raise ValueError(
            f"accumulator was built for {acc.strategy.value}, not {strategy.value}"
        )
    dense = acc.dense
    append = builder.append
    if strategy is StrategyKind.BRUTE_FORCE_DOUBLE:
        for x in range(acc.length):
            v = dense[x]
            if v != 0.0:
                append(x, v)
                dense[x] = 0.0
    elif strategy is StrategyKind.BRUTE_FORCE_BOOL:
        bits = acc.lookup_bits
        for byte_pos, byte in enumerate(bits):
            if byte:
                base = byte_pos << 3
                for bit in range(8):
                    if byte & _BIT[bit]:
                        x = base + bit
                        v = dense[x]
                        if v != 0.0:
                            append(x, v)
                            dense[x] = 0.0
                bits[byte_pos] = 0
    elif strategy is StrategyKind.BRUTE_FORCE_CHAR:
        lookup = acc.lookup
        for x in range(acc.length):
            if lookup[x]:
                lookup[x] = 0
                v = dense[x]
                if v != 0.0:
                    append(x, v)
                    dense[x] = 0.0
    elif strategy is StrategyKind.MIN_MAX:
        _store_range(acc, builder)
    elif strategy is StrategyKind.MIN_MAX_CHAR:
        lookup = acc.lookup
        if acc.min_idx <= acc.max_idx:
            for x in range(acc.min_idx, acc.max_idx + 1):
                if lookup[x]:
                    lookup[x] = 0
                    v = dense[x]
                    if v != 0.0:
                        append(x, v)
                        dense[x] = 0.0
            acc.min_idx = acc.length
            acc.max_idx = 0
    elif strategy is StrategyKind.SORT:
        _store_sorted(acc, builder)
    elif strategy is StrategyKind.COMBINED:
        if acc.min_idx <= acc.max_idx:
            choice = combined_select(acc.max_idx - acc.min_idx + 1, len(acc.touched))
            if stats is not None:
                stats.row_choices.append((major, choice))
            if choice is StrategyKind.MIN_MAX:
                _store_range(acc, builder)
                acc.touched.clear()
            else:
                _store_sorted(acc, builder)
                acc.min_idx = acc.length
                acc.max_idx = 0
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    builder.finalize()


def _store_range(acc: RowAccumulator, builder) -> None:
    if acc.min_idx > acc.max_idx:
        return
    dense = acc.dense
    append = builder.append
    for x in range(acc.min_idx, acc.max_idx + 1):
        v = dense[x]
        if v != 0.0:
            append(x, v)
            dense[x] = 0.0
    acc.min_idx = acc.length
    acc.max_idx = 0


def _store_sorted(acc: RowAccumulator, builder) -> None:
    touched = acc.touched
    touched.sort()
    dense = acc.dense
    append = builder.append
    prev = -1
    for x in touched:
        if x == prev:  # re-touched after a transient exact zero
            continue
        prev = x
        v = dense[x]
        if v != 0.0:
            append(x, v)
            dense[x] = 0.0
    touched.clear()


def multiply_rowmajor(a: CsrMatrix, b: CsrMatrix,
                      strategy: StrategyKind = StrategyKind.COMBINED,
                      stats: KernelStats | None = None) -> CsrMatrix:
    """Row-major product of two CSR matrices.

    Walks the rows of ``a``; each nonzero a[r, k] scales row k of ``b`` into
    a dense accumulator, which is then compressed into row r of the result
    by the chosen strategy. The result's storage is reserved once, up front,
    from the multiplication-count estimate.
    """
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} (cols of a) != {b.rows} (rows of b)")
    out = CsrBuilder(a.rows, b.cols, estimate_nnz(a, b))
    acc = RowAccumulator(b.cols, strategy)
    a_ptr = a.row_ptr.tolist()
    a_idx = a.col_idx.tolist()
    a_val = a.values.tolist()
    b_ptr = b.row_ptr.tolist()
    b_idx = b.col_idx.tolist()
    b_val = b.values.tolist()
    mults = 0
    for r in range(a.rows):
        lo, hi = a_ptr[r], a_ptr[r + 1]
        if lo != hi:
            mults += acc.accumulate(a_idx[lo:hi], a_val[lo:hi], b_ptr, b_idx, b_val)
            store_row(acc, acc.strategy, out, stats=stats, major=r)
        else:
            out.finalize_row()
    if stats is not None:
        stats.multiplications += mults
    return out.finish()


def multiply_colmajor(a: CscMatrix, b: CscMatrix,
                      strategy: StrategyKind = StrategyKind.COMBINED,
                      stats: KernelStats | None = None) -> CscMatrix:
    """Column-major mirror of multiply_rowmajor for two CSC matrices.

    Walks the columns of ``b``; each nonzero b[k, c] scales column k of
    ``a`` into the accumulator, producing result column c.
    """
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} (cols of a) != {b.rows} (rows of b)")
    out = CscBuilder(a.rows, b.cols, estimate_nnz_csc(a, b))
    acc = RowAccumulator(a.rows, strategy)
    a_ptr = a.col_ptr.tolist()
    a_idx = a.row_idx.tolist()
    a_val = a.values.tolist()
    b_ptr = b.col_ptr.tolist()
    b_idx = b.row_idx.tolist()
    b_val = b.values.tolist()
    mults = 0
    for c in range(b.cols):
        lo, hi = b_ptr[c], b_ptr[c + 1]
        if lo != hi:
            mults += acc.accumulate(b_idx[lo:hi], b_val[lo:hi], a_ptr, a_idx, a_val)
            store_row(acc, acc.strategy, out, stats=stats, major=c)
        else:
            out.finalize_col()
    if stats is not None:
        stats.multiplications += mults
    return out.finish()


def multiply_classic(a: CsrMatrix, b: CscMatrix,
                     stats: KernelStats | None = None) -> CsrMatrix:
    """Classic product: merge row r of ``a`` with column c of ``b`` for every
    result position. An entry is stored only when the merge hit at least one
    common index and the accumulated value is nonzero.
    """
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} (cols of a) != {b.rows} (rows of b)")
    col_nnz_a = np.bincount(a.col_idx.astype(np.intp), minlength=a.cols)
    row_nnz_b = np.bincount(b.row_idx.astype(np.intp), minlength=b.rows)
    capacity = int(col_nnz_a @ row_nnz_b)
    out = CsrBuilder(a.rows, b.cols, capacity)
    a_ptr = a.row_ptr.tolist()
    a_idx = a.col_idx.tolist()
    a_val = a.values.tolist()
    b_ptr = b.col_ptr.tolist()
    b_idx = b.row_idx.tolist()
    b_val = b.values.tolist()
    n_cols = b.cols
    append = out.append
    mults = 0
    for r in range(a.rows):
        row_lo, row_hi = a_ptr[r], a_ptr[r + 1]
        if row_lo != row_hi:
            for c in range(n_cols):
                i = row_lo
                j = b_ptr[c]
                j_hi = b_ptr[c + 1]
                total = 0.0
                matched = False
                while i < row_hi and j < j_hi:
                    ka = a_idx[i]
                    kb = b_idx[j]
                    if ka < kb:
                        i += 1
                    elif kb < ka:
                        j += 1
                    else:
                        total += a_val[i] * b_val[j]
                        matched = True
                        mults += 1
                        i += 1
                        j += 1
                if matched and total != 0.0:
                    append(c, total)
        out.finalize_row()
    if stats is not None:
        stats.multiplications += mults
    return out.finish()


def multiply_mixed(a, b, strategy: StrategyKind = StrategyKind.COMBINED,
                   stats: KernelStats | None = None):
    """Product of operands in any storage-order combination.

    Same-order pairs go straight to the matching kernel. For mixed pairs the
    right operand is converted (exactly one conversion) so the kernel that
    matches the left operand's order can run; the result is always in the
    left operand's storage order.
    """
    a_is_csr = isinstance(a, CsrMatrix)
    b_is_csr = isinstance(b, CsrMatrix)
    if a_is_csr and b_is_csr:
        return multiply_rowmajor(a, b, strategy, stats)
    if not a_is_csr and not b_is_csr:
        return multiply_colmajor(a, b, strategy, stats)
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} (cols of a) != {b.rows} (rows of b)")
    if stats is not None:
        stats.conversions += 1
    if a_is_csr:
        return multiply_rowmajor(a, csc_to_csr(b), strategy, stats)
    return multiply_colmajor(a, csr_to_csc(b), strategy, stats)


def dense_multiply_reference(a, b) -> tuple[np.ndarray, int]:
    """Dense reference product for tests, independent of the sparse kernels.

    Accumulates over the shared dimension in ascending order, the same
    per-element order the sparse kernels use. Also returns the number of
    multiplications restricted to pairs of structurally nonzero operands.
    Intended for desk-scale operands (n <= 512).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    for k in range(a.shape[1]):
        out += np.outer(a[:, k], b[k, :])
    mults = int(np.count_nonzero(a, axis=0) @ np.count_nonzero(b, axis=1))
    return out, mults

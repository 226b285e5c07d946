"""Compressed sparse row/column storage and the streaming builder used to fill it.

Matrices are plain structs over three numpy arrays (pointer, index, value).
They are immutable once constructed; anything that needs to create one goes
through ``CsrBuilder`` / ``CscBuilder``, which reserve all memory up front and
stream entries in major order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INDEX_DTYPE = np.uint64
VALUE_DTYPE = np.float64


class ValidationError(ValueError):
    """A stored matrix violates a format invariant."""


class BuilderError(RuntimeError):
    """A streaming builder was driven outside its contract."""


class CapacityError(BuilderError):
    """More entries appended than were reserved (broken nnz estimate)."""


class OrderingError(BuilderError):
    """Entries appended out of strictly increasing index order."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(eq=False)
class CsrMatrix:
    """Compressed sparse row matrix.

    ``row_ptr`` has length ``rows + 1``; the nonzeros of row ``r`` live at
    positions ``row_ptr[r]:row_ptr[r + 1]`` of ``col_idx`` / ``values``,
    with strictly increasing column indices inside each row.
    """

    rows: int
    cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _frozen(self.row_ptr)
        _frozen(self.col_idx)
        _frozen(self.values)

    @property
    def nnz(self) -> int:
        return len(self.values)

    @classmethod
    def from_arrays(cls, rows, cols, row_ptr, col_idx, values) -> "CsrMatrix":
        return cls(
            rows,
            cols,
            np.asarray(row_ptr, dtype=INDEX_DTYPE).copy(),
            np.asarray(col_idx, dtype=INDEX_DTYPE).copy(),
            np.asarray(values, dtype=VALUE_DTYPE).copy(),
        )

    @classmethod
    def from_dense(cls, dense) -> "CsrMatrix":
        dense = np.asarray(dense, dtype=VALUE_DTYPE)
        rows, cols = dense.shape
        builder = CsrBuilder(rows, cols, int(np.count_nonzero(dense)))
        for r in range(rows):
            for c in np.nonzero(dense[r])[0]:
                builder.append(int(c), float(dense[r, c]))
            builder.finalize_row()
        return builder.finish()

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=VALUE_DTYPE)
        if self.nnz:
            per_row = np.diff(self.row_ptr).astype(np.intp)
            r = np.repeat(np.arange(self.rows), per_row)
            out[r, self.col_idx.astype(np.intp)] = self.values
        return out


@dataclass(eq=False)
class CscMatrix:
    """Compressed sparse column matrix, the column-major mirror of CsrMatrix."""

    rows: int
    cols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _frozen(self.col_ptr)
        _frozen(self.row_idx)
        _frozen(self.values)

    @property
    def nnz(self) -> int:
        return len(self.values)

    @classmethod
    def from_arrays(cls, rows, cols, col_ptr, row_idx, values) -> "CscMatrix":
        return cls(
            rows,
            cols,
            np.asarray(col_ptr, dtype=INDEX_DTYPE).copy(),
            np.asarray(row_idx, dtype=INDEX_DTYPE).copy(),
            np.asarray(values, dtype=VALUE_DTYPE).copy(),
        )

    @classmethod
    def from_dense(cls, dense) -> "CscMatrix":
        dense = np.asarray(dense, dtype=VALUE_DTYPE)
        rows, cols = dense.shape
        builder = CscBuilder(rows, cols, int(np.count_nonzero(dense)))
        for c in range(cols):
            for r in np.nonzero(dense[:, c])[0]:
                builder.append(int(r), float(dense[r, c]))
            builder.finalize_col()
        return builder.finish()

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=VALUE_DTYPE)
        if self.nnz:
            per_col = np.diff(self.col_ptr).astype(np.intp)
            c = np.repeat(np.arange(self.cols), per_col)
            out[self.row_idx.astype(np.intp), c] = self.values
        return out


class _StreamBuilder:
    """Shared append/finalize machinery for both storage orders.

    All memory is reserved in ``__init__``; ``append`` only writes at the
    cursor and never allocates. Entries must arrive in strictly increasing
    minor-index order within each major slice, and every major slice must be
    sealed exactly once.
    """

    def __init__(self, n_major: int, n_minor: int, capacity: int):
        if n_major < 0 or n_minor < 0 or capacity < 0:
            raise ValueError("dimensions and capacity must be non-negative")
        self.n_major = n_major
        self.n_minor = n_minor
        self.capacity = capacity
        self.cursor = 0
        self.majors_done = 0
        self._last_idx = -1
        self._ptr = np.zeros(n_major + 1, dtype=INDEX_DTYPE)
        self._idx = np.empty(capacity, dtype=INDEX_DTYPE)
        self._val = np.empty(capacity, dtype=VALUE_DTYPE)

    def append(self, idx: int, value: float) -> None:
        if idx >= self.n_minor:
            raise ValueError(f"index {idx} out of range (< {self.n_minor})")
        if idx <= self._last_idx:
            raise OrderingError(
                f"index {idx} not strictly greater than previous {self._last_idx}"
            )
        cursor = self.cursor
        if cursor >= self.capacity:
            raise CapacityError(
                f"reserved capacity {self.capacity} exhausted; nnz estimate was too low"
            )
        self._idx[cursor] = idx
        self._val[cursor] = value
        self.cursor = cursor + 1
        self._last_idx = idx

    def finalize(self) -> None:
        if self.majors_done >= self.n_major:
            raise BuilderError(f"all {self.n_major} slices already finalized")
        self.majors_done += 1
        self._ptr[self.majors_done] = self.cursor
        self._last_idx = -1

    def _finished_arrays(self):
        if self.majors_done != self.n_major:
            raise BuilderError(
                f"only {self.majors_done} of {self.n_major} slices finalized"
            )
        if int(self._ptr[self.n_major]) != self.cursor:
            raise BuilderError("entries appended after the last slice was finalized")
        return self._ptr, self._idx[: self.cursor], self._val[: self.cursor]


class CsrBuilder(_StreamBuilder):
    """Streams a CsrMatrix row by row: append entries, then seal each row."""

    def __init__(self, rows: int, cols: int, capacity: int):
        super().__init__(rows, cols, capacity)
        self.rows = rows
        self.cols = cols

    def finalize_row(self) -> None:
        self.finalize()

    def finish(self) -> CsrMatrix:
        ptr, idx, val = self._finished_arrays()
        return CsrMatrix(self.rows, self.cols, ptr, idx, val)


class CscBuilder(_StreamBuilder):
    """Streams a CscMatrix column by column."""

    def __init__(self, rows: int, cols: int, capacity: int):
        super().__init__(cols, rows, capacity)
        self.rows = rows
        self.cols = cols

    def finalize_col(self) -> None:
        self.finalize()

    def finish(self) -> CscMatrix:
        ptr, idx, val = self._finished_arrays()
        return CscMatrix(self.rows, self.cols, ptr, idx, val)


def validate_csr(m: CsrMatrix) -> None:
    """Debug check of every CsrMatrix invariant. Never called by the kernels."""
    _validate_compressed(m.rows, m.cols, m.row_ptr, m.col_idx, m.values, "row")


def validate_csc(m: CscMatrix) -> None:
    """Debug check of every CscMatrix invariant. Never called by the kernels."""
    _validate_compressed(m.cols, m.rows, m.col_ptr, m.row_idx, m.values, "column")


def _validate_compressed(n_major, n_minor, ptr, idx, val, major_name) -> None:
    if ptr.dtype != INDEX_DTYPE or idx.dtype != INDEX_DTYPE:
        raise ValidationError("index arrays must be 64-bit unsigned integers")
    if val.dtype != VALUE_DTYPE:
        raise ValidationError("values must be IEEE-754 doubles")
    if len(ptr) != n_major + 1:
        raise ValidationError(f"pointer array has length {len(ptr)}, expected {n_major + 1}")
    if ptr[0] != 0:
        raise ValidationError("pointer array must start at 0")
    if len(idx) != len(val):
        raise ValidationError("index and value arrays differ in length")
    if int(ptr[-1]) != len(idx):
        raise ValidationError(
            f"pointer array ends at {int(ptr[-1])} but {len(idx)} entries are stored"
        )
    p = ptr.tolist()
    ix = idx.tolist()
    for major in range(n_major):
        lo, hi = p[major], p[major + 1]
        if hi < lo:
            raise ValidationError(f"pointer array decreases at {major_name} {major}")
        prev = -1
        for pos in range(lo, hi):
            i = ix[pos]
            if i >= n_minor:
                raise ValidationError(
                    f"index {i} out of range in {major_name} {major}"
                )
            if i <= prev:
                raise ValidationError(
                    f"indices not strictly increasing in {major_name} {major}"
                )
            prev = i


def estimate_nnz(a: CsrMatrix, b: CsrMatrix) -> int:
    """Upper bound on nnz(a @ b): the number of scalar multiplications.

    Sums, over every stored entry of ``a`` with column k, the nonzero count
    of row k of ``b``. Each multiplication lands on a result slot at most
    once as a fresh entry, so this never underestimates the result's nnz.
    O(nnz(a)) using pointer differences of ``b``.
    """
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} (cols of a) != {b.rows} (rows of b)")
    if a.nnz == 0:
        return 0
    row_nnz_b = np.diff(b.row_ptr)
    return int(row_nnz_b[a.col_idx.astype(np.intp)].sum())


def estimate_nnz_csc(a: CscMatrix, b: CscMatrix) -> int:
    """Column-major mirror of estimate_nnz."""
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} (cols of a) != {b.rows} (rows of b)")
    if b.nnz == 0:
        return 0
    col_nnz_a = np.diff(a.col_ptr)
    return int(col_nnz_a[b.row_idx.astype(np.intp)].sum())


def csr_to_csc(a: CsrMatrix) -> CscMatrix:
    """Convert storage order by counting per column, prefix summing, then a
    stable scatter over the entries in row-major order. O(nnz + cols).
    """
    counts = np.bincount(a.col_idx.astype(np.intp), minlength=a.cols)
    col_ptr = np.zeros(a.cols + 1, dtype=INDEX_DTYPE)
    np.cumsum(counts, out=col_ptr[1:])
    nnz = a.nnz
    out_idx = [0] * nnz
    out_val = [0.0] * nnz
    next_slot = col_ptr[:-1].tolist()
    ptr = a.row_ptr.tolist()
    idx = a.col_idx.tolist()
    val = a.values.tolist()
    for r in range(a.rows):
        for pos in range(ptr[r], ptr[r + 1]):
            c = idx[pos]
            slot = next_slot[c]
            next_slot[c] = slot + 1
            out_idx[slot] = r
            out_val[slot] = val[pos]
    return CscMatrix(
        a.rows,
        a.cols,
        col_ptr,
        np.asarray(out_idx, dtype=INDEX_DTYPE),
        np.asarray(out_val, dtype=VALUE_DTYPE),
    )


def csc_to_csr(a: CscMatrix) -> CsrMatrix:
    """Mirror of csr_to_csc."""
    counts = np.bincount(a.row_idx.astype(np.intp), minlength=a.rows)
    row_ptr = np.zeros(a.rows + 1, dtype=INDEX_DTYPE)
    np.cumsum(counts, out=row_ptr[1:])
    nnz = a.nnz
    out_idx = [0] * nnz
    out_val = [0.0] * nnz
    next_slot = row_ptr[:-1].tolist()
    ptr = a.col_ptr.tolist()
    idx = a.row_idx.tolist()
    val = a.values.tolist()
    for c in range(a.cols):
        for pos in range(ptr[c], ptr[c + 1]):
            r = idx[pos]
            slot = next_slot[r]
            next_slot[r] = slot + 1
            out_idx[slot] = c
            out_val[slot] = val[pos]
    return CsrMatrix(
        a.rows,
        a.cols,
        row_ptr,
        np.asarray(out_idx, dtype=INDEX_DTYPE),
        np.asarray(out_val, dtype=VALUE_DTYPE),
    )

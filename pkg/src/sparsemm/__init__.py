"""Sparse matrix-matrix multiplication kernels, result-storing strategies,
matrix generators, a bandwidth-based performance model and a benchmark
harness."""

from .formats import (
    BuilderError,
    CapacityError,
    CscBuilder,
    CscMatrix,
    CsrBuilder,
    CsrMatrix,
    OrderingError,
    ValidationError,
    csc_to_csr,
    csr_to_csc,
    estimate_nnz,
    estimate_nnz_csc,
    validate_csc,
    validate_csr,
)
from .genmat import (
    GenSpec,
    SplitMix64,
    fill_row_count,
    gen_fd,
    gen_fill_ratio,
    gen_random_k,
    generate,
)
from .kernels import (
    KernelStats,
    RowAccumulator,
    StrategyKind,
    combined_select,
    dense_multiply_reference,
    multiply_classic,
    multiply_colmajor,
    multiply_mixed,
    multiply_rowmajor,
    store_row,
)
from .mtxio import load_matrix_market, save_matrix_market
from .perfmodel import (
    FlopCount,
    InnerLoopTraffic,
    RooflineParams,
    count_mults,
    count_mults_via_columns,
    inner_loop_balance,
    roofline,
)

__version__ = "0.1.0"

__all__ = [
    "BuilderError",
    "CapacityError",
    "CscBuilder",
    "CscMatrix",
    "CsrBuilder",
    "CsrMatrix",
    "FlopCount",
    "GenSpec",
    "InnerLoopTraffic",
    "KernelStats",
    "OrderingError",
    "RooflineParams",
    "RowAccumulator",
    "SplitMix64",
    "StrategyKind",
    "ValidationError",
    "combined_select",
    "count_mults",
    "count_mults_via_columns",
    "csc_to_csr",
    "csr_to_csc",
    "dense_multiply_reference",
    "estimate_nnz",
    "estimate_nnz_csc",
    "fill_row_count",
    "gen_fd",
    "gen_fill_ratio",
    "gen_random_k",
    "generate",
    "inner_loop_balance",
    "load_matrix_market",
    "multiply_classic",
    "multiply_colmajor",
    "multiply_mixed",
    "multiply_rowmajor",
    "roofline",
    "save_matrix_market",
    "store_row",
    "validate_csc",
    "validate_csr",
]

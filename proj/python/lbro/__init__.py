"""Lanczos bidiagonalization with reorthogonalization and backward-error diagnostics."""

from ._core import (
    ConvergenceError,
    DimensionError,
    Factorization,
    InvalidInput,
    LinearOperator,
    ReorthPolicy,
    StateError,
    bidiag_svd,
    bidiagonalize,
    compute_Xk,
    corpus_names,
    corpus_substitute,
    exact_equivalence_residual,
    load_mtx,
    lsqr,
    orthogonality_level,
    section5_matrix,
    section5_singular_values,
    structure_report,
    table2,
    trace,
)

__all__ = [
    "ConvergenceError",
    "DimensionError",
    "Factorization",
    "InvalidInput",
    "LinearOperator",
    "ReorthPolicy",
    "StateError",
    "bidiag_svd",
    "bidiagonalize",
    "compute_Xk",
    "corpus_names",
    "corpus_substitute",
    "exact_equivalence_residual",
    "load_mtx",
    "lsqr",
    "orthogonality_level",
    "section5_matrix",
    "section5_singular_values",
    "structure_report",
    "table2",
    "trace",
]

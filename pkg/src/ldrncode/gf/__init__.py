"""Finite-field arithmetic and dense matrix kernels."""

from ._backend import BACKEND
from .field import Field, FieldError, field_arith, field_create, is_irreducible, smallest_irreducible
from .matrix import (
    Matrix,
    MatrixError,
    det_array,
    inverse_array,
    mat_inverse,
    mat_mul,
    mat_rank,
    mat_solve,
    mat_submatrix,
    matmul_array,
    matvec,
    rank_array,
    solve_array,
)

__all__ = [
    "BACKEND",
    "Field",
    "FieldError",
    "Matrix",
    "MatrixError",
    "det_array",
    "field_arith",
    "field_create",
    "inverse_array",
    "is_irreducible",
    "mat_inverse",
    "mat_mul",
    "mat_rank",
    "mat_solve",
    "mat_submatrix",
    "matmul_array",
    "matvec",
    "rank_array",
    "smallest_irreducible",
    "solve_array",
]

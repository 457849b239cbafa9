"""Dense matrices over a :class:`Field` with optional symbolic row/column labels."""

from __future__ import annotations

from typing import Hashable, Sequence

import numpy as np

from ._backend import kernels
from .field import MODE_GENERIC, MODE_PRIME, Field


class MatrixError(ValueError):
    pass


def _as_int64(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if a.ndim != 2:
        raise MatrixError(f"expected a 2-d array, got shape {a.shape}")
    return a


# ---------------------------------------------------------------------------
# array-level kernels


def _eliminate_generic(a, ncols, field: Field, pivots):
    rows, cols = a.shape
    r, det, swaps = 0, 1, 0
    for c in range(ncols):
        if r >= rows:
            break
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
            swaps += 1
        pv = int(a[r, c])
        det = field.mul(det, pv)
        iv = field.inv(pv)
        for j in range(c, cols):
            a[r, j] = field.mul(iv, int(a[r, j]))
        for i in range(rows):
            f = int(a[i, c])
            if i == r or f == 0:
                continue
            for j in range(c, cols):
                a[i, j] = field.sub(int(a[i, j]), field.mul(f, int(a[r, j])))
        pivots[r] = c
        r += 1
    return r, det, swaps


def eliminate(field: Field, a: np.ndarray, ncols: int | None = None):
    """Gauss-Jordan reduce a copy of ``a``.

    Returns ``(reduced, rank, pivot_columns, det_product, swaps)``.
    """
    work = np.array(a, dtype=np.int64, order="C", copy=True)
    if work.ndim != 2:
        raise MatrixError("eliminate expects a 2-d array")
    if ncols is None:
        ncols = work.shape[1]
    pivots = np.zeros(max(min(work.shape[0], ncols), 1), dtype=np.int64)
    if work.size == 0:
        return work, 0, [], 1, 0
    if field.mode == MODE_GENERIC:
        rank, det, swaps = _eliminate_generic(work, ncols, field, pivots)
    else:
        mode, p, addt, mult, negt, invt = field.kernel_tables()
        rank, det, swaps = kernels.eliminate(work, ncols, mode, p, addt, mult, negt, invt, pivots)
    return work, int(rank), [int(c) for c in pivots[:rank]], int(det), int(swaps)


def rank_array(field: Field, a) -> int:
    a = np.asarray(a, dtype=np.int64)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        return 0
    return eliminate(field, a)[1]


def det_array(field: Field, a) -> int:
    a = _as_int64(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise MatrixError("determinant of a non-square matrix")
    if n == 0:
        return 1
    _, rank, _, det, swaps = eliminate(field, a)
    if rank < n:
        return 0
    return field.neg(det) if swaps % 2 else det


def inverse_array(field: Field, a) -> np.ndarray | None:
    """Inverse of a square array, or ``None`` when singular."""
    a = _as_int64(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise MatrixError(f"inverse of a non-square {a.shape[0]}x{a.shape[1]} matrix")
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    aug = np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1)
    red, rank, _, _, _ = eliminate(field, aug, n)
    if rank < n:
        return None
    return np.ascontiguousarray(red[:, n:])


def solve_array(field: Field, a, b) -> np.ndarray | None:
    """One solution ``x`` of ``a x = b`` (free variables set to 0), or ``None``."""
    a = _as_int64(a)
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    if b.shape[0] != a.shape[0]:
        raise MatrixError("right-hand side row count does not match")
    n = a.shape[1]
    aug = np.concatenate([a, b], axis=1)
    red, rank, pivots, _, _ = eliminate(field, aug, n)
    if np.any(red[rank:, n:]):
        return None
    x = np.zeros((n, b.shape[1]), dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = red[r, n:]
    return x[:, 0] if vec else x


def matmul_array(field: Field, a, b) -> np.ndarray:
    a = np.ascontiguousarray(_as_int64(a))
    b = np.ascontiguousarray(_as_int64(b))
    if a.shape[1] != b.shape[0]:
        raise MatrixError(f"dimension mismatch: {a.shape} x {b.shape}")
    if field.mode == MODE_GENERIC:
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        for t in range(a.shape[1]):
            out = field.vadd(out, field.vmul(a[:, t, None], b[None, t, :]))
        return out
    if field.mode == MODE_PRIME and a.shape[1] * (field.p - 1) ** 2 < (1 << 62):
        return (a @ b) % field.p  # integer product cannot overflow; faster than the kernel loop
    mode, p, addt, mult, _, _ = field.kernel_tables()
    return np.asarray(kernels.matmul(a, b, mode, p, addt, mult), dtype=np.int64)


def matvec(field: Field, a, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return matmul_array(field, a, x.reshape(-1, 1))[:, 0]


# ---------------------------------------------------------------------------


class Matrix:
    """Immutable dense matrix over ``field``.

    Labels, when present, are hashable row/column identifiers used by
    :meth:`submatrix`.
    """

    __slots__ = ("field", "data", "row_labels", "col_labels", "_rix", "_cix")

    def __init__(
        self,
        field: Field,
        data,
        row_labels: Sequence[Hashable] | None = None,
        col_labels: Sequence[Hashable] | None = None,
    ):
        arr = np.array(data, dtype=np.int64)
        if arr.size == 0 and arr.ndim != 2:
            arr = arr.reshape(len(row_labels or ()), len(col_labels or ()))
        arr = _as_int64(arr)
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise MatrixError(f"entries out of range for {field!r}")
        arr.setflags(write=False)
        self.field = field
        self.data = arr
        self.row_labels = self._check_labels(row_labels, arr.shape[0], "row")
        self.col_labels = self._check_labels(col_labels, arr.shape[1], "column")
        self._rix = None
        self._cix = None

    @staticmethod
    def _check_labels(labels, n, what):
        if labels is None:
            return None
        labels = tuple(labels)
        if len(labels) != n:
            raise MatrixError(f"{len(labels)} {what} labels for {n} {what}s")
        if len(set(labels)) != n:
            raise MatrixError(f"duplicate {what} labels")
        return labels

    @classmethod
    def identity(cls, field: Field, n: int, labels=None) -> "Matrix":
        return cls(field, np.eye(n, dtype=np.int64), labels, labels)

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def nrows(self) -> int:
        return self.data.shape[0]

    @property
    def ncols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )

    def __repr__(self):
        return f"Matrix({self.field!r}, {self.data.tolist()})"

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.data.T, self.col_labels, self.row_labels)

    def rank(self) -> int:
        return rank_array(self.field, self.data)

    def det(self) -> int:
        return det_array(self.field, self.data)

    def inverse(self) -> "Matrix | None":
        inv = inverse_array(self.field, self.data)
        if inv is None:
            return None
        return Matrix(self.field, inv, self.col_labels, self.row_labels)

    def solve(self, b) -> np.ndarray | None:
        return solve_array(self.field, self.data, b)

    def row_index(self, label) -> int:
        if self.row_labels is None:
            raise MatrixError("matrix has no row labels")
        if self._rix is None:
            self._rix = {lab: i for i, lab in enumerate(self.row_labels)}
        try:
            return self._rix[label]
        except KeyError:
            raise MatrixError(f"unknown row label {label!r}") from None

    def col_index(self, label) -> int:
        if self.col_labels is None:
            raise MatrixError("matrix has no column labels")
        if self._cix is None:
            self._cix = {lab: i for i, lab in enumerate(self.col_labels)}
        try:
            return self._cix[label]
        except KeyError:
            raise MatrixError(f"unknown column label {label!r}") from None

    def submatrix(self, row_labels, col_labels) -> "Matrix":
        rows = [self.row_index(lab) for lab in row_labels]
        cols = [self.col_index(lab) for lab in col_labels]
        sub = self.data[np.ix_(rows, cols)] if rows and cols else np.zeros((len(rows), len(cols)), dtype=np.int64)
        return Matrix(self.field, sub, list(row_labels), list(col_labels))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.field != b.field:
        raise MatrixError(f"field mismatch: {a.field!r} vs {b.field!r}")
    if a.ncols != b.nrows:
        raise MatrixError(f"dimension mismatch: {a.shape} x {b.shape}")
    return Matrix(a.field, matmul_array(a.field, a.data, b.data), a.row_labels, b.col_labels)


def mat_rank(m: Matrix) -> int:
    return m.rank()


def mat_inverse(m: Matrix) -> Matrix | None:
    return m.inverse()


def mat_solve(a: Matrix, b) -> np.ndarray | None:
    return a.solve(b)


def mat_submatrix(m: Matrix, row_labels, col_labels) -> Matrix:
    return m.submatrix(row_labels, col_labels)

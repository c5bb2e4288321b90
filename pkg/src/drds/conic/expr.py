"""Matrix-shaped affine expressions over the flat variable vector.

An expression of shape (r, c) stores one coefficient row per entry, in
row-major order, plus a constant matrix. Coefficient matrices may be narrower
than the current variable count; missing columns are zero.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp

from drds.conic.svec import lower_indices, svec_operator
from drds.conic.types import VarHandle, VarKind
from drds.types import FloatArray

type Operand = AffineExpr | FloatArray | float
type MatrixLike = FloatArray | sp.spmatrix | sp.sparray


def _pad(coeffs: sp.csr_matrix, width: int) -> sp.csr_matrix:
    if coeffs.shape[1] == width:
        return coeffs
    if coeffs.shape[1] > width:
        raise ValueError(f"expression references {coeffs.shape[1]} variables, only {width} exist")
    padded = sp.csr_matrix(coeffs, copy=True)
    padded.resize((coeffs.shape[0], width))
    return padded


def _as_sparse(M: MatrixLike) -> sp.csr_matrix:
    return sp.csr_matrix(M)


@dataclass(frozen=True)
class AffineExpr:
    coeffs: sp.csr_matrix
    const: FloatArray

    # Defer numpy binary operators to the reflected methods below.
    __array_ufunc__ = None

    def __post_init__(self) -> None:
        if self.const.ndim != 2:
            raise ValueError("constant part must be two-dimensional")
        if self.coeffs.shape[0] != self.const.size:
            raise ValueError("coefficient rows must match the number of entries")

    # -- Construction --------------------------------------------------------

    @classmethod
    def constant(cls, value: FloatArray | float) -> AffineExpr:
        const = np.atleast_2d(np.asarray(value, dtype=float))
        return cls(sp.csr_matrix((const.size, 0)), const)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> AffineExpr:
        return cls.constant(np.zeros((rows, cols)))

    @classmethod
    def of(cls, handle: VarHandle) -> AffineExpr:
        """Natural expression for a variable: (1,1), (n,1) or full symmetric (n,n)."""
        if handle.shape.kind is VarKind.SYMMETRIC:
            return cls._symmetric(handle)
        n = handle.size
        coeffs = sp.csr_matrix(
            (np.ones(n), (np.arange(n), handle.offset + np.arange(n))),
            shape=(n, handle.stop),
        )
        return cls(coeffs, np.zeros((n, 1)))

    @classmethod
    def matrix(cls, handle: VarHandle, rows: int, cols: int) -> AffineExpr:
        """View a vector variable as a (rows, cols) matrix filled row by row."""
        if handle.shape.kind is VarKind.SYMMETRIC or rows * cols != handle.size:
            raise ValueError(f"cannot view {handle.shape} as a {rows}x{cols} matrix")
        flat = cls.of(handle)
        return cls(flat.coeffs, np.zeros((rows, cols)))

    @classmethod
    def _symmetric(cls, handle: VarHandle) -> AffineExpr:
        n = handle.shape.dim
        low_rows, low_cols = lower_indices(n)
        scale = np.where(low_rows == low_cols, 1.0, 1.0 / np.sqrt(2.0))
        k = np.arange(low_rows.size)
        off = low_rows != low_cols
        r = np.concatenate([low_rows * n + low_cols, (low_cols * n + low_rows)[off]])
        c = np.concatenate([k, k[off]]) + handle.offset
        v = np.concatenate([scale, scale[off]])
        coeffs = sp.csr_matrix((v, (r, c)), shape=(n * n, handle.stop))
        return cls(coeffs, np.zeros((n, n)))

    # -- Shape ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        rows, cols = self.const.shape
        return int(rows), int(cols)

    @property
    def width(self) -> int:
        return int(self.coeffs.shape[1])

    def padded(self, width: int) -> sp.csr_matrix:
        return _pad(self.coeffs, width)

    # -- Arithmetic ----------------------------------------------------------

    def _lift(self, other: Operand) -> AffineExpr:
        if isinstance(other, AffineExpr):
            return other
        const = np.asarray(other, dtype=float)
        if const.ndim == 0:
            const = np.full(self.shape, float(const))
        elif const.ndim == 1 and const.size == self.shape[0] * self.shape[1]:
            const = const.reshape(self.shape)
        return AffineExpr.constant(const)

    def __add__(self, other: Operand) -> AffineExpr:
        rhs = self._lift(other)
        if rhs.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {rhs.shape}")
        width = max(self.width, rhs.width)
        return AffineExpr(self.padded(width) + rhs.padded(width), self.const + rhs.const)

    def __radd__(self, other: Operand) -> AffineExpr:
        return self + other

    def __neg__(self) -> AffineExpr:
        return AffineExpr(-self.coeffs, -self.const)

    def __sub__(self, other: Operand) -> AffineExpr:
        return self + (-self._lift(other))

    def __rsub__(self, other: Operand) -> AffineExpr:
        return self._lift(other) + (-self)

    def __mul__(self, scalar: float) -> AffineExpr:
        return AffineExpr(self.coeffs * float(scalar), self.const * float(scalar))

    def __rmul__(self, scalar: float) -> AffineExpr:
        return self * scalar

    def __matmul__(self, Q: MatrixLike) -> AffineExpr:
        return self.rmul(Q)

    def __rmatmul__(self, P: MatrixLike) -> AffineExpr:
        return self.lmul(P)

    def lmul(self, P: MatrixLike) -> AffineExpr:
        """P @ self for a constant matrix P."""
        rows, cols = self.shape
        P_sparse = _as_sparse(P)
        if P_sparse.shape[1] != rows:
            raise ValueError(f"cannot left-multiply {self.shape} by {P_sparse.shape}")
        lift = sp.kron(P_sparse, sp.identity(cols, format="csr"), format="csr")
        const = np.asarray(P_sparse @ self.const)
        return AffineExpr(sp.csr_matrix(lift @ self.coeffs), const)

    def rmul(self, Q: MatrixLike) -> AffineExpr:
        """self @ Q for a constant matrix Q."""
        rows, cols = self.shape
        Q_sparse = _as_sparse(Q)
        if Q_sparse.shape[0] != cols:
            raise ValueError(f"cannot right-multiply {self.shape} by {Q_sparse.shape}")
        lift = sp.kron(sp.identity(rows, format="csr"), Q_sparse.T, format="csr")
        const = np.asarray((Q_sparse.T @ self.const.T).T)
        return AffineExpr(sp.csr_matrix(lift @ self.coeffs), const)

    @property
    def T(self) -> AffineExpr:  # noqa: N802
        rows, cols = self.shape
        perm = (np.arange(rows)[None, :] * cols + np.arange(cols)[:, None]).ravel()
        return AffineExpr(self.coeffs[perm], np.ascontiguousarray(self.const.T))

    def scale_matrix(self, M: FloatArray) -> AffineExpr:
        """Entrywise ``self * M`` for a scalar expression and constant matrix M."""
        if self.shape != (1, 1):
            raise ValueError("scale_matrix needs a scalar expression")
        M = np.atleast_2d(np.asarray(M, dtype=float))
        column = sp.csr_matrix(M.reshape(-1, 1))
        return AffineExpr(sp.kron(column, self.coeffs, format="csr"), M * self.const[0, 0])

    # -- Selection and layout -------------------------------------------------

    def block(self, rows: slice | Sequence[int], cols: slice | Sequence[int]) -> AffineExpr:
        n_rows, n_cols = self.shape
        row_idx = np.arange(n_rows)[rows]
        col_idx = np.arange(n_cols)[cols]
        flat = (row_idx[:, None] * n_cols + col_idx[None, :]).ravel()
        return AffineExpr(self.coeffs[flat], self.const[np.ix_(row_idx, col_idx)])

    def flatten(self) -> AffineExpr:
        """Column vector of all entries in row-major order."""
        return AffineExpr(self.coeffs, self.const.reshape(-1, 1))

    def svec(self) -> AffineExpr:
        """Scaled lower-triangular vectorisation of the symmetric part."""
        rows, cols = self.shape
        if rows != cols:
            raise ValueError(f"svec needs a square expression, got {self.shape}")
        S = svec_operator(rows)
        const = np.asarray(S @ self.const.reshape(-1)).reshape(-1, 1)
        return AffineExpr(sp.csr_matrix(S @ self.coeffs), const)

    def sum(self) -> AffineExpr:
        rows, cols = self.shape
        return self.flatten().lmul(np.ones((1, rows * cols)))

    def trace(self) -> AffineExpr:
        rows, cols = self.shape
        if rows != cols:
            raise ValueError("trace needs a square expression")
        diag = np.arange(rows) * (cols + 1)
        picker = sp.csr_matrix((np.ones(rows), (np.zeros(rows), diag)), shape=(1, rows * cols))
        return AffineExpr(sp.csr_matrix(picker @ self.coeffs), np.array([[np.trace(self.const)]]))

    @staticmethod
    def bmat(grid: Sequence[Sequence[AffineExpr | FloatArray | None]]) -> AffineExpr:
        """Assemble a block matrix; ``None`` entries are zero blocks."""
        heights = [_block_height(row) for row in grid]
        widths = [_block_width(grid, j) for j in range(len(grid[0]))]
        total_rows, total_cols = sum(heights), sum(widths)
        width = max(
            (entry.width for row in grid for entry in row if isinstance(entry, AffineExpr)),
            default=0,
        )

        const = np.zeros((total_rows, total_cols))
        row_parts: list[np.ndarray[Any, Any]] = []
        col_parts: list[np.ndarray[Any, Any]] = []
        data_parts: list[np.ndarray[Any, Any]] = []
        r0 = 0
        for i, row in enumerate(grid):
            c0 = 0
            for j, entry in enumerate(row):
                h, w = heights[i], widths[j]
                if entry is not None:
                    expr = entry if isinstance(entry, AffineExpr) else AffineExpr.constant(entry)
                    if expr.shape != (h, w):
                        raise ValueError(f"block ({i},{j}) has shape {expr.shape}, want {(h, w)}")
                    const[r0 : r0 + h, c0 : c0 + w] = expr.const
                    target = ((r0 + np.arange(h))[:, None] * total_cols + c0 + np.arange(w)).ravel()
                    coo = expr.coeffs.tocoo()
                    row_parts.append(target[coo.row])
                    col_parts.append(coo.col)
                    data_parts.append(coo.data)
                c0 += w
            r0 += heights[i]

        if data_parts:
            coeffs = sp.csr_matrix(
                (
                    np.concatenate(data_parts),
                    (np.concatenate(row_parts), np.concatenate(col_parts)),
                ),
                shape=(total_rows * total_cols, width),
            )
        else:
            coeffs = sp.csr_matrix((total_rows * total_cols, width))
        return AffineExpr(coeffs, const)

    @staticmethod
    def vstack(parts: Sequence[AffineExpr | FloatArray]) -> AffineExpr:
        return AffineExpr.bmat([[part] for part in parts])

    # -- Evaluation ----------------------------------------------------------

    def value(self, x: FloatArray) -> FloatArray:
        x = np.asarray(x, dtype=float)
        flat = self.coeffs @ x[: self.width] if self.width else np.zeros(self.const.size)
        out: FloatArray = np.asarray(flat).reshape(self.shape) + self.const
        return out


def _block_height(row: Sequence[AffineExpr | FloatArray | None]) -> int:
    for entry in row:
        if entry is not None:
            return _shape_of(entry)[0]
    raise ValueError("block row has no sized entry")


def _block_width(grid: Sequence[Sequence[AffineExpr | FloatArray | None]], j: int) -> int:
    for row in grid:
        if row[j] is not None:
            return _shape_of(row[j])[1]
    raise ValueError(f"block column {j} has no sized entry")


def _shape_of(entry: AffineExpr | FloatArray | None) -> tuple[int, int]:
    if isinstance(entry, AffineExpr):
        return entry.shape
    arr = np.atleast_2d(np.asarray(entry, dtype=float))
    return int(arr.shape[0]), int(arr.shape[1])

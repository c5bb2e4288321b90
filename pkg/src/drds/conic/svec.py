"""Scaled lower-triangular vectorisation of symmetric matrices.

Entries are taken column by column from the lower triangle, off-diagonals
multiplied by √2, so that ``svec(A) @ svec(B) == trace(A @ B)``.
"""

from __future__ import annotations

from functools import cache

import numpy as np
import scipy.sparse as sp

from drds.types import FloatArray, IntArray

SQRT2 = float(np.sqrt(2.0))


def tri_dim(rows: int) -> int | None:
    """Matrix order n with n(n+1)/2 == rows, or None when rows is not triangular."""
    n = int(round((np.sqrt(8 * rows + 1) - 1) / 2))
    return n if n >= 1 and n * (n + 1) // 2 == rows else None


@cache
def lower_indices(n: int) -> tuple[IntArray, IntArray]:
    """Row and column indices of the lower triangle in svec order."""
    cols, rows = np.triu_indices(n)
    return rows.astype(np.int64), cols.astype(np.int64)


@cache
def svec_operator(n: int) -> sp.csr_matrix:
    """Sparse S with ``S @ vec(M) == svec((M + Mᵀ)/2)`` for row-major vec."""
    rows, cols = lower_indices(n)
    k = np.arange(rows.size)
    diag = rows == cols
    data = np.where(diag, 1.0, 1.0 / SQRT2)
    r = np.concatenate([k, k[~diag]])
    c = np.concatenate([rows * n + cols, (cols * n + rows)[~diag]])
    v = np.concatenate([data, data[~diag]])
    return sp.csr_matrix((v, (r, c)), shape=(rows.size, n * n))


@cache
def upper_permutation(n: int) -> IntArray:
    """Positions of svec entries in column-major upper-triangular order."""
    lower_rows, lower_cols = lower_indices(n)
    position = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(lower_rows, lower_cols))}
    perm = [position[(j, i)] for j in range(n) for i in range(j + 1)]
    return np.asarray(perm, dtype=np.int64)


def svec(M: FloatArray, tol: float = 1e-12) -> FloatArray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"svec needs a square matrix, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=0.0, atol=tol * max(1.0, float(np.abs(M).max()))):
        raise ValueError("svec needs a symmetric matrix")
    rows, cols = lower_indices(M.shape[0])
    out: FloatArray = M[rows, cols] * np.where(rows == cols, 1.0, SQRT2)
    return out


def smat(v: FloatArray) -> FloatArray:
    v = np.asarray(v, dtype=float).ravel()
    n = tri_dim(v.size)
    if n is None:
        raise ValueError(f"smat needs a triangular number of entries, got {v.size}")
    rows, cols = lower_indices(n)
    M = np.zeros((n, n))
    scaled = v * np.where(rows == cols, 1.0, 1.0 / SQRT2)
    M[rows, cols] = scaled
    M[cols, rows] = scaled
    return M

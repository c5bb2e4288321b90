"""Symmetric-matrix helpers shared by the ambiguity, steering and noise packages."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from drds.types import FloatArray

EIG_CLIP = 1e-12
PSD_TOL = 1e-10


def symmetrize(M: FloatArray) -> FloatArray:
    return 0.5 * (M + M.T)


def require_symmetric(M: FloatArray, name: str, tol: float = 1e-10) -> FloatArray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if not np.allclose(M, M.T, rtol=0.0, atol=tol * scale):
        raise ValueError(f"{name} must be symmetric")
    return symmetrize(M)


def require_psd(M: FloatArray, name: str, tol: float = PSD_TOL) -> FloatArray:
    M = require_symmetric(M, name)
    if M.size and float(np.linalg.eigvalsh(M)[0]) < -tol * max(1.0, float(np.abs(M).max())):
        raise ValueError(f"{name} must be positive semidefinite")
    return M


def require_pd(M: FloatArray, name: str) -> FloatArray:
    M = require_symmetric(M, name)
    if M.size == 0 or float(np.linalg.eigvalsh(M)[0]) <= 0.0:
        raise ValueError(f"{name} must be positive definite")
    return M


def sqrtm_psd(M: FloatArray) -> FloatArray:
    """Symmetric square root with eigenvalues below ``EIG_CLIP`` set to zero."""
    eigvals, eigvecs = np.linalg.eigh(symmetrize(M))
    eigvals = np.where(eigvals < EIG_CLIP, 0.0, eigvals)
    root: FloatArray = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return symmetrize(root)


def project_psd(M: FloatArray) -> tuple[FloatArray, float]:
    """Nearest PSD matrix in Frobenius norm and the largest clipped eigenvalue magnitude."""
    eigvals, eigvecs = np.linalg.eigh(symmetrize(M))
    clipped = float(max(0.0, -float(eigvals.min()))) if eigvals.size else 0.0
    eigvals = np.clip(eigvals, 0.0, None)
    projected: FloatArray = (eigvecs * eigvals) @ eigvecs.T
    return symmetrize(projected), clipped


def psd_factor(M: FloatArray) -> FloatArray:
    """Factor C with C Cᵀ = M for a PSD M, robust to singular M."""
    eigvals, eigvecs = np.linalg.eigh(symmetrize(M))
    factor: FloatArray = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    return factor


def sigma_max(M: FloatArray) -> float:
    if M.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(M)[0])


def max_eig(M: FloatArray) -> float:
    return float(np.linalg.eigvalsh(symmetrize(M))[-1])


def blkdiag(*blocks: FloatArray) -> FloatArray:
    out: FloatArray = scipy.linalg.block_diag(*blocks)
    return out

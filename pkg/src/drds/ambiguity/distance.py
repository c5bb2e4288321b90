from __future__ import annotations

import numpy as np

from drds.ambiguity.types import GaussianMoments
from drds.types import FloatArray
from drds.util.linalg import EIG_CLIP, sqrtm_psd, symmetrize


def gelbrich_distance(p: GaussianMoments, q: GaussianMoments) -> float:
    """Gelbrich distance between two mean-covariance pairs.

    √(‖μ₁−μ₂‖² + tr[Σ₁ + Σ₂ − 2(Σ₁^½ Σ₂ Σ₁^½)^½])
    """
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    root_p = sqrtm_psd(p.cov)
    cross = np.linalg.eigvalsh(symmetrize(root_p @ q.cov @ root_p))
    cross_trace = float(np.sqrt(np.where(cross < EIG_CLIP, 0.0, cross)).sum())
    mean_gap = float(np.sum((p.mean - q.mean) ** 2))
    squared = mean_gap + float(np.trace(p.cov) + np.trace(q.cov)) - 2.0 * cross_trace
    return float(np.sqrt(max(squared, 0.0)))


def gaussian_w2(p: GaussianMoments, q: GaussianMoments) -> float:
    """Type-2 Wasserstein distance between N(p) and N(q); Gaussians attain the Gelbrich bound."""
    return gelbrich_distance(p, q)


def gaussian_pushforward(A: FloatArray, moments: GaussianMoments) -> GaussianMoments:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != moments.dim:
        raise ValueError(f"map has {A.shape[1]} columns, moments have dimension {moments.dim}")
    return GaussianMoments(mean=A @ moments.mean, cov=symmetrize(A @ moments.cov @ A.T))

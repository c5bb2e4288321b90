from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from drds.types import FloatArray
from drds.util.linalg import require_psd


class CostMetric(StrEnum):
    EUCLIDEAN_W2 = "euclidean_w2"
    # Transport cost composed with the pseudo-inverse of a pushforward map.
    PSEUDO_INVERSE = "pseudo_inverse"


class RadiusMode(StrEnum):
    PAPER_EXACT = "paper"
    OPERATOR_NORM = "opnorm"


class StructuralSet(StrEnum):
    """Structural information assumed about the disturbance law.

    Only the unrestricted set of finite-second-moment distributions is
    supported; no shape, support or symmetry information is exploited.
    """

    ALL_FINITE_SECOND_MOMENT = "all_finite_second_moment"


@dataclass(frozen=True, eq=False)
class GaussianMoments:
    mean: FloatArray
    cov: FloatArray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = require_psd(np.atleast_2d(np.asarray(self.cov, dtype=float)), "covariance")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance shape {cov.shape} does not match mean length {mean.size}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def zero_mean(cls, cov: FloatArray) -> GaussianMoments:
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        return cls(mean=np.zeros(cov.shape[0]), cov=cov)

    @property
    def dim(self) -> int:
        return int(self.mean.size)


@dataclass(frozen=True, eq=False)
class AmbiguitySpec:
    """Gelbrich ball of *radius* around *center* under *metric*."""

    center: GaussianMoments
    radius: float
    metric: CostMetric = CostMetric.EUCLIDEAN_W2
    transform: FloatArray | None = None
    structure: StructuralSet = field(default=StructuralSet.ALL_FINITE_SECOND_MOMENT)

    def __post_init__(self) -> None:
        if not np.isfinite(self.radius) or self.radius < 0:
            raise ValueError(f"ambiguity radius must be >= 0, got {self.radius}")
        if self.metric is CostMetric.PSEUDO_INVERSE and self.transform is None:
            raise ValueError("pseudo-inverse cost needs the pushforward map")

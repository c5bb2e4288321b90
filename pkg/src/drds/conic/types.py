from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import scipy.sparse as sp

from drds.conic.backend.types import BackendType
from drds.types import FloatArray


class ConeKind(StrEnum):
    ZERO = "zero"
    NONNEG = "nonneg"
    SECOND_ORDER = "soc"
    PSD = "psd"


class VarKind(StrEnum):
    SCALAR = "scalar"
    VECTOR = "vector"
    SYMMETRIC = "symmetric"


class SolveStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class VarShape:
    kind: VarKind
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"variable dimension must be >= 1, got {self.dim}")
        if self.kind is VarKind.SCALAR and self.dim != 1:
            raise ValueError("scalar variables have dimension 1")

    @classmethod
    def scalar(cls) -> VarShape:
        return cls(VarKind.SCALAR)

    @classmethod
    def vector(cls, n: int) -> VarShape:
        return cls(VarKind.VECTOR, n)

    @classmethod
    def symmetric(cls, n: int) -> VarShape:
        return cls(VarKind.SYMMETRIC, n)

    @property
    def size(self) -> int:
        if self.kind is VarKind.SYMMETRIC:
            return self.dim * (self.dim + 1) // 2
        return self.dim


@dataclass(frozen=True)
class VarHandle:
    offset: int
    shape: VarShape
    name: str = ""

    @property
    def size(self) -> int:
        return self.shape.size

    @property
    def stop(self) -> int:
        return self.offset + self.size

    def take(self, x: FloatArray) -> FloatArray:
        """Slice this variable's entries out of a flat primal vector."""
        return x[self.offset : self.stop]


@dataclass(frozen=True)
class ConeBlock:
    """Rows ``coeffs @ x + const`` constrained to lie in the cone ``kind``."""

    kind: ConeKind
    coeffs: sp.csr_matrix
    const: FloatArray
    label: str = ""

    @property
    def rows(self) -> int:
        return int(self.const.shape[0])

    @property
    def psd_dim(self) -> int:
        return int(round((np.sqrt(8 * self.rows + 1) - 1) / 2))


@dataclass
class SolverSettings:
    backend: BackendType = BackendType.CLARABEL
    tol_feas: float = 1e-8
    tol_gap: float = 1e-8
    max_iter: int | None = None
    verify_factor: float = 10.0
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.tol_feas <= 0 or self.tol_gap <= 0:
            raise ValueError("solver tolerances must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class Solution:
    status: SolveStatus
    primal: FloatArray
    objective: float
    backend: str = ""
    iterations: int | None = None
    solve_time: float = 0.0
    max_violation: float = field(default=float("nan"), kw_only=True)
    message: str = field(default="", kw_only=True)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

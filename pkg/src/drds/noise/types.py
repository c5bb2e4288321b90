from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from drds.types import FloatArray
from drds.util.linalg import require_psd


class NoiseKind(StrEnum):
    NOMINAL = "nominal"
    MAXIMAL = "maximal"
    STUDENT_T = "student-t"
    CUSTOM = "custom"


class DrydenChannel(StrEnum):
    U = "u_g"
    V = "v_g"
    W = "w_g"
    P = "p_g"
    Q = "q_g"
    R = "r_g"

    @property
    def is_angular(self) -> bool:
        return self in (DrydenChannel.P, DrydenChannel.Q, DrydenChannel.R)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Disturbance law for the stacked noise vector of length N·d."""

    kind: NoiseKind
    base: FloatArray
    seed: int = 0
    radius: float = 0.0
    dof: float | None = None
    custom_cov: FloatArray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", require_psd(self.base, "Sigma_w"))
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        match self.kind:
            case NoiseKind.MAXIMAL if self.radius < 0:
                raise ValueError(f"radius must be >= 0, got {self.radius}")
            case NoiseKind.STUDENT_T if self.dof is None or not self.dof > 2:
                raise ValueError(f"Student-t noise needs dof > 2, got {self.dof}")
            case NoiseKind.CUSTOM if self.custom_cov is None:
                raise ValueError("custom noise needs a covariance")
            case NoiseKind.CUSTOM:
                cov = require_psd(np.asarray(self.custom_cov, dtype=float), "custom covariance")
                if cov.shape != self.base.shape:
                    raise ValueError(
                        f"custom covariance has shape {cov.shape}, expected {self.base.shape}"
                    )
                object.__setattr__(self, "custom_cov", cov)
            case _:
                pass

    @property
    def dim(self) -> int:
        return int(self.base.shape[0])


@dataclass(frozen=True)
class DrydenParams:
    V0: float
    z: float
    b: float
    dt: float
    channels: tuple[DrydenChannel, ...] = (
        DrydenChannel.P,
        DrydenChannel.Q,
        DrydenChannel.R,
        DrydenChannel.U,
        DrydenChannel.V,
        DrydenChannel.W,
    )
    omega_max: float = 200.0
    grid_points: int = 200_001
    # Angular channels enter the attitude as Δt times the rate disturbance.
    scale_angular: bool = True

    def __post_init__(self) -> None:
        for name in ("V0", "z", "b", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.omega_max > 0:
            raise ValueError(f"omega_max must be > 0, got {self.omega_max}")
        if self.grid_points < 2:
            raise ValueError("quadrature needs at least 2 grid points")
        if not self.channels:
            raise ValueError("at least one Dryden channel is required")

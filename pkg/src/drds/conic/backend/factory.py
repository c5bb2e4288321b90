from drds.conic.backend.backend import AbstractSolverBackend
from drds.conic.backend.config import (
    AbstractBackendConfig,
    ClarabelConfig,
    CvxpyConfig,
    ScsConfig,
)


class BackendFactory:
    # Adapters import their solver package on first use, so a missing optional
    # solver only disables its own backend.
    def from_config(self, config: AbstractBackendConfig) -> AbstractSolverBackend:
        match config:
            case ClarabelConfig():
                from drds.conic.backend.adapters.clarabel import ClarabelBackend

                return ClarabelBackend(config)
            case ScsConfig():
                from drds.conic.backend.adapters.scs import ScsBackend

                return ScsBackend(config)
            case CvxpyConfig():
                from drds.conic.backend.adapters.cvxpy import CvxpyBackend

                return CvxpyBackend(config)
            case _:
                raise ValueError(f"Unknown backend config class: {config}")

from abc import ABC, abstractmethod
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypedDict

import structlog

from drds.conic.backend.types import BackendType
from drds.util import PROJECT_ROOT, load_yaml_config

_logger = structlog.get_logger()
_DEFAULT_CONFIG = PROJECT_ROOT / "config" / "solvers.yaml"
_PACKAGED_DEFAULTS: dict[str, Any] = {
    "clarabel": {},
    "scs": {},
    "cvxpy": {"solver": "CLARABEL"},
}


class _CommonConfig(TypedDict):
    max_iter: int
    verbose: bool


@dataclass
class AbstractBackendConfig(ABC):
    max_iter: int
    verbose: bool = field(default=False, kw_only=True)

    @classmethod
    def _read_common_config(
        cls, yaml_config: dict[str, Any], default_max_iter: int
    ) -> _CommonConfig:
        """
        Helper: Read fields shared by every backend.

        Returns dict that can be unpacked with ** into subclass constructors.
        """
        max_iter = int(yaml_config.get("max_iter", default_max_iter))
        if max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        return _CommonConfig(max_iter=max_iter, verbose=bool(yaml_config.get("verbose", False)))

    @classmethod
    @abstractmethod
    def from_yaml(cls, config: dict[str, Any]) -> "AbstractBackendConfig":
        """Factory method: Create config from resolved YAML dict"""
        ...


@dataclass
class ClarabelConfig(AbstractBackendConfig):
    equilibrate: bool = True
    direct_solve_method: str = "qdldl"

    @classmethod
    def from_yaml(cls, config: dict[str, Any]) -> "ClarabelConfig":
        common = cls._read_common_config(config, default_max_iter=200)
        return cls(
            equilibrate=bool(config.get("equilibrate", True)),
            direct_solve_method=str(config.get("direct_solve_method", "qdldl")),
            **common,
        )


@dataclass
class ScsConfig(AbstractBackendConfig):
    acceleration_lookback: int = 10
    normalize: bool = True
    scale: float = 0.1

    @classmethod
    def from_yaml(cls, config: dict[str, Any]) -> "ScsConfig":
        common = cls._read_common_config(config, default_max_iter=100_000)
        scale = float(config.get("scale", 0.1))
        if scale <= 0:
            raise ValueError("scs.scale must be positive")
        return cls(
            acceleration_lookback=int(config.get("acceleration_lookback", 10)),
            normalize=bool(config.get("normalize", True)),
            scale=scale,
            **common,
        )


@dataclass
class CvxpyConfig(AbstractBackendConfig):
    solver: str
    options: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_yaml(cls, config: dict[str, Any]) -> "CvxpyConfig":
        common = cls._read_common_config(config, default_max_iter=10_000)

        solver = str(config.get("solver", "")).upper()
        if not solver:
            raise ValueError("Missing cvxpy.solver")

        options = config.get("options") or {}
        if not isinstance(options, dict):
            raise ValueError("cvxpy.options must be a mapping")
        return cls(solver=solver, options=dict(options), **common)


class BackendConfigGenerator:
    def __init__(self, config_location: Path = _DEFAULT_CONFIG) -> None:
        self.config = load_yaml_config(config_location, defaults=_PACKAGED_DEFAULTS)

    def generate(self) -> Iterator[AbstractBackendConfig]:
        for backend_key, backend_config in self.config.items():
            try:
                match BackendType(backend_key):
                    case BackendType.CLARABEL:
                        yield ClarabelConfig.from_yaml(backend_config or {})
                    case BackendType.SCS:
                        yield ScsConfig.from_yaml(backend_config or {})
                    case BackendType.CVXPY:
                        yield CvxpyConfig.from_yaml(backend_config or {})
            except (ValueError, KeyError, TypeError):
                _logger.warning("backend_skipped", backend=backend_key)

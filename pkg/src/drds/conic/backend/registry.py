from pathlib import Path

import structlog

from drds.conic.backend.backend import AbstractSolverBackend
from drds.conic.backend.config import BackendConfigGenerator
from drds.conic.backend.factory import BackendFactory
from drds.conic.backend.types import BackendType

_logger = structlog.get_logger()


class BackendRegistry:
    """Conic solver backends built from ``config/solvers.yaml``, keyed by type.

    A configured backend whose solver package cannot be imported is logged and left out.
    At least one backend must survive, otherwise no program can be solved.
    """

    def __init__(self, config_location: Path | None = None) -> None:
        self.backends: dict[BackendType, AbstractSolverBackend] = {}
        self._config_location = config_location
        self._build()

    def get(self, backend_type: BackendType) -> AbstractSolverBackend:
        if backend_type not in self.backends:
            available = ", ".join(b.value for b in self.available())
            raise ValueError(
                f"solver backend {backend_type.value} is not registered (available: {available})"
            )
        return self.backends[backend_type]

    def available(self) -> list[BackendType]:
        return sorted(self.backends)

    def _build(self) -> None:
        generator = (
            BackendConfigGenerator(self._config_location)
            if self._config_location is not None
            else BackendConfigGenerator()
        )
        for backend_config in generator.generate():
            try:
                backend = BackendFactory().from_config(backend_config)
                self._register_backend(backend.identify(), backend)
            except (ValueError, ImportError) as e:
                _logger.error(
                    "solver_backend_unavailable",
                    config=type(backend_config).__name__,
                    error=str(e),
                )

        if not self.backends:
            raise ValueError("no conic solver backend could be registered")
        _logger.info(
            "solver_registry_ready",
            backends=[b.value for b in self.available()],
        )

    def _register_backend(self, identifier: BackendType, backend: AbstractSolverBackend) -> None:
        self.backends[identifier] = backend
        _logger.debug("solver_backend_registered", backend=identifier.value)


_backend_registry: BackendRegistry | None = None


def get_backend_registry() -> BackendRegistry:
    global _backend_registry
    if _backend_registry is None:
        _backend_registry = BackendRegistry()
    return _backend_registry

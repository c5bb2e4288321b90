from abc import ABC, abstractmethod

import scipy.sparse as sp

from drds.conic.backend.config import AbstractBackendConfig
from drds.conic.backend.types import BackendType
from drds.conic.problem import ConicProblem
from drds.conic.types import ConeBlock, ConeKind, Solution, SolverSettings
from drds.types import FloatArray


class AbstractSolverBackend(ABC):
    def __init__(self, config: AbstractBackendConfig) -> None:
        self.config = config

    @abstractmethod
    def identify(self) -> BackendType: ...

    @abstractmethod
    def solve(self, problem: ConicProblem, settings: SolverSettings) -> Solution:
        """
        Solve the conic program in one shot.

        Args:
            problem: Program to minimise; not modified.
            settings: Tolerances and iteration cap; ``settings.max_iter`` overrides
                the backend's configured default.

        Returns:
            Solution with a status mapped from the backend's own classification
        """
        ...

    def max_iter(self, settings: SolverSettings) -> int:
        return settings.max_iter if settings.max_iter is not None else self.config.max_iter


def stack_by_kind(
    problem: ConicProblem, order: tuple[ConeKind, ...]
) -> tuple[sp.csc_matrix, FloatArray, list[ConeBlock]]:
    """Rows as ``A x + s = b, s ∈ K`` with blocks grouped in *order*.

    Blocks read ``G x + h ∈ K``, hence ``A = -G`` and ``b = h``.
    """
    blocks = [block for kind in order for block in problem.blocks if block.kind is kind]
    G, h = problem.stacked(blocks)
    return sp.csc_matrix(-G), h, blocks

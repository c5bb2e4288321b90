from __future__ import annotations

import time

import numpy as np
import structlog

from drds.conic.backend.registry import BackendRegistry, get_backend_registry
from drds.conic.problem import ConicProblem
from drds.conic.types import Solution, SolverSettings, SolveStatus
from drds.errors import BackendError

_logger = structlog.get_logger()


def solve(
    problem: ConicProblem,
    settings: SolverSettings | None = None,
    registry: BackendRegistry | None = None,
) -> Solution:
    """Solve *problem* with the configured backend and re-check every cone.

    Backend breakdowns come back as ``NUMERICAL_FAILURE``; an optimal report
    whose re-evaluated cones are violated beyond ``verify_factor`` times the
    feasibility tolerance is downgraded the same way.
    """
    settings = settings or SolverSettings()
    backend = (registry or get_backend_registry()).get(settings.backend)
    _logger.info(
        "conic_solve_starting",
        backend=settings.backend.value,
        problem=problem.name,
        vars=problem.num_vars,
        blocks=len(problem.blocks),
    )

    start = time.perf_counter()
    try:
        solution = backend.solve(problem, settings)
    except (BackendError, ValueError, RuntimeError, ArithmeticError) as e:
        _logger.error("conic_backend_failed", backend=settings.backend.value, error=str(e))
        solution = Solution(
            status=SolveStatus.NUMERICAL_FAILURE,
            primal=np.full(problem.num_vars, np.nan),
            objective=float("nan"),
            backend=settings.backend.value,
            message=str(e),
        )
    solution.solve_time = time.perf_counter() - start

    if solution.is_optimal:
        _verify(problem, solution, settings)

    _logger.info(
        "conic_solve_finished",
        backend=solution.backend,
        status=solution.status.value,
        objective=solution.objective,
        iterations=solution.iterations,
        seconds=round(solution.solve_time, 3),
        max_violation=solution.max_violation,
    )
    return solution


def _verify(problem: ConicProblem, solution: Solution, settings: SolverSettings) -> None:
    violations = problem.cone_violation(solution.primal)
    worst = max(violations, default=0.0)
    solution.max_violation = worst
    limit = settings.verify_factor * settings.tol_feas
    if not np.isfinite(worst) or worst > limit:
        index = int(np.argmax(violations))
        label = problem.blocks[index].label or problem.blocks[index].kind.value
        _logger.warning(
            "conic_solution_rejected",
            block=label,
            violation=worst,
            limit=limit,
        )
        solution.status = SolveStatus.NUMERICAL_FAILURE
        solution.message = f"cone {label} violated by {worst:.3e} (limit {limit:.1e})"

from pathlib import Path
from unittest.mock import MagicMock

import numpy as np
import pytest

from drds.conic import (
    AffineExpr,
    ConeKind,
    ConicProblem,
    Solution,
    SolverSettings,
    SolveStatus,
    VarShape,
    solve,
)
from drds.conic.svec import svec
from drds.errors import BackendError


def _make_problem() -> tuple[ConicProblem, AffineExpr, AffineExpr]:
    """min t subject to t >= ||x||, x0 + x1 = 2."""
    problem = ConicProblem(name="norm")
    t = AffineExpr.of(problem.add_variable(VarShape.scalar(), "t"))
    x = AffineExpr.of(problem.add_variable(VarShape.vector(2), "x"))
    problem.add_cone(ConeKind.SECOND_ORDER, AffineExpr.vstack([t, x]), label="norm")
    problem.add_cone(ConeKind.ZERO, x.sum() - 2.0, label="sum")
    problem.set_objective(t)
    return problem, t, x


def _make_registry(solution: Solution | Exception) -> MagicMock:
    backend = MagicMock()
    if isinstance(solution, Exception):
        backend.solve.side_effect = solution
    else:
        backend.solve.return_value = solution
    registry = MagicMock()
    registry.get.return_value = backend
    return registry


class TestVarShape:
    def test_symmetric_size_is_triangular(self) -> None:
        assert VarShape.symmetric(4).size == 10

    def test_scalar_dimension_fixed(self) -> None:
        with pytest.raises(ValueError, match="dimension 1"):
            VarShape(VarShape.scalar().kind, 2)

    def test_handles_are_contiguous(self) -> None:
        problem = ConicProblem()
        a = problem.add_variable(VarShape.vector(3))
        b = problem.add_variable(VarShape.symmetric(2))

        assert (a.offset, a.stop, b.offset, b.stop) == (0, 3, 3, 6)
        assert problem.num_vars == 6


class TestAffineExpr:
    def test_symmetric_variable_reads_back_matrix(self) -> None:
        problem = ConicProblem()
        handle = problem.add_variable(VarShape.symmetric(3))
        M = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])

        value = AffineExpr.of(handle).value(svec(M))

        np.testing.assert_allclose(value, M)

    def test_matrix_products_and_transpose(self) -> None:
        problem = ConicProblem()
        X = AffineExpr.matrix(problem.add_variable(VarShape.vector(6)), 2, 3)
        x = np.arange(6.0)
        P = np.array([[1.0, -1.0], [2.0, 0.5]])
        Q = np.ones((3, 2))
        X_value = x.reshape(2, 3)

        np.testing.assert_allclose((P @ X).value(x), P @ X_value)
        np.testing.assert_allclose((X @ Q).value(x), X_value @ Q)
        np.testing.assert_allclose(X.T.value(x), X_value.T)

    def test_arithmetic_with_constants(self) -> None:
        problem = ConicProblem()
        x = AffineExpr.of(problem.add_variable(VarShape.vector(2)))
        value = np.array([3.0, -1.0])

        expr = 2.0 * x - np.array([1.0, 1.0]) + 1.0

        np.testing.assert_allclose(expr.value(value).ravel(), 2.0 * value)

    def test_trace_and_scale_matrix(self) -> None:
        problem = ConicProblem()
        s = AffineExpr.of(problem.add_variable(VarShape.scalar()))
        M = np.array([[1.0, 2.0], [3.0, 4.0]])

        scaled = s.scale_matrix(M)

        np.testing.assert_allclose(scaled.value(np.array([2.0])), 2.0 * M)
        assert scaled.trace().value(np.array([2.0]))[0, 0] == pytest.approx(10.0)

    def test_bmat_places_blocks(self) -> None:
        problem = ConicProblem()
        s = AffineExpr.of(problem.add_variable(VarShape.scalar()))

        block = AffineExpr.bmat([[s, np.ones((1, 2))], [None, 2.0 * np.eye(2)]])

        expected = np.array([[5.0, 1.0, 1.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]])
        np.testing.assert_allclose(block.value(np.array([5.0])), expected)

    def test_shape_mismatch_rejected(self) -> None:
        problem = ConicProblem()
        x = AffineExpr.of(problem.add_variable(VarShape.vector(2)))

        with pytest.raises(ValueError, match="shape mismatch"):
            _ = x + AffineExpr.zeros(3, 1)


class TestConicProblem:
    def test_second_order_needs_two_rows(self) -> None:
        problem = ConicProblem()
        t = AffineExpr.of(problem.add_variable(VarShape.scalar()))

        with pytest.raises(ValueError, match="at least 2 rows"):
            problem.add_cone(ConeKind.SECOND_ORDER, t)

    def test_psd_needs_triangular_rows(self) -> None:
        problem = ConicProblem()
        x = AffineExpr.of(problem.add_variable(VarShape.vector(2)))

        with pytest.raises(ValueError, match="triangular row count"):
            problem.add_cone(ConeKind.PSD, x)

    def test_undeclared_variable_rejected(self) -> None:
        problem = ConicProblem()
        problem.add_variable(VarShape.scalar())

        with pytest.raises(ValueError, match="only 1 are declared"):
            problem.add_cone(ConeKind.NONNEG, (np.array([[0.0, 1.0]]), np.zeros(1)))

    def test_objective_constant_included(self) -> None:
        problem, t, _ = _make_problem()
        problem.set_objective(t + 3.0)

        assert problem.evaluate_objective(np.array([1.0, 0.0, 0.0])) == pytest.approx(4.0)

    def test_cone_violation_per_block(self) -> None:
        problem, _, _ = _make_problem()
        x = np.array([1.0, 3.0, 4.0])

        norm_violation, sum_violation = problem.cone_violation(x)

        assert norm_violation == pytest.approx(4.0 / 5.0)
        assert sum_violation == pytest.approx(5.0 / 8.0)

    def test_psd_violation_uses_smallest_eigenvalue(self) -> None:
        problem = ConicProblem()
        s = AffineExpr.of(problem.add_variable(VarShape.scalar()))
        problem.add_cone(ConeKind.PSD, s.scale_matrix(np.eye(2)).svec())

        assert problem.cone_violation(np.array([1.0]))[0] == 0.0
        assert problem.cone_violation(np.array([-1.0]))[0] == pytest.approx(0.5)

    def test_dump_and_load_preserve_program(self, tmp_path: Path) -> None:
        problem, _, _ = _make_problem()
        path = tmp_path / "norm.txt"

        problem.dump(path)
        loaded = ConicProblem.load_dump(path)

        assert path.read_text().splitlines()[0] == "vars 3"
        assert [b.kind for b in loaded.blocks] == [ConeKind.SECOND_ORDER, ConeKind.ZERO]
        G, h = problem.stacked()
        G2, h2 = loaded.stacked()
        np.testing.assert_array_equal(G.toarray(), G2.toarray())
        np.testing.assert_array_equal(h, h2)
        np.testing.assert_array_equal(problem.objective, loaded.objective)


class TestSolve:
    def test_optimal_solution_verified(self) -> None:
        problem, _, _ = _make_problem()
        x = np.array([np.sqrt(2.0), 1.0, 1.0])
        registry = _make_registry(Solution(SolveStatus.OPTIMAL, x, np.sqrt(2.0), "mock"))

        solution = solve(problem, SolverSettings(), registry)

        assert solution.is_optimal
        assert solution.max_violation <= 1e-12

    def test_violated_solution_downgraded(self) -> None:
        problem, _, _ = _make_problem()
        x = np.array([0.5, 1.0, 1.0])
        registry = _make_registry(Solution(SolveStatus.OPTIMAL, x, 0.5, "mock"))

        solution = solve(problem, SolverSettings(), registry)

        assert solution.status is SolveStatus.NUMERICAL_FAILURE
        assert "norm" in solution.message

    def test_backend_error_becomes_numerical_failure(self) -> None:
        problem, _, _ = _make_problem()
        registry = _make_registry(BackendError("factorization broke down"))

        solution = solve(problem, SolverSettings(), registry)

        assert solution.status is SolveStatus.NUMERICAL_FAILURE
        assert np.isnan(solution.objective)
        assert solution.message == "factorization broke down"

    def test_infeasible_status_passed_through(self) -> None:
        problem, _, _ = _make_problem()
        x = np.full(3, np.nan)
        registry = _make_registry(Solution(SolveStatus.INFEASIBLE, x, float("nan"), "mock"))

        solution = solve(problem, SolverSettings(), registry)

        assert solution.status is SolveStatus.INFEASIBLE

    def test_settings_validated(self) -> None:
        with pytest.raises(ValueError, match="positive"):
            SolverSettings(tol_feas=0.0)

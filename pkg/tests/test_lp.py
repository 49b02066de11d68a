"""Tests for the dense tableau simplex and the HiGHS backend."""

import numpy as np
import pytest

from irl_core.lp import LpProblem, TableauSimplex, solve_lp

TOL = 1e-8


def _two_var_problem():
    # min -x - y  s.t.  x + 2y <= 4,  3x + y <= 6
    return LpProblem(
        objective=[-1.0, -1.0],
        constraints=[([1.0, 2.0], "<=", 4.0), ([3.0, 1.0], "<=", 6.0)],
    )


class TestLpProblem:

    def test_default_bounds_nonnegative(self):
        p = LpProblem(objective=[1.0, 2.0, 3.0])
        assert p.bounds == [(0.0, None)] * 3
        assert p.num_vars == 3

    def test_rejects_wrong_coefficient_count(self):
        with pytest.raises(ValueError):
            LpProblem(objective=[1.0, 1.0], constraints=[([1.0], "<=", 1.0)])

    def test_rejects_unknown_relation(self):
        with pytest.raises(ValueError):
            LpProblem(objective=[1.0], constraints=[([1.0], "<", 1.0)])

    def test_rejects_wrong_bound_count(self):
        with pytest.raises(ValueError):
            LpProblem(objective=[1.0, 1.0], bounds=[(0.0, None)])


class TestTableauSimplex:

    @pytest.mark.parametrize("method", ["simplex", "highs"])
    def test_textbook_optimum(self, method):
        result = solve_lp(_two_var_problem(), method=method)
        assert result.ok
        assert np.allclose(result.x, [1.6, 1.2], atol=TOL)
        assert result.objective == pytest.approx(-2.8, abs=TOL)

    @pytest.mark.parametrize("method", ["simplex", "highs"])
    def test_infeasible(self, method):
        p = LpProblem(objective=[1.0], constraints=[([1.0], ">=", 2.0), ([1.0], "<=", 1.0)])
        assert solve_lp(p, method=method).status == "infeasible"

    def test_unbounded(self):
        p = LpProblem(objective=[-1.0, 0.0], constraints=[([0.0, 1.0], "<=", 1.0)])
        result = solve_lp(p)
        assert result.status == "unbounded"
        assert result.x is None

    def test_equality_constraint(self):
        p = LpProblem(objective=[1.0, 2.0], constraints=[([1.0, 1.0], "=", 1.0)])
        result = solve_lp(p)
        assert result.ok
        assert np.allclose(result.x, [1.0, 0.0], atol=TOL)

    def test_free_variable(self):
        p = LpProblem(objective=[1.0], constraints=[([1.0], ">=", -3.0)], bounds=[(None, None)])
        result = solve_lp(p)
        assert result.ok
        assert result.x[0] == pytest.approx(-3.0, abs=TOL)

    def test_boxed_variable(self):
        p = LpProblem(objective=[-1.0], bounds=[(1.0, 2.0)])
        assert solve_lp(p).x[0] == pytest.approx(2.0, abs=TOL)

    def test_upper_bounded_only(self):
        p = LpProblem(objective=[-1.0], bounds=[(None, 5.0)])
        assert solve_lp(p).x[0] == pytest.approx(5.0, abs=TOL)

    def test_crossed_bounds_infeasible(self):
        p = LpProblem(objective=[1.0], bounds=[(2.0, 1.0)])
        assert solve_lp(p).status == "infeasible"

    def test_degenerate_cycling_example_terminates(self):
        # Beale's example cycles under the largest-coefficient rule
        p = LpProblem(
            objective=[-0.75, 150.0, -0.02, 6.0],
            constraints=[
                ([0.25, -60.0, -0.04, 9.0], "<=", 0.0),
                ([0.5, -90.0, -0.02, 3.0], "<=", 0.0),
                ([0.0, 0.0, 1.0, 0.0], "<=", 1.0),
            ],
        )
        result = solve_lp(p)
        assert result.ok
        assert result.objective == pytest.approx(-0.05, abs=TOL)

    def test_redundant_equalities(self):
        p = LpProblem(
            objective=[1.0, 1.0],
            constraints=[([1.0, 1.0], "=", 2.0), ([2.0, 2.0], "=", 4.0), ([1.0, 0.0], ">=", 0.5)],
        )
        result = solve_lp(p)
        assert result.ok
        assert result.objective == pytest.approx(2.0, abs=TOL)

    def test_pivot_limit_reports_failure(self):
        A = np.array([[1.0, 2.0], [3.0, 1.0]])
        status, x = TableauSimplex(max_pivots=1).solve_standard(
            A, ["<=", "<="], np.array([4.0, 6.0]), np.array([-1.0, -1.0])
        )
        assert status == "numerical_failure"
        assert x is None

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            solve_lp(_two_var_problem(), method="interior")

    def test_agrees_with_highs_on_random_problems(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            A = rng.uniform(0.1, 1.0, size=(5, 4))
            b = rng.uniform(1.0, 3.0, size=5)
            c = -rng.uniform(0.1, 1.0, size=4)
            p = LpProblem(objective=c, constraints=[(A[i], "<=", b[i]) for i in range(5)])
            ours = solve_lp(p)
            reference = solve_lp(p, method="highs")
            assert ours.ok and reference.ok
            assert ours.objective == pytest.approx(reference.objective, abs=1e-7)

    def test_badly_scaled_rows_agree_with_highs(self):
        rng = np.random.default_rng(11)
        scales = [1e-4, 1.0, 1e4, 1e-2, 1e2]
        for _ in range(10):
            A = rng.uniform(0.1, 1.0, size=(5, 4))
            b = rng.uniform(1.0, 3.0, size=5)
            c = -rng.uniform(0.1, 1.0, size=4)
            p = LpProblem(objective=c,
                          constraints=[(A[i] * s, "<=", b[i] * s) for i, s in enumerate(scales)])
            ours = solve_lp(p)
            reference = solve_lp(p, method="highs")
            assert ours.ok and reference.ok
            assert ours.objective == pytest.approx(reference.objective, abs=1e-7)

    @pytest.mark.parametrize("refactor_every", [1, 3, 1000])
    def test_refactor_interval_keeps_optimum(self, refactor_every):
        A = np.array([[1.0, 2.0], [3.0, 1.0]])
        status, y = TableauSimplex(refactor_every=refactor_every).solve_standard(
            A, ["<=", "<="], np.array([4.0, 6.0]), np.array([-1.0, -1.0])
        )
        assert status == "optimal"
        assert np.allclose(y, [1.6, 1.2], atol=TOL)

    def test_degenerate_equalities_with_mixed_signs(self):
        # zero right-hand sides force artificials out on negative pivots
        p = LpProblem(
            objective=[-1.0, -1.0, 0.0],
            constraints=[
                ([1.0, -1.0, 0.0], "=", 0.0),
                ([-1.0, 0.0, 1.0], "=", 0.0),
                ([0.0, 1.0, 1.0], "<=", 2.0),
            ],
        )
        for method in ("simplex", "highs"):
            result = solve_lp(p, method=method)
            assert result.ok
            assert np.allclose(result.x, [1.0, 1.0, 1.0], atol=TOL)
            assert result.objective == pytest.approx(-2.0, abs=TOL)

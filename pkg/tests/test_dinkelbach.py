import pytest

from fracprox import InnerParams, SolverParams, Termination, catalog_problem, run_dinkelbach
from fracprox.dinkelbach import inner_step_size, solve_parametric
from fracprox.oracle import grid_minimize

THETA_P1 = 0.1 / 1.51


def test_parametric_p1_kink():
    sol = solve_parametric(catalog_problem("P1"), 0.4)
    assert sol.x[0] == pytest.approx(0.7, abs=1e-9)
    assert not sol.local


def test_parametric_value_vanishes_at_optimal_ratio():
    p = catalog_problem("P1")
    sol = solve_parametric(p, THETA_P1)
    assert p.f(sol.x) - THETA_P1 * p.g(sol.x) == pytest.approx(0.0, abs=1e-12)


def test_parametric_zero_theta_minimizes_f():
    sol = solve_parametric(catalog_problem("P4"), 0.0)
    assert sol.x[0] == pytest.approx(0.0, abs=1e-9)


def test_parametric_agrees_with_grid():
    # independent check: brute-force the convex subproblem on a grid
    import numpy as np
    p = catalog_problem("P1")
    xs = np.linspace(0, 1, 100001)[:, None]
    for theta in (0.1, 0.25, 0.4):
        sol = solve_parametric(p, theta)
        vals = p.f.values(xs) - theta * p.g.values(xs)
        assert sol.x[0] == pytest.approx(xs[np.argmin(vals), 0], abs=1e-5)


def test_parametric_rejects_negative_theta():
    with pytest.raises(ValueError):
        solve_parametric(catalog_problem("P1"), -0.1)


def test_inner_step_size():
    assert inner_step_size(catalog_problem("P1"), 0.25) == pytest.approx(2.0, rel=1e-11)


def test_p1_outer_iterations():
    t = run_dinkelbach(catalog_problem("P1"), SolverParams(max_iter=50, tol_theta=1e-14))
    assert t.thetas[0] == pytest.approx(0.4, abs=1e-15)
    assert t.records[0].x[0] == pytest.approx(0.7, abs=1e-9)
    assert t.thetas[1] == pytest.approx(THETA_P1, abs=1e-12)
    assert len(t.records) <= 3
    assert t.prox_evaluations == sum(t.inner_iterations)


def test_p4_hits_zero(trace):
    t = trace("P4", "dinkelbach")
    assert t.termination is Termination.OPTIMAL_VALUE_ZERO
    assert len(t.records) == 1
    assert t.theta_final < 1e-12


def test_p3_local_flag():
    t = run_dinkelbach(catalog_problem("P3"), SolverParams(max_iter=50, tol_theta=1e-14))
    o = grid_minimize(catalog_problem("P3"), 100_001)
    assert abs(t.theta_final - o.theta_bar) < 1e-4
    assert "local" in t.notes


def test_inner_budget_is_respected():
    sol = solve_parametric(catalog_problem("P2"), 0.5, InnerParams(max_iter=3, tol=0.0))
    assert sol.iterations == 3

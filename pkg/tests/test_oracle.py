import numpy as np
import pytest

from fracprox import catalog_problem, grid_minimize
from fracprox.core import HypothesisViolation
from fracprox.functions import FKind, GKind, ProxFn, SmoothFn, box, full_space
from fracprox.core import ProblemInstance
from fracprox.oracle import UnsupportedProblem, grid_prox


def test_p1(oracle):
    o = oracle("P1")
    assert o.theta_bar == pytest.approx(0.1 / 1.51, abs=1e-6)
    assert o.x_bar[0] == pytest.approx(0.7, abs=1e-6)
    assert o.certified_gap < 1e-5


def test_p3(oracle):
    o = oracle("P3")
    xbar = (0.2 + np.sqrt(4.04)) / 2
    assert o.x_bar[0] == pytest.approx(xbar, abs=2e-6)
    assert o.theta_bar == pytest.approx(2 * (xbar - 1) / xbar, abs=1e-9)


def test_p4():
    o = grid_minimize(catalog_problem("P4"), 100_001)
    assert o.theta_bar == 0.0 and o.x_bar[0] == 0.0


def test_p2_refined(oracle):
    o = oracle("P2")
    assert o.x_bar.tolist() == pytest.approx([0.3, -0.2], abs=1e-6)
    assert o.certified_gap < 1e-5
    assert o.refine == 2


def test_gap_shrinks_with_resolution():
    p = catalog_problem("P1")
    coarse, fine = grid_minimize(p, 1001), grid_minimize(p, 10001)
    assert fine.certified_gap < coarse.certified_gap
    assert fine.theta_bar <= coarse.theta_bar + coarse.certified_gap


def test_grid_value_is_upper_bound_on_true_minimum():
    o = grid_minimize(catalog_problem("P1"), 1001)
    assert o.theta_bar >= 0.1 / 1.51 - 1e-15


def test_lexicographic_tie_break():
    S = box([-1.0, -1.0], [1.0, 1.0])
    p = ProblemInstance(ProxFn(FKind.ZERO, S), SmoothFn(GKind.CONSTANT, m=1.0), [0.0, 0.0],
                        1.0, 1.0, "concave")
    o = grid_minimize(p, 11)
    assert o.x_bar.tolist() == [-1.0, -1.0]


def test_unbounded_and_high_dim_rejected():
    f = ProxFn(FKind.ZERO, full_space())
    p = ProblemInstance(f, SmoothFn(GKind.CONSTANT, m=1.0), [0.0], 1.0, 1.0, "concave")
    with pytest.raises(UnsupportedProblem):
        grid_minimize(p, 11)
    S4 = box([0.0] * 4, [1.0] * 4)
    p4 = ProblemInstance(ProxFn(FKind.ZERO, S4), SmoothFn(GKind.CONSTANT, m=1.0), [0.0] * 4,
                         1.0, 1.0, "concave")
    with pytest.raises(UnsupportedProblem):
        grid_minimize(p4, 11)


def test_nonpositive_denominator_detected():
    p = catalog_problem("P1").replace(g=SmoothFn(GKind.AFFINE, slope=[-2.0], m=1.0))
    with pytest.raises(HypothesisViolation):
        grid_minimize(p, 101)


def test_grid_prox_argument_checks():
    f = ProxFn(FKind.ZERO, full_space())
    with pytest.raises(ValueError):
        grid_prox(f, 0.0, 0.0, 11, -1, 1)
    with pytest.raises(ValueError):
        grid_prox(f, 0.0, 1.0, 1, -1, 1)

"""Classical parametric baseline.

Outer loop: ``x^k ~ argmin_{x in S} f(x) - theta_k g(x)`` followed by
``theta_{k+1} = f(x^k) / g(x^k)``.  The subproblem is solved approximately by
an inner proximal-gradient loop, and inner iteration counts are kept so the
cost of the subproblems can be compared with the single-prox iterations of
the direct methods.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import (Curvature, IterationRecord, ProblemInstance, RunTrace, SolverParams,
                   Termination, Vector, as_vector, checked_g, initial_ratio, norm,
                   stop_reason)

STEP_EPS = 1e-12


@dataclass(frozen=True)
class InnerParams:
    max_iter: int = 10_000
    tol: float = 1e-10


class ParametricSolution(NamedTuple):
    x: Vector
    iterations: int
    step: float
    local: bool


def inner_step_size(p: ProblemInstance, theta: float) -> float:
    return 1.0 / (theta * p.lipschitz_L + STEP_EPS)


def solve_parametric(p: ProblemInstance, theta: float, inner: InnerParams = InnerParams(),
                     z0: Optional[Vector] = None) -> ParametricSolution:
    """Approximately minimize ``f + delta_S - theta * g`` by proximal gradient.

    For a concave denominator the subproblem is convex; for a convex one it
    may not be, and the result is flagged ``local``.
    """
    if theta < 0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    s = inner_step_size(p, theta)
    z = p.S.project(p.x0 if z0 is None else z0)
    j = 0
    while j < inner.max_iter:
        j += 1
        z_new = p.f.prox(z + theta * s * p.g.grad(z), s)
        moved = norm(z_new - z)
        z = z_new
        if moved < inner.tol:
            break
    return ParametricSolution(z, j, s, p.curvature is Curvature.CONVEX)


def run_dinkelbach(p: ProblemInstance, params: SolverParams = SolverParams(),
                   inner: InnerParams = InnerParams()) -> RunTrace:
    """Outer parametric loop, warm-starting each subproblem at the last iterate.

    Records store the inner step size in ``eta``.
    """
    t0 = time.perf_counter()
    theta = initial_ratio(p)
    x_prev = p.x0
    records: list[IterationRecord] = []
    counts: list[int] = []
    termination = Termination.OPTIMAL_VALUE_ZERO if theta <= params.theta_floor else None

    k = 0
    while termination is None:
        k += 1
        sol = solve_parametric(p, theta, inner, z0=x_prev)
        counts.append(sol.iterations)
        if not np.all(np.isfinite(sol.x)):
            termination = Termination.DIVERGED
            break
        x_k = as_vector(sol.x)
        g_k = checked_g(p, x_k)
        f_k = p.f(x_k)
        theta_next = f_k / g_k
        if not math.isfinite(theta_next):
            termination = Termination.DIVERGED
            break
        step = norm(x_k - x_prev)
        records.append(IterationRecord(k=k, x=x_k, theta=theta, eta=sol.step, f_val=f_k,
                                       g_val=g_k, step_norm=step))
        termination = stop_reason(params, k, theta, theta_next, step)
        x_prev, theta = x_k, theta_next

    notes = ("local",) if p.curvature is Curvature.CONVEX else ()
    return RunTrace(records=records, termination=termination, x0=p.x0,
                    algorithm="dinkelbach", wall_time=time.perf_counter() - t0,
                    prox_evaluations=sum(counts), inner_iterations=tuple(counts),
                    notes=notes)

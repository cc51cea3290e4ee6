"""Proximal-gradient iteration for concave denominators.

Each step uses the adaptive step size ``eta_k = 1 / (2 L theta_k)``::

    y     = x^{k-1} + theta_k * eta_k * grad g(x^{k-1})
    x^k   = prox_{eta_k (f + delta_S)}(y)
    theta_{k+1} = f(x^k) / g(x^k)
"""

from __future__ import annotations

import math
import time

import numpy as np

from .core import (Curvature, HypothesisViolation, IterationRecord, OptimalValueZero,
                   ProblemInstance, RunTrace, SolverParams, Termination, Vector,
                   as_vector, checked_g, initial_ratio, norm, stop_reason)

ConcaveSolverParams = SolverParams

INLINE_SLACK = 1e-10


class InequalityViolation(HypothesisViolation):
    """An inequality that holds for exact arithmetic failed beyond its slack."""


def step_size(p: ProblemInstance, theta_k: float) -> float:
    return 1.0 / (2.0 * p.lipschitz_L * theta_k)


def concave_step(p: ProblemInstance, x_prev: Vector, theta_k: float,
                 theta_floor: float = 1e-12) -> tuple[Vector, float, float]:
    """One iteration; returns ``(x_k, theta_next, eta_k)``.

    Raises :class:`OptimalValueZero` when ``theta_k <= theta_floor`` since the
    step size is then undefined.
    """
    if theta_k <= theta_floor:
        raise OptimalValueZero(f"theta_k={theta_k} <= theta_floor={theta_floor}")
    eta = step_size(p, theta_k)
    y = x_prev + theta_k * eta * p.g.grad(x_prev)
    x_k = p.f.prox(y, eta)
    gx = checked_g(p, x_k)
    return x_k, p.f(x_k) / gx, eta


def _decrease_lhs(theta_k, theta_next, g_k, step, L) -> float:
    return (theta_next - theta_k) * g_k + 1.5 * L * theta_k * step * step


def run_concave(p: ProblemInstance, params: SolverParams = SolverParams()) -> RunTrace:
    """Iterate :func:`concave_step` from ``p.x0`` until a stopping rule fires."""
    if p.curvature is not Curvature.CONCAVE:
        raise ValueError("run_concave needs a problem tagged concave")
    t0 = time.perf_counter()
    theta = initial_ratio(p)
    x_prev = p.x0
    records: list[IterationRecord] = []
    termination = Termination.OPTIMAL_VALUE_ZERO if theta <= params.theta_floor else None

    k = 0
    while termination is None:
        k += 1
        x_k, theta_next, eta = concave_step(p, x_prev, theta, params.theta_floor)
        if not np.all(np.isfinite(x_k)) or not math.isfinite(theta_next):
            termination = Termination.DIVERGED
            break
        x_k = as_vector(x_k)
        step = norm(x_k - x_prev)
        g_k = p.g(x_k)
        rec = IterationRecord(k=k, x=x_k, theta=theta, eta=eta, f_val=p.f(x_k),
                              g_val=g_k, step_norm=step)
        records.append(rec)
        if params.assert_mode:
            _assert_step(p, rec, theta_next)
        termination = stop_reason(params, k, theta, theta_next, step)
        x_prev, theta = x_k, theta_next

    return RunTrace(records=records, termination=termination, x0=p.x0,
                    algorithm="concave", wall_time=time.perf_counter() - t0,
                    prox_evaluations=len(records))


def _assert_step(p: ProblemInstance, rec: IterationRecord, theta_next: float):
    if theta_next > rec.theta + 1e-12:
        raise InequalityViolation(
            f"theta increased at k={rec.k}: {rec.theta} -> {theta_next}")
    lhs = _decrease_lhs(rec.theta, theta_next, rec.g_val, rec.step_norm, p.lipschitz_L)
    if lhs > INLINE_SLACK:
        raise InequalityViolation(f"sufficient decrease violated at k={rec.k}: lhs={lhs:.3e}")
    if rec.g_val > p.bound_M + 1e-12:
        raise HypothesisViolation(f"g(x^{rec.k})={rec.g_val} exceeds M={p.bound_M}")

"""Proximal-gradient iteration for convex denominators.

Same forward-backward step as the concave solver, but the step size comes
from a user policy.  With ``safeguard=True`` the policy must satisfy
``eta_1 * theta_1 < 1/L`` and be nonincreasing, which is what guarantees
finite length of the whole trajectory for KL objectives.

Each record carries the norm of the criticality element::

    x*_k = (1/g(x^k)) [ -theta_{k+1} grad g(x^k) + theta_k grad g(x^{k-1})
                        + (x^{k-1} - x^k) / eta_k ]

which lies in the limiting subdifferential of (f + delta_S)/g at x^k.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import (ConfigurationError, Curvature, IterationRecord, ProblemInstance,
                   RunTrace, SolverParams, Termination, Vector, as_vector, checked_g,
                   initial_ratio, norm, stop_reason)
from .solver_concave import INLINE_SLACK, InequalityViolation

SAFEGUARD_BOUND = "eta_1 * theta_1 < 1/L"


class EtaKind(str, enum.Enum):
    CONSTANT = "constant"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class StepPolicy:
    """``constant``: eta_k = eta.  ``geometric``: eta_k = eta * ratio**(k-1)."""

    kind: EtaKind = EtaKind.CONSTANT
    eta: float = 1.0
    ratio: float = 1.0
    safeguard: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", EtaKind(self.kind))
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigurationError(f"eta must be positive, got {self.eta}")
        if not 0 < self.ratio <= 1:
            raise ConfigurationError(f"ratio must lie in (0, 1], got {self.ratio}")

    @classmethod
    def constant(cls, eta: float, safeguard: bool = True) -> "StepPolicy":
        return cls(EtaKind.CONSTANT, eta, 1.0, safeguard)

    @classmethod
    def geometric(cls, eta1: float, ratio: float, safeguard: bool = True) -> "StepPolicy":
        return cls(EtaKind.GEOMETRIC, eta1, ratio, safeguard)

    def eta_at(self, k: int) -> float:
        if self.kind is EtaKind.CONSTANT:
            return self.eta
        return self.eta * self.ratio ** (k - 1)

    def check_safeguard(self, theta1: float, L: float):
        if self.safeguard and not self.eta * theta1 < 1.0 / L:
            raise ConfigurationError(
                f"step policy violates {SAFEGUARD_BOUND}: "
                f"eta_1 * theta_1 = {self.eta * theta1:.6g} >= 1/L = {1.0 / L:.6g}")


def residual(p: ProblemInstance, x_prev: Vector, x_k: Vector, theta_k: float,
             theta_next: float, eta_k: float, g_k: float) -> Vector:
    return (-theta_next * p.g.grad(x_k) + theta_k * p.g.grad(x_prev)
            + (x_prev - x_k) / eta_k) / g_k


def convex_step(p: ProblemInstance, x_prev: Vector, theta_k: float,
                eta_k: float) -> tuple[Vector, float, Vector]:
    """One iteration; returns ``(x_k, theta_next, residual)``."""
    if not eta_k > 0:
        raise ConfigurationError(f"eta_k must be positive, got {eta_k}")
    y = x_prev + theta_k * eta_k * p.g.grad(x_prev)
    x_k = p.f.prox(y, eta_k)
    g_k = checked_g(p, x_k)
    theta_next = p.f(x_k) / g_k
    return x_k, theta_next, residual(p, x_prev, x_k, theta_k, theta_next, eta_k, g_k)


def run_convex(p: ProblemInstance, policy: StepPolicy = StepPolicy(),
               params: SolverParams = SolverParams()) -> RunTrace:
    """Iterate :func:`convex_step` from ``p.x0``.

    Raises :class:`ConfigurationError` before the first step if the
    safeguard is on and ``eta_1 * theta_1 >= 1/L``.
    """
    if p.curvature is not Curvature.CONVEX:
        raise ValueError("run_convex needs a problem tagged convex")
    t0 = time.perf_counter()
    theta = initial_ratio(p)
    policy.check_safeguard(theta, p.lipschitz_L)
    x_prev = p.x0
    records: list[IterationRecord] = []
    termination = Termination.OPTIMAL_VALUE_ZERO if theta <= params.theta_floor else None

    k = 0
    while termination is None:
        k += 1
        eta = policy.eta_at(k)
        x_k, theta_next, res = convex_step(p, x_prev, theta, eta)
        if not np.all(np.isfinite(x_k)) or not math.isfinite(theta_next):
            termination = Termination.DIVERGED
            break
        x_k = as_vector(x_k)
        step = norm(x_k - x_prev)
        rec = IterationRecord(k=k, x=x_k, theta=theta, eta=eta, f_val=p.f(x_k),
                              g_val=p.g(x_k), step_norm=step, residual_norm=norm(res))
        records.append(rec)
        if params.assert_mode:
            lhs = (theta_next - theta) * rec.g_val + step * step / eta
            if lhs > INLINE_SLACK:
                raise InequalityViolation(f"convex sufficient decrease violated at k={k}: lhs={lhs:.3e}")
        termination = stop_reason(params, k, theta, theta_next, step)
        x_prev, theta = x_k, theta_next

    notes = ()
    if records:
        margin = max(params.tol_step, 1e-9)
        if p.S.boundary_distance(records[-1].x) < margin:
            notes = ("boundary: criticality unverified",)
        else:
            notes = ("interior",)
    return RunTrace(records=records, termination=termination, x0=p.x0,
                    algorithm="convex", wall_time=time.perf_counter() - t0,
                    prox_evaluations=len(records), notes=notes)

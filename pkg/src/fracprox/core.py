"""Vectors, problem instances, validation and the iteration-trace data model."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

if TYPE_CHECKING:
    from .functions import ProxFn, SmoothFn

Vector = NDArray[np.float64]

F_SLACK = 1e-12
"""Tolerated negative excursion of f caused by floating-point cancellation."""


class FracProxError(Exception):
    """Base class for all errors raised by this package."""


class HypothesisViolation(FracProxError):
    """A standing assumption on f, g or S failed at a concrete point."""


class ConfigurationError(FracProxError, ValueError):
    """Solver parameters or a step policy are inconsistent."""


class OptimalValueZero(FracProxError):
    """The ratio reached zero, so any zero of f in S is optimal."""


class Curvature(str, enum.Enum):
    CONCAVE = "concave"
    CONVEX = "convex"


class Termination(str, enum.Enum):
    THETA_TOL = "ThetaTolReached"
    STEP_TOL = "StepTolReached"
    MAX_ITER = "MaxIter"
    OPTIMAL_VALUE_ZERO = "OptimalValueZero"
    DIVERGED = "Diverged"


def as_vector(x: ArrayLike) -> Vector:
    """Return `x` as a read-only, finite, 1-D float64 array."""
    v = np.array(x, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("vectors must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector has non-finite coordinates: {v}")
    v.setflags(write=False)
    return v


def dot(a: ArrayLike, b: ArrayLike) -> float:
    """Euclidean inner product of two vectors of equal dimension."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(np.dot(a, b))


def norm(a: ArrayLike) -> float:
    return math.sqrt(dot(a, a))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """The data of ``inf_{x in S} f(x) / g(x)`` together with a starting point.

    Structural consistency (dimensions, positive constants, finite x0) is
    enforced here; the analytic hypotheses are sampled by
    :func:`validate_instance`.
    """

    f: ProxFn
    g: SmoothFn
    x0: Vector
    lipschitz_L: float
    bound_M: float
    curvature: Curvature
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "x0", as_vector(self.x0))
        object.__setattr__(self, "curvature", Curvature(self.curvature))
        if not (self.lipschitz_L > 0 and math.isfinite(self.lipschitz_L)):
            raise ValueError(f"lipschitz_L must be positive, got {self.lipschitz_L}")
        if not (self.bound_M > 0 and math.isfinite(self.bound_M)):
            raise ValueError(f"bound_M must be positive, got {self.bound_M}")
        self.f.check_dim(self.dim)
        self.g.check_dim(self.dim)

    @property
    def dim(self) -> int:
        return self.x0.size

    @property
    def S(self):
        return self.f.S

    def ratio(self, x: ArrayLike) -> float:
        return self.f(x) / self.g(x)

    def replace(self, **changes) -> "ProblemInstance":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """State after iteration k.

    ``theta`` is the ratio that drove step k (theta_k); the ratio of the new
    iterate, theta_{k+1}, is ``f_val / g_val``.
    """

    k: int
    x: Vector
    theta: float
    eta: float
    f_val: float
    g_val: float
    step_norm: float
    residual_norm: float = 0.0

    @property
    def theta_next(self) -> float:
        return self.f_val / self.g_val


@dataclass
class RunTrace:
    """Ordered iteration records plus a termination summary.

    ``x0`` is carried along so that every quantity referring to the starting
    point can be recomputed from the trace alone.
    """

    records: list[IterationRecord]
    termination: Termination
    x0: Vector
    algorithm: str = "concave"
    wall_time: float = 0.0
    prox_evaluations: int = 0
    inner_iterations: tuple[int, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        self.termination = Termination(self.termination)
        if not self.records and self.termination is not Termination.OPTIMAL_VALUE_ZERO:
            raise ValueError("a trace without records must end in OptimalValueZero")
        for i, r in enumerate(self.records):
            if r.k != i + 1:
                raise ValueError(f"record {i} has k={r.k}, expected {i + 1}")

    def __len__(self):
        return len(self.records)

    @property
    def iterates(self) -> NDArray[np.float64]:
        """Array of shape (N + 1, dim) holding x^0, ..., x^N."""
        return np.vstack([self.x0] + [r.x for r in self.records])

    @property
    def thetas(self) -> NDArray[np.float64]:
        """theta_1, ..., theta_{N+1}."""
        if not self.records:
            return np.array([np.nan])
        vals = [r.theta for r in self.records]
        vals.append(self.records[-1].theta_next)
        return np.array(vals)

    @property
    def theta_final(self) -> float:
        if not self.records:
            return math.nan
        return self.records[-1].theta_next

    @property
    def x_final(self) -> Vector:
        return self.records[-1].x if self.records else self.x0


@dataclass(frozen=True)
class SolverParams:
    """Stopping rule shared by all three solvers.

    A criterion set to 0 never fires.  ``assert_mode`` runs the per-iteration
    proof inequalities inline and raises on the first violation.
    """

    max_iter: int = 500
    tol_theta: float = 0.0
    tol_step: float = 0.0
    theta_floor: float = 1e-12
    assert_mode: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be a positive integer")
        if self.tol_theta < 0 or self.tol_step < 0:
            raise ConfigurationError("tolerances must be nonnegative")
        if not self.theta_floor > 0:
            raise ConfigurationError("theta_floor must be positive")


def stop_reason(params: SolverParams, k: int, theta_k: float, theta_next: float,
                step_norm: float) -> Optional[Termination]:
    if theta_next <= params.theta_floor:
        return Termination.OPTIMAL_VALUE_ZERO
    if params.tol_theta > 0 and theta_k - theta_next < params.tol_theta:
        return Termination.THETA_TOL
    if params.tol_step > 0 and step_norm < params.tol_step:
        return Termination.STEP_TOL
    if k >= params.max_iter:
        return Termination.MAX_ITER
    return None


def initial_ratio(p: ProblemInstance) -> float:
    """theta_1 = f(x0) / g(x0), after checking x0 is an admissible start."""
    if not p.S.contains(p.x0):
        raise HypothesisViolation(f"x0={p.x0} is not in S")
    fx = p.f(p.x0)
    gx = p.g(p.x0)
    if not math.isfinite(fx):
        raise HypothesisViolation("x0 is not in dom f")
    if fx < -F_SLACK:
        raise HypothesisViolation(f"f(x0)={fx} < 0")
    if not 0 < gx:
        raise HypothesisViolation(f"g(x0)={gx} <= 0")
    return fx / gx


def checked_g(p: ProblemInstance, x: Vector) -> float:
    gx = p.g(x)
    if not gx > 0:
        raise HypothesisViolation(f"g(x)={gx} <= 0 at x={x}")
    return gx


# --------------------------------------------------------------------------
# Sampling-based validation of the standing hypotheses
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(CheckResult(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                           for c in self.checks]}


def validate_instance(p: ProblemInstance, n_samples: int = 100, seed: int = 0,
                      slack: float = 1e-10) -> ValidationReport:
    """Spot-check the hypotheses of the fractional program at x0 and at
    `n_samples` deterministic pseudo-random points of S.

    Checks: x0 in S, f(x0) >= 0, 0 < g(x0) <= M, and at the samples f >= 0,
    0 < g <= M, the descent lemma for g (convex tag) or -g (concave tag),
    and the curvature inequality of the tag.
    """
    from .functions import check_curvature, check_descent_lemma

    rep = ValidationReport()
    x0 = p.x0
    rep.add("x0 in S", p.S.contains(x0), f"x0={x0.tolist()}")
    f0, g0 = p.f(x0), p.g(x0)
    rep.add("f(x0) finite", math.isfinite(f0), f"f(x0)={f0}")
    rep.add("f(x0) >= 0", f0 >= -F_SLACK, f"f(x0)={f0}")
    rep.add("g(x0) > 0", g0 > 0, f"g(x0)={g0}")
    rep.add("g(x0) <= M", g0 <= p.bound_M + slack, f"g(x0)={g0}, M={p.bound_M}")

    rng = np.random.default_rng(seed)
    pts = p.S.sample(rng, n_samples, around=x0)
    fv = p.f.values(pts)
    gv = p.g.values(pts)
    worst_f = float(fv.min())
    rep.add("f >= 0 on samples", worst_f >= -F_SLACK, f"min f={worst_f}")
    rep.add("g > 0 on samples", float(gv.min()) > 0, f"min g={float(gv.min())}")
    rep.add("g <= M on samples", float(gv.max()) <= p.bound_M + slack,
            f"max g={float(gv.max())}, M={p.bound_M}")

    pairs = list(zip(pts[:-1], pts[1:]))
    rep.add("descent lemma", check_descent_lemma(p.g, p.lipschitz_L, pairs,
                                                 curvature=p.curvature),
            f"L={p.lipschitz_L}, curvature={p.curvature.value}")
    rep.add("curvature tag", check_curvature(p.g, pairs, p.curvature),
            f"tag={p.curvature.value}, kind={p.g.kind}")
    return rep


"""Proximal-gradient methods for single-ratio fractional programs.

Minimizes f(x)/g(x) over a closed convex set S, where f is prox-friendly and
nonnegative and g is smooth and positive on S.
"""

from .core import (ConfigurationError, Curvature, FracProxError, HypothesisViolation,
                   IterationRecord, OptimalValueZero, ProblemInstance, RunTrace,
                   SolverParams, Termination, validate_instance)
from .diagnostics import Report, applicable_checks, informational_checks
from .dinkelbach import InnerParams, run_dinkelbach, solve_parametric
from .functions import (CATALOG, ConvexSet, ProxFn, SmoothFn, box, catalog_problem,
                        full_space, interval)
from .oracle import OracleResult, grid_minimize, grid_prox
from .solver_concave import run_concave
from .solver_convex import StepPolicy, run_convex

__version__ = "0.1.0"

__all__ = [
    "CATALOG", "ConfigurationError", "ConvexSet", "Curvature", "FracProxError",
    "HypothesisViolation", "InnerParams", "IterationRecord", "OptimalValueZero",
    "OracleResult", "ProblemInstance", "ProxFn", "Report", "RunTrace", "SmoothFn",
    "SolverParams", "StepPolicy", "Termination", "applicable_checks", "box",
    "catalog_problem", "full_space", "grid_minimize", "grid_prox", "informational_checks",
    "interval", "run_concave", "run_convex", "run_dinkelbach", "solve_parametric",
    "validate_instance",
]

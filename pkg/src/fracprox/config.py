"""Run configuration: parsing, defaults, and assembly into solver objects."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .core import Curvature, ProblemInstance, SolverParams
from .dinkelbach import InnerParams
from .functions import (CATALOG, FKind, GKind, ProxFn, SmoothFn, box, catalog_problem,
                        full_space, interval)
from .solver_convex import StepPolicy

SEED_ENV = "FRACPROX_SEED"


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Component(_Strict):
    kind: str
    params: dict = Field(default_factory=dict)


class InlineProblem(_Strict):
    f: Component
    S: Component
    g: Component
    L: float
    M: float
    curvature: Literal["concave", "convex"]


class EtaPolicyConfig(_Strict):
    kind: Literal["constant", "geometric"] = "constant"
    eta: float = 1.0
    ratio: float = 1.0
    safeguard: bool = True


class InnerConfig(_Strict):
    max_iter: int = 10_000
    tol: float = 1e-10


class SolverConfig(_Strict):
    algorithm: Literal["concave", "convex", "dinkelbach"] = "concave"
    eta_policy: EtaPolicyConfig = Field(default_factory=EtaPolicyConfig)
    max_iter: int = 500
    tol_theta: float = 0.0
    tol_step: float = 0.0
    theta_floor: float = 1e-12
    inner: InnerConfig = Field(default_factory=InnerConfig)


class OracleConfig(_Strict):
    n_points_per_dim: int = 100_001
    refine: int = 0


class RunConfig(_Strict):
    problem: Union[str, InlineProblem]
    x0: Optional[list[float]] = None
    solver: SolverConfig = Field(default_factory=SolverConfig)
    oracle: Optional[OracleConfig] = None
    seed: int = 0

    def resolved(self) -> "RunConfig":
        """Copy with x0 filled in from the catalog and the seed override applied."""
        cfg = self.model_copy(deep=True)
        if cfg.x0 is None:
            if not isinstance(cfg.problem, str):
                raise ConfigError("inline problems need an explicit x0")
            cfg.x0 = catalog_problem(cfg.problem).x0.tolist()
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                cfg.seed = int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return cfg

    def digest(self) -> str:
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: Union[str, Path]) -> RunConfig:
    """Parse a JSON config file; raises ConfigError on any schema problem."""
    text = Path(path).read_text()
    try:
        return parse_config(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def parse_config(data: dict) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    if isinstance(cfg.problem, str) and cfg.problem not in CATALOG:
        raise ConfigError(f"unknown catalog problem {cfg.problem!r}")
    return cfg.resolved()


# --------------------------------------------------------------------------
# Assembly
# --------------------------------------------------------------------------

def _take(comp: Component, required: tuple, optional: dict) -> dict:
    unknown = set(comp.params) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{comp.kind}: unknown parameters {sorted(unknown)}")
    missing = [k for k in required if k not in comp.params]
    if missing:
        raise ConfigError(f"{comp.kind}: missing parameters {missing}")
    return {**optional, **comp.params}


def build_set(comp: Component):
    if comp.kind == "interval":
        p = _take(comp, ("lo", "hi"), {})
        return interval(p["lo"], p["hi"])
    if comp.kind == "box":
        p = _take(comp, ("lo", "hi"), {})
        return box(p["lo"], p["hi"])
    if comp.kind == "full":
        _take(comp, (), {})
        return full_space()
    raise ConfigError(f"unknown set kind {comp.kind!r}")


def build_f(comp: Component, S) -> ProxFn:
    try:
        kind = FKind(comp.kind)
    except ValueError:
        raise ConfigError(f"unknown numerator kind {comp.kind!r}") from None
    if kind is FKind.ZERO:
        _take(comp, (), {})
        return ProxFn(kind, S)
    p = _take(comp, ("center",), {"offset": 0.0})
    return ProxFn(kind, S, center=p["center"], offset=p["offset"])


def build_g(comp: Component) -> SmoothFn:
    try:
        kind = GKind(comp.kind)
    except ValueError:
        raise ConfigError(f"unknown denominator kind {comp.kind!r}") from None
    if kind is GKind.CONCAVE_QUAD:
        p = _take(comp, ("a", "level"), {"center": 0.0})
        return SmoothFn(kind, a=p["a"], center=p["center"], m=p["level"])
    if kind is GKind.CONVEX_QUAD:
        p = _take(comp, ("a", "offset"), {"center": 0.0})
        return SmoothFn(kind, a=p["a"], center=p["center"], m=p["offset"])
    if kind is GKind.CONSTANT:
        p = _take(comp, ("value",), {})
        return SmoothFn(kind, m=p["value"])
    p = _take(comp, ("slope", "offset"), {})
    return SmoothFn(kind, slope=p["slope"], m=p["offset"])


def build_problem(cfg: RunConfig) -> ProblemInstance:
    try:
        if isinstance(cfg.problem, str):
            return catalog_problem(cfg.problem, cfg.x0)
        ip = cfg.problem
        S = build_set(ip.S)
        return ProblemInstance(f=build_f(ip.f, S), g=build_g(ip.g), x0=cfg.x0,
                               lipschitz_L=ip.L, bound_M=ip.M,
                               curvature=Curvature(ip.curvature), name="inline")
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def build_params(cfg: RunConfig, assert_mode: bool = False) -> SolverParams:
    s = cfg.solver
    try:
        return SolverParams(max_iter=s.max_iter, tol_theta=s.tol_theta, tol_step=s.tol_step,
                            theta_floor=s.theta_floor, assert_mode=assert_mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_policy(cfg: RunConfig) -> StepPolicy:
    e = cfg.solver.eta_policy
    try:
        return StepPolicy(e.kind, e.eta, e.ratio, e.safeguard)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_inner(cfg: RunConfig) -> InnerParams:
    return InnerParams(max_iter=cfg.solver.inner.max_iter, tol=cfg.solver.inner.tol)

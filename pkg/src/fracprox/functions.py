"""Catalog of numerators (f, S) with closed-form joint prox maps, smooth
denominators g, calculus validators, and the named test problems P1-P4.

All evaluators accept a single point of shape (n,) or a stack of points of
shape (..., n); the stacked forms are used by the grid oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import Curvature, ProblemInstance, dot

SAMPLE_RADIUS = 10.0
"""Half-width of the sampling box used along unbounded coordinates of S."""


def _arr(x: ArrayLike) -> NDArray[np.float64]:
    return np.asarray(x, dtype=np.float64)


# --------------------------------------------------------------------------
# Feasible sets
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConvexSet:
    """Closed box ``lo <= x <= hi`` (componentwise); infinite bounds allowed.

    ``kind`` is one of ``"interval"`` (1-D), ``"box"`` or ``"full"``.
    """

    kind: str
    lo: NDArray[np.float64]
    hi: NDArray[np.float64]

    def __post_init__(self):
        lo, hi = _arr(self.lo).reshape(-1), _arr(self.hi).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same shape")
        if self.kind != "full" and not np.all(lo < hi):
            raise ValueError(f"need lo < hi componentwise, got lo={lo}, hi={hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def check_dim(self, n: int):
        if self.kind == "interval" and n != 1:
            raise ValueError(f"an interval set needs dimension 1, got {n}")
        if self.lo.size not in (1, n):
            raise ValueError(f"set has dimension {self.lo.size}, problem has {n}")

    def contains(self, x: ArrayLike, tol: float = 0.0) -> bool:
        x = _arr(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def project(self, x: ArrayLike) -> NDArray[np.float64]:
        return np.clip(x, self.lo, self.hi)

    def boundary_distance(self, x: ArrayLike) -> float:
        x = _arr(x)
        return float(np.min(np.minimum(x - self.lo, self.hi - x)))

    def sample(self, rng: np.random.Generator, n: int,
               around: Optional[ArrayLike] = None) -> NDArray[np.float64]:
        """`n` uniform points of S; unbounded coordinates are drawn within
        ``SAMPLE_RADIUS`` of `around`."""
        dim = self.lo.size if around is None else _arr(around).size
        center = np.zeros(dim) if around is None else _arr(around).reshape(-1)
        lo = np.broadcast_to(self.lo, (dim,)).copy()
        hi = np.broadcast_to(self.hi, (dim,)).copy()
        lo = np.where(np.isfinite(lo), lo, np.minimum(center, hi) - SAMPLE_RADIUS)
        hi = np.where(np.isfinite(hi), hi, np.maximum(center, lo) + SAMPLE_RADIUS)
        return rng.uniform(lo, hi, size=(n, dim))


def interval(lo: float, hi: float) -> ConvexSet:
    return ConvexSet("interval", [lo], [hi])


def box(lo: ArrayLike, hi: ArrayLike) -> ConvexSet:
    return ConvexSet("box", lo, hi)


def full_space() -> ConvexSet:
    return ConvexSet("full", [-np.inf], [np.inf])


# --------------------------------------------------------------------------
# Numerators
# --------------------------------------------------------------------------

class FKind(str, enum.Enum):
    ABS_SHIFTED = "abs_shifted"    # sum_i |x_i - c| + beta, scalar center
    QUAD_SHIFTED = "quad_shifted"  # ||x - c||^2 + beta
    L1 = "l1"                      # sum_i |x_i - c_i| + beta, per-coordinate center
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class ProxFn:
    """A separable convex numerator f restricted to a box S.

    The offset must be nonnegative so that f >= 0 everywhere.
    """

    kind: FKind
    S: ConvexSet
    center: ArrayLike = 0.0
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FKind(self.kind))
        c = _arr(self.center).reshape(-1).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if self.offset < 0:
            raise ValueError(f"offset must be >= 0 so that f >= 0, got {self.offset}")
        if self.kind is FKind.ABS_SHIFTED and c.size != 1:
            raise ValueError("abs_shifted takes a scalar center; use l1 for vectors")

    def check_dim(self, n: int):
        if self.center.size not in (1, n):
            raise ValueError(f"center has dimension {self.center.size}, problem has {n}")
        self.S.check_dim(n)

    def values(self, x: ArrayLike) -> NDArray[np.float64]:
        x = _arr(x)
        if self.kind is FKind.ZERO:
            return np.zeros(x.shape[:-1])
        d = x - self.center
        if self.kind is FKind.QUAD_SHIFTED:
            return np.sum(d * d, axis=-1) + self.offset
        return np.sum(np.abs(d), axis=-1) + self.offset

    def __call__(self, x: ArrayLike) -> float:
        return float(self.values(_arr(x).reshape(-1)))

    def prox(self, y: ArrayLike, lam: float) -> NDArray[np.float64]:
        """argmin_x f(x) + delta_S(x) + ||x - y||^2 / (2 lam).

        Coordinatewise: the unconstrained 1-D prox, then a clamp onto the
        interval of that coordinate (exact for separable convex f on a box).
        """
        if not lam > 0:
            raise ValueError(f"prox parameter must be positive, got {lam}")
        y = _arr(y)
        c = self.center
        if self.kind is FKind.ZERO:
            z = y.copy()
        elif self.kind is FKind.QUAD_SHIFTED:
            z = (y + 2.0 * lam * c) / (1.0 + 2.0 * lam)
        else:
            d = y - c
            z = c + np.sign(d) * np.maximum(np.abs(d) - lam, 0.0)
        return np.clip(z, self.S.lo, self.S.hi)


def eval_f(f: ProxFn, x: ArrayLike) -> float:
    return f(x)


def prox(f: ProxFn, y: ArrayLike, lam: float) -> NDArray[np.float64]:
    return f.prox(y, lam)


# --------------------------------------------------------------------------
# Denominators
# --------------------------------------------------------------------------

class GKind(str, enum.Enum):
    CONCAVE_QUAD = "concave_quad"  # m - a ||x - c||^2
    CONVEX_QUAD = "convex_quad"    # a ||x - c||^2 + m
    CONSTANT = "constant"          # m
    AFFINE = "affine"              # <w, x> + m


@dataclass(frozen=True, eq=False)
class SmoothFn:
    """Smooth denominator with closed-form value and gradient.

    `declared_L` and `declared_M` are optional annotations; when missing the
    true gradient Lipschitz constant is reported by :attr:`lipschitz`.
    """

    kind: GKind
    a: float = 0.0
    center: ArrayLike = 0.0
    m: float = 0.0
    slope: Optional[NDArray[np.float64]] = None
    declared_L: Optional[float] = None
    declared_M: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GKind(self.kind))
        c = _arr(self.center).reshape(-1).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if self.kind in (GKind.CONCAVE_QUAD, GKind.CONVEX_QUAD) and not self.a > 0:
            raise ValueError(f"quadratic denominators need a > 0, got {self.a}")
        if self.kind is GKind.CONSTANT and not self.m > 0:
            raise ValueError(f"a constant denominator must be positive, got {self.m}")
        if self.kind is GKind.AFFINE:
            if self.slope is None:
                raise ValueError("affine denominator needs a slope vector")
            w = _arr(self.slope).reshape(-1).copy()
            w.setflags(write=False)
            object.__setattr__(self, "slope", w)

    @property
    def lipschitz(self) -> float:
        """Exact Lipschitz constant of the gradient."""
        if self.kind in (GKind.CONCAVE_QUAD, GKind.CONVEX_QUAD):
            return 2.0 * self.a
        return 0.0

    @property
    def natural_curvature(self) -> Curvature:
        return Curvature.CONCAVE if self.kind is GKind.CONCAVE_QUAD else Curvature.CONVEX

    def check_dim(self, n: int):
        if self.center.size not in (1, n):
            raise ValueError(f"center has dimension {self.center.size}, problem has {n}")
        if self.kind is GKind.AFFINE and self.slope.size != n:
            raise ValueError(f"slope has dimension {self.slope.size}, problem has {n}")

    def values(self, x: ArrayLike) -> NDArray[np.float64]:
        x = _arr(x)
        if self.kind is GKind.CONSTANT:
            return np.full(x.shape[:-1], float(self.m))
        if self.kind is GKind.AFFINE:
            return x @ self.slope + self.m
        d = x - self.center
        sq = np.sum(d * d, axis=-1)
        if self.kind is GKind.CONCAVE_QUAD:
            return self.m - self.a * sq
        return self.a * sq + self.m

    def grads(self, x: ArrayLike) -> NDArray[np.float64]:
        x = _arr(x)
        if self.kind is GKind.CONSTANT:
            return np.zeros_like(x)
        if self.kind is GKind.AFFINE:
            return np.broadcast_to(self.slope, x.shape).copy()
        d = x - self.center
        if self.kind is GKind.CONCAVE_QUAD:
            return -2.0 * self.a * d
        return 2.0 * self.a * d

    def __call__(self, x: ArrayLike) -> float:
        return float(self.values(_arr(x).reshape(-1)))

    def grad(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.grads(_arr(x).reshape(-1))


def eval_g(g: SmoothFn, x: ArrayLike) -> float:
    return g(x)


def grad_g(g: SmoothFn, x: ArrayLike) -> NDArray[np.float64]:
    return g.grad(x)


# --------------------------------------------------------------------------
# Calculus validators
# --------------------------------------------------------------------------

def check_descent_lemma(g: SmoothFn, L: float, pairs: Iterable[tuple[ArrayLike, ArrayLike]],
                        curvature: Optional[Curvature] = None, slack: float = 1e-10) -> bool:
    """True iff h(y) <= h(x) + <grad h(x), y - x> + L/2 ||y - x||^2 at every
    pair, where h = -g for a concave tag and h = g otherwise."""
    curvature = g.natural_curvature if curvature is None else Curvature(curvature)
    sign = -1.0 if curvature is Curvature.CONCAVE else 1.0
    for x, y in pairs:
        x, y = _arr(x).reshape(-1), _arr(y).reshape(-1)
        d = y - x
        lhs = sign * g(y)
        rhs = sign * g(x) + sign * dot(g.grad(x), d) + 0.5 * L * dot(d, d)
        if lhs > rhs + slack:
            return False
    return True


def check_curvature(g: SmoothFn, pairs: Iterable[tuple[ArrayLike, ArrayLike]],
                    curvature: Curvature, slack: float = 1e-10) -> bool:
    """First-order concavity / convexity test of g at the given pairs."""
    sign = -1.0 if Curvature(curvature) is Curvature.CONCAVE else 1.0
    for x, y in pairs:
        x, y = _arr(x).reshape(-1), _arr(y).reshape(-1)
        gap = g(y) - g(x) - dot(g.grad(x), y - x)
        if sign * gap < -slack:
            return False
    return True


def fd_gradient_check(g: SmoothFn, x: ArrayLike, h: float = 1e-6) -> float:
    """Max coordinate error between central differences and the gradient."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = _arr(x).reshape(-1)
    grad = g.grad(x)
    err = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd = (g(x + e) - g(x - e)) / (2 * h)
        err = max(err, abs(fd - grad[i]))
    return err


# --------------------------------------------------------------------------
# Named problems
# --------------------------------------------------------------------------

def _p1(x0=None) -> ProblemInstance:
    return ProblemInstance(
        f=ProxFn(FKind.ABS_SHIFTED, interval(0.0, 1.0), center=0.7, offset=0.1),
        g=SmoothFn(GKind.CONCAVE_QUAD, a=1.0, center=0.0, m=2.0, declared_L=2.0, declared_M=2.0),
        x0=[0.0] if x0 is None else x0, lipschitz_L=2.0, bound_M=2.0,
        curvature=Curvature.CONCAVE, name="P1")


def _p2(x0=None) -> ProblemInstance:
    return ProblemInstance(
        f=ProxFn(FKind.L1, box([-1.0, -1.0], [1.0, 1.0]), center=[0.3, -0.2], offset=0.05),
        g=SmoothFn(GKind.CONCAVE_QUAD, a=0.5, center=0.0, m=4.0, declared_L=1.0, declared_M=4.0),
        x0=[1.0, 1.0] if x0 is None else x0, lipschitz_L=1.0, bound_M=4.0,
        curvature=Curvature.CONCAVE, name="P2")


def _p3(x0=None) -> ProblemInstance:
    return ProblemInstance(
        f=ProxFn(FKind.QUAD_SHIFTED, interval(0.5, 2.0), center=1.0, offset=0.2),
        g=SmoothFn(GKind.CONVEX_QUAD, a=0.5, center=0.0, m=0.5, declared_L=1.0, declared_M=2.5),
        x0=[2.0] if x0 is None else x0, lipschitz_L=1.0, bound_M=2.5,
        curvature=Curvature.CONVEX, name="P3")


def _p4(x0=None) -> ProblemInstance:
    return ProblemInstance(
        f=ProxFn(FKind.QUAD_SHIFTED, interval(-1.0, 1.0), center=0.0, offset=0.0),
        g=SmoothFn(GKind.CONSTANT, m=1.0, declared_L=1.0, declared_M=1.0),
        x0=[1.0] if x0 is None else x0, lipschitz_L=1.0, bound_M=1.0,
        curvature=Curvature.CONCAVE, name="P4")


CATALOG = {"P1": _p1, "P2": _p2, "P3": _p3, "P4": _p4}


def catalog_problem(name: str, x0: Optional[ArrayLike] = None) -> ProblemInstance:
    """Build one of the named problems, optionally with another start."""
    try:
        return CATALOG[name](x0)
    except KeyError:
        raise KeyError(f"unknown catalog problem {name!r}; "
                       f"choose from {sorted(CATALOG)}") from None


"""Brute-force ground truth for small problems.

``grid_minimize`` evaluates f/g on an endpoint-inclusive uniform grid over a
bounded box S (dimension <= 3) and returns the best node.  Ties go to the
lexicographically smallest node, so results do not depend on evaluation
order.  The optional ``refine`` levels re-grid a small neighbourhood of the
incumbent; the certificate then describes the finest grid only, which is a
valid discretization bound as long as the coarse level landed in the right
basin.

``grid_prox`` is the matching 1-D oracle for the closed-form prox maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HypothesisViolation, ProblemInstance, Vector, as_vector
from .functions import ProxFn

MAX_DIM = 3
_CHUNK = 2_000_000


class UnsupportedProblem(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OracleResult:
    theta_bar: float
    x_bar: Vector
    resolution: float
    certified_gap: float
    n_points_per_dim: int
    refine: int = 0

    def to_dict(self) -> dict:
        return {"theta_bar": self.theta_bar, "x_bar": self.x_bar.tolist(),
                "resolution": self.resolution, "certified_gap": self.certified_gap,
                "n_points_per_dim": self.n_points_per_dim, "refine": self.refine}


def _ratio_grid(p: ProblemInstance, axes: list[np.ndarray]) -> np.ndarray:
    shape = tuple(a.size for a in axes)
    out = np.empty(int(np.prod(shape)))
    total = out.size
    for start in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + _CHUNK, total)), shape)
        pts = np.stack([a[i] for a, i in zip(axes, idx)], axis=-1)
        g = p.g.values(pts)
        if np.any(g <= 0):
            bad = pts[np.argmin(g)]
            raise HypothesisViolation(f"g <= 0 at grid node {bad.tolist()}")
        out[start:start + pts.shape[0]] = p.f.values(pts) / g
    return out.reshape(shape)


def _gap(obj: np.ndarray) -> float:
    gap = 0.0
    for ax in range(obj.ndim):
        if obj.shape[ax] > 1:
            gap = max(gap, float(np.max(np.abs(np.diff(obj, axis=ax)))))
    return gap


def grid_minimize(p: ProblemInstance, n_points_per_dim: int, refine: int = 0,
                  zoom: int = 2) -> OracleResult:
    """Minimize f/g over a uniform grid on S.

    Each refinement level spans ``zoom`` grid spacings on either side of the
    incumbent (clipped to S) with the same number of nodes.
    """
    dim = p.dim
    if dim > MAX_DIM:
        raise UnsupportedProblem(f"grid oracle supports dimension <= {MAX_DIM}, got {dim}")
    if n_points_per_dim < 2:
        raise ValueError("n_points_per_dim must be >= 2")
    lo = np.broadcast_to(p.S.lo, (dim,)).astype(float)
    hi = np.broadcast_to(p.S.hi, (dim,)).astype(float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise UnsupportedProblem("grid oracle needs a bounded feasible set")

    best_x, best_val, gap, spacing = None, np.inf, np.inf, np.inf
    for level in range(refine + 1):
        if level > 0:
            lo, hi = (np.maximum(lo_s, best_x - zoom * h), np.minimum(hi_s, best_x + zoom * h))
        else:
            lo_s, hi_s = lo.copy(), hi.copy()
        axes = [np.linspace(lo[i], hi[i], n_points_per_dim) for i in range(dim)]
        h = (hi - lo) / (n_points_per_dim - 1)
        obj = _ratio_grid(p, axes)
        flat = int(np.argmin(obj))
        val = float(obj.flat[flat])
        idx = np.unravel_index(flat, obj.shape)
        x = np.array([axes[i][idx[i]] for i in range(dim)])
        if val < best_val:
            best_x, best_val = x, val
        gap = _gap(obj)
        spacing = float(np.max(h))

    x_bar = as_vector(best_x)
    return OracleResult(theta_bar=p.ratio(x_bar), x_bar=x_bar, resolution=spacing,
                        certified_gap=gap, n_points_per_dim=n_points_per_dim, refine=refine)


def grid_prox(f: ProxFn, y: float, lam: float, n_points: int, lo: float, hi: float) -> float:
    """Grid argmin of f(x) + delta_S(x) + (x - y)^2 / (2 lam) on [lo, hi]."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not lam > 0:
        raise ValueError("lam must be positive")
    xs = np.linspace(lo, hi, n_points)
    obj = f.values(xs[:, None]) + (xs - y) ** 2 / (2.0 * lam)
    inside = (xs >= f.S.lo[0]) & (xs <= f.S.hi[0])
    if not inside.any():
        raise ValueError(f"grid [{lo}, {hi}] does not meet S")
    obj = np.where(inside, obj, np.inf)
    return float(xs[int(np.argmin(obj))])


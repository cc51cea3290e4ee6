"""Post-hoc verification of solver traces.

Every function here is a pure function of (trace, instance, oracle data) and
returns a :class:`Report`.  Proven inequalities are checked with slacks that
only cover floating-point noise (1e-10 per iteration, 1e-8 for accumulated
sums) plus the oracle's certified gap wherever an oracle value enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .core import Curvature, ProblemInstance, RunTrace, Termination, norm
from .oracle import OracleResult

STEP_SLACK = 1e-10
SUM_SLACK = 1e-8
MONOTONE_SLACK = 1e-12
TAIL_TOL = 1e-6


class TraceMismatch(ValueError):
    """A check was asked to verify a trace produced by another solver."""


@dataclass
class Report:
    """Outcome of one check.

    ``status`` is ``"pass"``, ``"fail"`` or ``"vacuous"`` (hypotheses of the
    checked statement do not hold, so nothing is asserted).
    """

    name: str
    status: str
    violations: list[tuple[int, float]] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "passed": self.passed,
                "violations": [{"k": k, "excess": v} for k, v in self.violations[:50]],
                "n_violations": len(self.violations), "metrics": _jsonable(self.metrics),
                "message": self.message}


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        if isinstance(v, float) and not math.isfinite(v):
            v = str(v)
        out[k] = v
    return out


def _report(name: str, violations, metrics=None, message="") -> Report:
    return Report(name, "fail" if violations else "pass", list(violations),
                  metrics or {}, message)


def _require(t: RunTrace, algorithm: str):
    if t.algorithm != algorithm:
        raise TraceMismatch(f"expected a {algorithm} trace, got a {t.algorithm} trace")


def _steps(t: RunTrace) -> np.ndarray:
    """||x^k - x^{k-1}|| recomputed from the stored iterates, k = 1..N."""
    xs = t.iterates
    return np.linalg.norm(np.diff(xs, axis=0), axis=1)


# --------------------------------------------------------------------------

def check_theta_monotone(t: RunTrace, slack: float = MONOTONE_SLACK) -> Report:
    """theta_{k+1} <= theta_k + slack for k = 1..N (theta_{N+1} from the last record)."""
    th = t.thetas
    viol = [(k, float(th[k] - th[k - 1])) for k in range(1, th.size)
            if th[k] > th[k - 1] + slack]
    return _report("theta_monotone", viol, {"n_thetas": int(th.size), "slack": slack})


def check_concave_inequalities(t: RunTrace, p: ProblemInstance) -> Report:
    """Sufficient decrease at every k,

        (th_{k+1} - th_k) g(x^k) + 1.5 L th_k |x^k - x^{k-1}|^2 <= 0,

    and eta_k == 1/(2 L theta_k) to the bit."""
    _require(t, "concave")
    L = p.lipschitz_L
    steps = _steps(t)
    viol, worst, eta_mismatch = [], -math.inf, []
    for i, r in enumerate(t.records):
        lhs = (r.theta_next - r.theta) * r.g_val + 1.5 * L * r.theta * steps[i] ** 2
        worst = max(worst, lhs)
        if lhs > STEP_SLACK:
            viol.append((r.k, lhs))
        if r.eta != 1.0 / (2.0 * L * r.theta):
            eta_mismatch.append((r.k, r.eta - 1.0 / (2.0 * L * r.theta)))
    msg = f"eta recomputation mismatch at k={[k for k, _ in eta_mismatch][:10]}" \
        if eta_mismatch else ""
    return _report("concave_inequalities", viol + eta_mismatch,
                   {"max_lhs": worst, "eta_mismatches": len(eta_mismatch)}, msg)


def check_fejer(t: RunTrace, p: ProblemInstance, xbar: Optional[ArrayLike],
                certified_gap: float = 0.0) -> Report:
    """Distance recursion toward a minimizer xbar:

        (L th_k/2)|dx_k|^2 + L th_{k+1}|xbar - x^k|^2 - L th_k|xbar - x^{k-1}|^2
            <= (th_k - th_{k+1}) M

    with slack 1e-8 + L * certified_gap."""
    if xbar is None:
        raise ValueError("check_fejer needs an oracle point xbar")
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    L, M = p.lipschitz_L, p.bound_M
    slack = SUM_SLACK + L * certified_gap
    xs = t.iterates
    steps = _steps(t)
    viol, worst = [], -math.inf
    for i, r in enumerate(t.records):
        th, th1 = r.theta, r.theta_next
        lhs = (0.5 * L * th * steps[i] ** 2 + L * th1 * norm(xbar - xs[i + 1]) ** 2
               - L * th * norm(xbar - xs[i]) ** 2)
        excess = lhs - (th - th1) * M
        worst = max(worst, excess)
        if excess > slack:
            viol.append((r.k, excess))
    return _report("fejer", viol, {"max_excess": worst, "slack": slack})


def rate_bound(p: ProblemInstance, theta1: float, x0, o: OracleResult, k: int) -> float:
    d = norm(np.asarray(o.x_bar) - np.asarray(x0))
    return theta1 * (p.bound_M + p.lipschitz_L * d * d) / (k * p.g(o.x_bar))


def check_rate_bound(t: RunTrace, p: ProblemInstance, o: OracleResult) -> Report:
    """-gap <= theta_{k+1} - theta_bar <= theta_1 (M + L|xbar - x0|^2) / (k g(xbar)) + gap."""
    if not t.records:
        return Report("rate_bound", "pass", metrics={"tightness": 0.0}, message="empty trace")
    th = t.thetas
    gap = o.certified_gap
    viol, tight = [], 0.0
    for k in range(1, len(t.records) + 1):
        excess = th[k] - o.theta_bar
        b = rate_bound(p, th[0], t.x0, o, k)
        if excess < -gap:
            viol.append((k, excess))
        elif excess > b + gap:
            viol.append((k, excess - b))
        if b > 0:
            tight = max(tight, excess / b)
    return _report("rate_bound", viol,
                   {"tightness": tight, "bound_1": rate_bound(p, th[0], t.x0, o, 1),
                    "certified_gap": gap})


def check_convex_inequalities(t: RunTrace, p: ProblemInstance) -> Report:
    """Sufficient decrease per step, the accumulated energy bound, and the bound on the
    criticality element's norm."""
    _require(t, "convex")
    L, M = p.lipschitz_L, p.bound_M
    xs = t.iterates
    steps = _steps(t)
    viol, energy, worst_c, worst_r = [], 0.0, -math.inf, -math.inf
    for i, r in enumerate(t.records):
        th, th1, eta, s = r.theta, r.theta_next, r.eta, steps[i]
        lhs = (th1 - th) * r.g_val + s * s / eta
        worst_c = max(worst_c, lhs)
        if lhs > STEP_SLACK:
            viol.append((r.k, lhs))
        energy += s * s / eta
        gk = norm(p.g.grad(xs[i + 1]))
        bound = ((1.0 / eta + th * L) * s + (th - th1) * gk) / r.g_val
        worst_r = max(worst_r, r.residual_norm - bound)
        if r.residual_norm > bound + STEP_SLACK:
            viol.append((r.k, r.residual_norm - bound))
    energy_cap = (t.thetas[0] - t.theta_final) * M if t.records else 0.0
    if energy > energy_cap + SUM_SLACK:
        viol.append((len(t.records), energy - energy_cap))
    return _report("convex_inequalities", viol,
                   {"max_decrease_lhs": worst_c, "energy": energy, "energy_cap": energy_cap,
                    "max_residual_excess": worst_r})


# --------------------------------------------------------------------------
# Real-sequence lemmas
# --------------------------------------------------------------------------

def _summable(v: np.ndarray) -> bool:
    """Empirical l1 test: the last half contributes almost nothing."""
    v = np.abs(v)
    total = float(v.sum())
    tail = float(v[v.size // 2:].sum())
    return tail <= max(SUM_SLACK, 1e-3 * total)


def check_sequence_lemmas(a: ArrayLike, b: ArrayLike, eps: ArrayLike,
                          slack: float = STEP_SLACK) -> Report:
    """Test the two summability lemmas on finite sequences.

    Additive form: a bounded below, b >= 0, eps in l1 and
    a_{k+1} - a_k + b_k <= eps_k  =>  a converges and b is in l1.

    Contractive form: a, eps >= 0, eps in l1 and a_{k+1} <= q a_k + eps_k with
    q < 1  =>  a is in l1.  Here q is the smallest factor consistent with the
    data.

    Convergence is judged by the oscillation of the last half of `a`
    (< 1e-8); membership in l1 by the weight of the last half of the sum.
    """
    a, b, eps = (np.asarray(v, dtype=float).reshape(-1) for v in (a, b, eps))
    if not (a.size == b.size == eps.size):
        raise ValueError(f"length mismatch: {a.size}, {b.size}, {eps.size}")
    n = a.size
    if n < 2:
        return Report("sequence_lemmas", "vacuous", message="fewer than two terms")
    finite = bool(np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(eps)))
    eps_l1 = _summable(eps)
    metrics: dict = {"eps_summable": eps_l1}
    outcomes = []

    rec_gap = a[1:] - a[:-1] + b[:-1] - eps[:-1]
    additive = finite and bool(np.all(b >= -slack)) and eps_l1 and bool(np.all(rec_gap <= slack))
    metrics["additive_hypotheses"] = additive
    if additive:
        tail = a[n // 2:]
        osc = float(tail.max() - tail.min())
        ok = osc < SUM_SLACK and _summable(b)
        metrics.update(a_tail_oscillation=osc, b_partial_sum=float(b.sum()))
        outcomes.append(ok)

    pos = a[:-1] > 0
    q = float(np.max((a[1:][pos] - eps[:-1][pos]) / a[:-1][pos])) if pos.any() else 0.0
    if pos.size and np.any(~pos & (a[1:] > eps[:-1] + slack)):
        q = math.inf
    contractive = (finite and bool(np.all(a >= -slack)) and bool(np.all(eps >= -slack))
                   and eps_l1 and q < 1)
    metrics.update(contractive_hypotheses=contractive, contraction=q)
    if contractive:
        ok = _summable(a)
        metrics["a_partial_sum"] = float(a.sum())
        outcomes.append(ok)

    if not outcomes:
        return Report("sequence_lemmas", "vacuous", metrics=metrics,
                      message="hypotheses of neither lemma hold; conclusions not asserted")
    status = "pass" if all(outcomes) else "fail"
    return Report("sequence_lemmas", status, [] if status == "pass" else [(n, 0.0)], metrics)


def fejer_sequences(t: RunTrace, p: ProblemInstance, xbar: ArrayLike):
    """(a_k, b_k, eps_k) from a concave trace, k = 1..N:
    a_k = L th_k |xbar - x^{k-1}|^2, b_k = (L th_k / 2)|x^k - x^{k-1}|^2,
    eps_k = (th_k - th_{k+1}) M."""
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    L, M = p.lipschitz_L, p.bound_M
    xs = t.iterates
    th = t.thetas
    steps = _steps(t)
    dist = np.linalg.norm(xs[:-1] - xbar, axis=1)
    a = L * th[:-1] * dist ** 2
    b = 0.5 * L * th[:-1] * steps ** 2
    eps = (th[:-1] - th[1:]) * M
    return a, b, eps


def check_cauchy_tail(t: RunTrace, window: int, tol: float = TAIL_TOL) -> Report:
    """Sum of step norms over the last `window` records must be < `tol`.

    A trace stopped by OptimalValueZero sits at a minimizer of f, where the
    iteration is stationary; such a trace is treated as continuing with zero
    steps when it is shorter than ``2 * window``.
    """
    n = len(t.records)
    steps = np.array([r.step_norm for r in t.records])
    if n < 2 * window:
        if t.termination is not Termination.OPTIMAL_VALUE_ZERO:
            raise ValueError(f"trace of length {n} is too short for window {window}")
        steps = np.concatenate([steps, np.zeros(2 * window - n)])
    tail = float(steps[-window:].sum())
    viol = [(n, tail)] if not tail < tol else []
    return _report("cauchy_tail", viol, {"tail_sum": tail, "window": window,
                                         "total_length": float(steps.sum())})


def check_residual_tail(t: RunTrace, tol: float = TAIL_TOL) -> Report:
    """Final criticality residual below `tol` (convex traces)."""
    _require(t, "convex")
    final = t.records[-1].residual_norm if t.records else 0.0
    viol = [(len(t.records), final)] if not final < tol else []
    return _report("residual_tail", viol, {"final_residual": final})


def applicable_checks(t: RunTrace, p: ProblemInstance,
                      o: Optional[OracleResult] = None) -> list[Report]:
    """All proven-inequality checks that apply to this trace."""
    reports = [check_theta_monotone(t, 1e-8 if t.algorithm == "dinkelbach" else MONOTONE_SLACK)]
    if t.algorithm == "concave":
        reports.append(check_concave_inequalities(t, p))
        if o is not None:
            reports.append(check_fejer(t, p, o.x_bar, o.certified_gap))
            reports.append(check_rate_bound(t, p, o))
    elif t.algorithm == "convex":
        reports.append(check_convex_inequalities(t, p))
    return reports


def informational_checks(t: RunTrace, p: ProblemInstance,
                         o: Optional[OracleResult] = None) -> list[Report]:
    """Empirical surrogates for infinite-horizon statements; they depend on the
    run having converged within its budget and do not gate verification."""
    out = []
    n = len(t.records)
    if t.algorithm == "concave" and o is not None and n >= 2:
        a, b, eps = fejer_sequences(t, p, o.x_bar)
        out.append(check_sequence_lemmas(a, b, eps, slack=SUM_SLACK + p.lipschitz_L * o.certified_gap))
    if t.termination is Termination.OPTIMAL_VALUE_ZERO:
        out.append(check_cauchy_tail(t, max(1, n)))
    elif n >= 3:
        out.append(check_cauchy_tail(t, max(1, n // 2 - 1)))
    if t.algorithm == "convex" and p.curvature is Curvature.CONVEX:
        out.append(check_residual_tail(t))
    return out

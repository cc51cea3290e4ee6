"""Command-line interface.

Subcommands: ``solve``, ``verify``, ``compare``, ``oracle``, ``sweep``.

Exit codes: 0 success, 1 configuration error (including a violated step
safeguard or a trace/solver mismatch), 2 hypothesis violation during a
solve, 3 I/O error, 4 at least one verification check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import diagnostics
from .config import (ConfigError, RunConfig, build_inner, build_params, build_policy,
                     build_problem, load_config)
from .core import (ConfigurationError, Curvature, HypothesisViolation, RunTrace,
                   stop_reason, validate_instance)
from .dinkelbach import run_dinkelbach
from .oracle import UnsupportedProblem, grid_minimize
from .solver_concave import run_concave
from .solver_convex import run_convex
from .traceio import read_trace_csv, summary_dict, trace_to_csv, write_json

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_IO, EXIT_CHECK = 0, 1, 2, 3, 4


def _err(msg: str):
    print(f"error: {msg}", file=sys.stderr)


def solve_config(cfg: RunConfig, assert_mode: bool = False) -> RunTrace:
    """Validate the instance and run the configured solver."""
    p = build_problem(cfg)
    rep = validate_instance(p, seed=cfg.seed)
    if not rep.passed:
        names = ", ".join(f"{c.name} ({c.detail})" for c in rep.failures)
        raise HypothesisViolation(f"instance validation failed: {names}")
    params = build_params(cfg, assert_mode)
    algo = cfg.solver.algorithm
    if algo == "concave":
        if p.curvature is not Curvature.CONCAVE:
            raise ConfigError("algorithm 'concave' needs a concave-tagged problem")
        return run_concave(p, params)
    if algo == "convex":
        if p.curvature is not Curvature.CONVEX:
            raise ConfigError("algorithm 'convex' needs a convex-tagged problem")
        return run_convex(p, build_policy(cfg), params)
    return run_dinkelbach(p, params, build_inner(cfg))


def _load(path) -> RunConfig:
    return load_config(path)


def cmd_solve(config_path, out_trace_path=None, out_summary_path=None,
              assert_mode: bool = False) -> int:
    try:
        cfg = _load(config_path)
        t = solve_config(cfg, assert_mode)
    except (ConfigError, ConfigurationError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        _err(str(exc))
        return EXIT_HYPOTHESIS
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    summary = summary_dict(t)
    try:
        if out_trace_path:
            Path(out_trace_path).write_text(trace_to_csv(t))
        if out_summary_path:
            write_json(summary, out_summary_path)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    print(f"{t.algorithm}: {summary['termination']} after {summary['iterations']} "
          f"iterations, theta_final={summary['theta_final']:.12g}")
    return EXIT_OK


def cmd_verify(config_path, trace_path, report_path=None) -> int:
    try:
        cfg = _load(config_path)
        p = build_problem(cfg)
        t = read_trace_csv(trace_path, cfg.x0)
    except (ConfigError, ConfigurationError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO

    algo = cfg.solver.algorithm
    expected = "convex" if algo == "convex" else "concave"
    if t.records and t.algorithm != expected:
        _err(f"trace looks like a {t.algorithm} trace but the config runs '{algo}'")
        return EXIT_CONFIG
    t.algorithm = algo
    if t.records:
        last = t.records[-1]
        reason = stop_reason(build_params(cfg), last.k, last.theta, last.theta_next,
                             last.step_norm)
        if reason is not None:
            t.termination = reason

    oracle = None
    if cfg.oracle is not None:
        try:
            oracle = grid_minimize(p, cfg.oracle.n_points_per_dim, cfg.oracle.refine)
        except UnsupportedProblem as exc:
            _err(str(exc))
            return EXIT_CONFIG
    gating = diagnostics.applicable_checks(t, p, oracle)
    info = diagnostics.informational_checks(t, p, oracle)
    passed = all(r.passed for r in gating)
    report = {"passed": passed, "checks": [r.to_dict() for r in gating],
              "informational": [r.to_dict() for r in info],
              "oracle": oracle.to_dict() if oracle else None}
    for r in gating:
        extra = ""
        if r.name == "rate_bound":
            extra = f" tightness={r.metrics['tightness']:.4g}"
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}{extra}")
    for r in info:
        print(f"info {r.name}: {r.status}")
    if report_path:
        try:
            write_json(report, report_path)
        except OSError as exc:
            _err(str(exc))
            return EXIT_IO
    return EXIT_OK if passed else EXIT_CHECK


def compare_config(cfg: RunConfig) -> dict:
    p = build_problem(cfg)
    if p.curvature is not Curvature.CONCAVE:
        raise ConfigError("compare needs a concave-tagged problem")
    params = build_params(cfg)
    a = run_concave(p, params)
    d = run_dinkelbach(p, params, build_inner(cfg))
    rows = []
    for t in (a, d):
        rows.append({"algorithm": t.algorithm, "outer_iterations": len(t.records),
                     "prox_evaluations": t.prox_evaluations, "theta_final": t.theta_final,
                     "termination": t.termination.value})
    out = {"rows": rows, "theta_diff": abs(a.theta_final - d.theta_final)}
    if d.prox_evaluations <= a.prox_evaluations:
        out["note"] = "the parametric baseline used no more prox evaluations on this instance"
    return out


def cmd_compare(config_path, report_path=None) -> int:
    try:
        cfg = _load(config_path)
        res = compare_config(cfg)
    except (ConfigError, ConfigurationError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        _err(str(exc))
        return EXIT_HYPOTHESIS
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    print(f"{'algorithm':<12}{'outer':>8}{'prox':>10}{'theta_final':>24}  termination")
    for r in res["rows"]:
        print(f"{r['algorithm']:<12}{r['outer_iterations']:>8}{r['prox_evaluations']:>10}"
              f"{r['theta_final']:>24.17g}  {r['termination']}")
    print(f"|theta_final difference| = {res['theta_diff']:.3e}")
    if "note" in res:
        print(f"note: {res['note']}")
    if report_path:
        write_json(res, report_path)
    return EXIT_OK


def cmd_oracle(config_path, report_path=None) -> int:
    try:
        cfg = _load(config_path)
        p = build_problem(cfg)
        oc = cfg.oracle
        o = grid_minimize(p, oc.n_points_per_dim if oc else 100_001, oc.refine if oc else 0)
    except (ConfigError, UnsupportedProblem) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        _err(str(exc))
        return EXIT_HYPOTHESIS
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    print(json.dumps(o.to_dict(), indent=2))
    if report_path:
        write_json(o.to_dict(), report_path)
    return EXIT_OK


def _sweep_one(args) -> tuple[str, str, int]:
    config_path, out_dir, assert_mode = args
    try:
        key = _load(config_path).digest()
    except (ConfigError, OSError) as exc:
        _err(f"{config_path}: {exc}")
        return str(config_path), "", EXIT_CONFIG
    out = Path(out_dir)
    code = cmd_solve(config_path, out / f"{key}.csv", out / f"{key}.summary.json", assert_mode)
    return str(config_path), key, code


def cmd_sweep(config_paths: Sequence, out_dir, jobs: int = 1, assert_mode: bool = False) -> int:
    """Solve a batch of configs; outputs are keyed by the config digest."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    tasks = [(str(c), str(out_dir), assert_mode) for c in config_paths]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    index = {path: {"key": key, "exit_code": code} for path, key, code in results}
    write_json(index, Path(out_dir) / "index.json")
    return max((code for _, _, code in results), default=EXIT_OK)


def print_config(config_path: Optional[str]) -> int:
    if config_path:
        try:
            cfg = _load(config_path)
        except (ConfigError, OSError) as exc:
            _err(str(exc))
            return EXIT_CONFIG
    else:
        cfg = RunConfig(problem="P1").resolved()
    print(json.dumps(cfg.model_dump(mode="json"), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracprox",
                                 description="Proximal-gradient solvers for fractional programs.")
    ap.add_argument("--print-config", action="store_true",
                    help="print the fully-defaulted configuration and exit")
    ap.add_argument("--config", help="config file (used with --print-config)")
    sub = ap.add_subparsers(dest="command")

    s = sub.add_parser("solve", help="run a solver and write the trace")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="trace CSV path")
    s.add_argument("--summary", help="summary JSON path")
    s.add_argument("--assert-mode", action="store_true",
                   help="check per-iteration inequalities while solving")

    v = sub.add_parser("verify", help="check a trace against every applicable inequality")
    v.add_argument("--config", required=True)
    v.add_argument("--trace", required=True)
    v.add_argument("--report", help="report JSON path")

    c = sub.add_parser("compare", help="direct method vs. parametric baseline")
    c.add_argument("--config", required=True)
    c.add_argument("--report")

    o = sub.add_parser("oracle", help="grid-search ground truth")
    o.add_argument("--config", required=True)
    o.add_argument("--report")

    w = sub.add_parser("sweep", help="solve a batch of configs")
    w.add_argument("--config", required=True, nargs="+")
    w.add_argument("--out", required=True, help="output directory")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--assert-mode", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.print_config:
        return print_config(args.config)
    if args.command == "solve":
        return cmd_solve(args.config, args.out, args.summary, args.assert_mode)
    if args.command == "verify":
        return cmd_verify(args.config, args.trace, args.report)
    if args.command == "compare":
        return cmd_compare(args.config, args.report)
    if args.command == "oracle":
        return cmd_oracle(args.config, args.report)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.out, args.jobs, args.assert_mode)
    ap.print_help()
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

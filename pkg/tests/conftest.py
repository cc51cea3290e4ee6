import functools

import pytest

from fracprox import (SolverParams, StepPolicy, catalog_problem, grid_minimize, run_concave,
                      run_convex, run_dinkelbach)


@functools.lru_cache(maxsize=None)
def cached_trace(name, algorithm="concave", max_iter=500, x0=None):
    p = catalog_problem(name, None if x0 is None else list(x0))
    params = SolverParams(max_iter=max_iter)
    if algorithm == "concave":
        return run_concave(p, params)
    if algorithm == "convex":
        return run_convex(p, StepPolicy.constant(1.0), params)
    return run_dinkelbach(p, params)


@functools.lru_cache(maxsize=None)
def cached_oracle(name):
    n, refine = {"P1": (1_000_001, 0), "P2": (1001, 2), "P3": (1_000_001, 0),
                 "P4": (1_000_001, 0)}[name]
    return grid_minimize(catalog_problem(name), n, refine)


@pytest.fixture
def trace():
    return cached_trace


@pytest.fixture
def oracle():
    return cached_oracle


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(results, key=int):
        ok, detail = results[cid]
        terminalreporter.write_line(f"{cid}: {'PASS' if ok else 'FAIL'}  {detail}")

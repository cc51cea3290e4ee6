"""Trace CSV and summary documents.

Floats are written with 17 significant digits, which round-trips every
64-bit value exactly, so a trace read back verifies identically to the
in-memory one.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import IterationRecord, RunTrace, Termination, as_vector

FIXED_COLUMNS = ["k", "theta", "eta", "f_val", "g_val", "step_norm", "residual_norm"]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def trace_to_csv(t: RunTrace) -> str:
    dim = t.x0.size
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIXED_COLUMNS + [f"x{i}" for i in range(dim)])
    for r in t.records:
        w.writerow([str(r.k)] + [_fmt(v) for v in (r.theta, r.eta, r.f_val, r.g_val,
                                                  r.step_norm, r.residual_norm)]
                   + [_fmt(v) for v in r.x])
    return buf.getvalue()


def write_trace_csv(t: RunTrace, path: Union[str, Path]):
    Path(path).write_text(trace_to_csv(t))


def read_trace_csv(path: Union[str, Path], x0, algorithm: Optional[str] = None,
                   termination: Termination = Termination.MAX_ITER) -> RunTrace:
    """Rebuild a trace; `x0` is not part of the CSV and must come from the config.

    When `algorithm` is None it is inferred: any nonzero residual means the
    convex solver, otherwise the concave one.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:len(FIXED_COLUMNS)] != FIXED_COLUMNS:
        raise ValueError(f"{path}: not a trace file (bad header)")
    records = []
    for row in rows[1:]:
        vals = [float(v) for v in row[1:]]
        records.append(IterationRecord(k=int(row[0]), theta=vals[0], eta=vals[1],
                                       f_val=vals[2], g_val=vals[3], step_norm=vals[4],
                                       residual_norm=vals[5], x=as_vector(vals[6:])))
    if algorithm is None:
        algorithm = infer_algorithm(records)
    return RunTrace(records=records, termination=termination, x0=as_vector(x0),
                    algorithm=algorithm)


def infer_algorithm(records) -> str:
    return "convex" if any(r.residual_norm != 0.0 for r in records) else "concave"


def summary_dict(t: RunTrace) -> dict:
    return {"theta_final": t.theta_final, "x_final": np.asarray(t.x_final).tolist(),
            "termination": t.termination.value, "iterations": len(t.records),
            "wall_time": t.wall_time, "algorithm": t.algorithm,
            "prox_evaluations": t.prox_evaluations, "notes": list(t.notes)}


def write_json(obj: dict, path: Union[str, Path]):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")

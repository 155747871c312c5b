from __future__ import annotations

import logging
import time
from dataclasses import replace

from ..runtime import Runtime
from .experiment import VERSIONS, Experiment, ResultRow, write_results
from .programs import make_program

log = logging.getLogger(__name__)

SWEEPS = ("granularity", "chunksize", "strong", "depmode")


def run_experiment(exp: Experiment, trace_path=None, keep_trace=False):
    """Time ``exp.reps`` repetitions, validate against the serial oracle.

    Returns ``(row, program, trace)``.  Validation failures raise before any
    row exists.
    """
    program = make_program(exp)
    config = exp.runtime_config()
    if trace_path is not None or keep_trace:
        config = config.with_(trace=True)
    times = []
    with Runtime(config) as rt:
        for _ in range(exp.reps):
            program.reset()
            t0 = time.perf_counter()
            program.spawn_rep(rt)
            rt.taskwait()
            times.append(time.perf_counter() - t0)
    trace = rt.trace
    if trace_path is not None:
        trace.to_csv(trace_path)
    program.validate()
    row = ResultRow.from_times(exp, times, program.work_per_rep())
    log.info("%s/%s ps=%d ts=%d: mean %.4fs", exp.benchmark, exp.version, exp.ps, exp.ts, row.mean_s)
    return row, program, trace


def bench(exp: Experiment, trace_path=None) -> ResultRow:
    return run_experiment(exp, trace_path)[0]


def sweep(kind: str, base: Experiment, points=None, versions=None, results_path=None):
    """One row per (point, version).

    ``granularity`` varies TS, ``chunksize`` varies CS, ``strong`` varies the
    worker count and ``depmode`` runs the same program under each dependence
    mode (points default to both).
    """
    if kind not in SWEEPS:
        raise ValueError(f"unknown sweep {kind!r}; pick one of {SWEEPS}")
    versions = list(versions or [base.version])
    for v in versions:
        if v not in VERSIONS:
            raise ValueError(f"unknown version {v!r}")
    if kind == "depmode":
        points = list(points or ["discrete", "region"])
    elif not points:
        raise ValueError(f"{kind} sweep needs points")

    experiments = []
    for p in points:
        for v in versions:
            if kind == "granularity":
                cs = base.cs if base.cs is not None and base.cs <= p else None
                exp = replace(base, ts=int(p), cs=cs, version=v)
            elif kind == "chunksize":
                exp = replace(base, cs=int(p), version=v)
            elif kind == "strong":
                exp = replace(base, workers=int(p), version=v)
            else:
                exp = replace(base, deps=str(p), version=v)
            exp.validate()
            experiments.append(exp)

    rows = []
    for exp in experiments:
        row = bench(exp)
        if kind == "depmode":
            row.version = f"{exp.version}:{exp.deps}"
        rows.append(row)
    if results_path is not None:
        write_results(rows, results_path)
    return rows

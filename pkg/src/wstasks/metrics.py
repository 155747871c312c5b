"""Post-hoc analysis of execution traces (live or loaded from CSV)."""
from __future__ import annotations

import csv
import io

from .errors import MalformedTrace
from .trace import ExecutionTrace


def _intervals(trace: ExecutionTrace):
    """Busy intervals per worker; raises MalformedTrace on unpaired events."""
    open_tasks: dict[tuple[int, int], int] = {}
    open_chunks: dict[tuple[int, int, int, int], int] = {}
    busy: dict[int, list[tuple[int, int]]] = {}
    for e in trace:
        if e.kind == "TaskStart":
            key = (e.worker, e.task)
            if key in open_tasks:
                raise MalformedTrace(f"task {e.task} started twice on worker {e.worker}")
            open_tasks[key] = e.timestamp
        elif e.kind == "TaskEnd":
            t0 = open_tasks.pop((e.worker, e.task), None)
            if t0 is None:
                raise MalformedTrace(f"TaskEnd without TaskStart for task {e.task}")
            busy.setdefault(e.worker, []).append((t0, e.timestamp))
        elif e.kind == "ChunkAssign":
            open_chunks[(e.worker, e.task, e.lo, e.hi)] = e.timestamp
        elif e.kind == "ChunkDone":
            t0 = open_chunks.pop((e.worker, e.task, e.lo, e.hi), None)
            if t0 is None:
                raise MalformedTrace(f"ChunkDone without ChunkAssign for task {e.task}")
            busy.setdefault(e.worker, []).append((t0, e.timestamp))
    if open_tasks or open_chunks:
        raise MalformedTrace(f"unfinished work in trace: {list(open_tasks) + list(open_chunks)}")
    return busy


def check_well_formed(trace: ExecutionTrace) -> None:
    """Per-worker timestamps non-decreasing and every start/assign paired."""
    last: dict[int, int] = {}
    for e in trace:
        if e.timestamp < last.get(e.worker, e.timestamp):
            raise MalformedTrace(f"worker {e.worker} timestamps go backwards at {e}")
        last[e.worker] = e.timestamp
    _intervals(trace)


def _union_length(spans) -> int:
    total, cur_lo, cur_hi = 0, None, None
    for lo, hi in sorted(spans):
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def utilization(trace: ExecutionTrace, workers=None) -> dict[int, float]:
    """Busy fraction of the run's wall time for each worker.

    Busy time counts regular task bodies and executed chunk batches.  Nested
    intervals (a task run while its worker helps inside a taskwait) are
    counted once.
    """
    busy = _intervals(trace)
    if workers is None:
        workers = sorted(set(trace.workers) | set(busy))
    if not len(trace):
        return {w: 0.0 for w in workers}
    stamps = [e.timestamp for e in trace]
    wall = max(stamps) - min(stamps)
    if wall <= 0:
        return {w: 0.0 for w in workers}
    return {w: min(1.0, _union_length(busy.get(w, ())) / wall) for w in workers}


def detect_pipelining(trace: ExecutionTrace) -> list[tuple[int, int, int]]:
    """Workers that started a new worksharing region before an old one was released.

    Returns ``(worker, region_a, region_b)`` for every worker that executed a
    batch of ``region_a`` and later received a batch of ``region_b`` while
    ``region_a``'s dependences were still held.
    """
    released = trace.release_time()
    found = []
    seen = set()
    for worker, events in sorted(trace.by_worker().items()):
        visited: list[int] = []
        for e in events:
            if e.kind != "ChunkAssign":
                continue
            for a in visited:
                if a != e.task and released.get(a, float("inf")) > e.timestamp:
                    key = (worker, a, e.task)
                    if key not in seen:
                        seen.add(key)
                        found.append(key)
            if e.task not in visited:
                visited.append(e.task)
    return found


def export_dag(trace: ExecutionTrace, dest=None) -> str:
    """Dependence edges as CSV ``pred,succ`` (header included)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("pred", "succ"))
    w.writerows(trace.dag_edges())
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w", newline="") as f:
            f.write(text)
    return text


def release_counts(trace: ExecutionTrace) -> dict[int, int]:
    out: dict[int, int] = {}
    for e in trace.of_kind("Release"):
        out[e.task] = out.get(e.task, 0) + 1
    return out


def dependence_violations(trace: ExecutionTrace, edges=None) -> list[tuple[int, int]]:
    """Edges whose successor started before the predecessor's release."""
    edges = trace.dag_edges() if edges is None else edges
    rel, start = trace.release_time(), trace.start_time()
    return [(p, s) for p, s in edges
            if p not in rel or s not in start or start[s] < rel[p]]


def batch_sizes(trace: ExecutionTrace, task: int) -> list[int]:
    """Iteration counts of a worksharing task's batches, in assignment order."""
    return [e.hi - e.lo for e in trace.of_kind("ChunkAssign") if e.task == task]


def idle_gaps(trace: ExecutionTrace) -> dict[int, int]:
    """Idle events between a worker's first chunk/task start and its last end."""
    out = {}
    for w, events in trace.by_worker().items():
        if w < 0:
            continue
        work = [i for i, e in enumerate(events)
                if e.kind in ("ChunkAssign", "ChunkDone", "TaskStart", "TaskEnd")]
        if not work:
            out[w] = 0
            continue
        out[w] = sum(1 for e in events[work[0]:work[-1]] if e.kind == "Idle")
    return out

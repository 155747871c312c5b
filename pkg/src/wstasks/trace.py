"""Timestamped execution events and their CSV form.

CSV columns are ``timestamp_ns,worker,event,task,lo,hi``.  Worker ``-1`` is
the main (program) thread.  Empty ``lo``/``hi`` cells mean "not applicable".

Event kinds and what the optional columns carry:

=============  ======================================================
RuntimeStart   first event of a run
RuntimeStop    last event of a run
Spawn          task created by context ``lo`` (-1 = main program)
SpawnWS        worksharing task created by context ``lo``; hi = iterations
Dep            ``task`` waits for predecessor ``lo``
Enqueue        task entered the ready queue; lo = priority
Dequeue        task left the ready queue; lo = priority
Bypass         task handed straight to the releasing worker; lo = priority
TaskStart      regular task body starts
TaskEnd        regular task body returned
ChunkAssign    batch [lo, hi) of a worksharing task given to the worker
ChunkDone      that batch has executed
Release        dependences of ``task`` released by ``worker``
Idle           worker ran out of work after executing something
=============  ======================================================

Run-level facts (worker count, teams, CPU affinities) live in
``ExecutionTrace.header``; they are not part of the CSV event stream.
"""
from __future__ import annotations

import csv
import io
import threading
import time
from typing import NamedTuple, Optional

COLUMNS = ("timestamp_ns", "worker", "event", "task", "lo", "hi")

EVENT_KINDS = (
    "RuntimeStart", "RuntimeStop", "Spawn", "SpawnWS", "Dep",
    "Enqueue", "Dequeue", "Bypass", "TaskStart", "TaskEnd", "ChunkAssign",
    "ChunkDone", "Release", "Idle",
)


class TraceEvent(NamedTuple):
    timestamp: int
    worker: int
    kind: str
    task: int
    lo: Optional[int] = None
    hi: Optional[int] = None


class Tracer:
    """Collects events into per-thread buffers; merged once at the end."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._local = threading.local()
        self._buffers: list[list] = []
        self._lock = threading.Lock()
        self.now = time.perf_counter_ns

    def _buffer(self):
        buf = getattr(self._local, "buf", None)
        if buf is None:
            buf = self._local.buf = []
            self._local.last = 0
            with self._lock:
                self._buffers.append(buf)
        return buf

    def emit(self, kind, worker, task=-1, lo=None, hi=None, ts=None):
        if not self.enabled:
            return
        buf = self._buffer()
        if ts is None:
            ts = self.now()
        # explicit stamps may run a few ns ahead of the clock; keep per-thread order
        if ts < self._local.last:
            ts = self._local.last
        self._local.last = ts
        buf.append(TraceEvent(ts, worker, kind, task, lo, hi))

    def collect(self, header=None) -> "ExecutionTrace":
        with self._lock:
            events = [e for buf in self._buffers for e in buf]
        events.sort(key=lambda e: e.timestamp)
        return ExecutionTrace(events, header)


class ExecutionTrace:
    def __init__(self, events=(), header=None):
        self.events: list[TraceEvent] = list(events)
        self.header: dict = dict(header or {})

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, *kinds):
        return [e for e in self.events if e.kind in kinds]

    def by_worker(self) -> dict[int, list[TraceEvent]]:
        out: dict[int, list[TraceEvent]] = {}
        for e in self.events:
            out.setdefault(e.worker, []).append(e)
        return out

    @property
    def workers(self) -> list[int]:
        if "workers" in self.header:
            return list(range(self.header["workers"]))
        return sorted({e.worker for e in self.events if e.worker >= 0})

    def affinities(self) -> dict[int, int]:
        return dict(self.header.get("affinity", {}))

    def dag_edges(self) -> list[tuple[int, int]]:
        return [(e.lo, e.task) for e in self.of_kind("Dep")]

    def worksharing_tasks(self) -> set[int]:
        return {e.task for e in self.of_kind("SpawnWS")}

    def release_time(self) -> dict[int, int]:
        return {e.task: e.timestamp for e in self.of_kind("Release")}

    def start_time(self) -> dict[int, int]:
        """First instant a task's work began: TaskStart or its first ChunkAssign."""
        out: dict[int, int] = {}
        for e in self.events:
            if e.kind in ("TaskStart", "ChunkAssign") and e.task not in out:
                out[e.task] = e.timestamp
        return out

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for e in self.events:
            w.writerow([e.timestamp, e.worker, e.kind, e.task,
                        "" if e.lo is None else e.lo, "" if e.hi is None else e.hi])
        text = buf.getvalue()
        if dest is not None:
            if hasattr(dest, "write"):
                dest.write(text)
            else:
                with open(dest, "w", newline="") as f:
                    f.write(text)
        return text

    @classmethod
    def from_csv(cls, src) -> "ExecutionTrace":
        if hasattr(src, "read"):
            text = src.read()
        elif isinstance(src, str) and src.startswith(COLUMNS[0]):
            text = src
        else:
            with open(src, newline="") as f:
                text = f.read()
        rows = csv.reader(io.StringIO(text))
        header = next(rows)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected trace header {header}")

        def opt(v):
            return int(v) if v != "" else None

        return cls(TraceEvent(int(r[0]), int(r[1]), r[2], int(r[3]), opt(r[4]), opt(r[5]))
                   for r in rows if r)

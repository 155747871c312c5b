"""Ready queue and work dispatch.

One global priority queue feeds every worker.  Worksharing tasks are
installed on the dequeuing worker's team; teammates join that region before
looking at the queue again.
"""
from __future__ import annotations

import heapq
import itertools
import threading
from dataclasses import dataclass
from typing import Optional, Union

from .worksharing import Team, WorksharingRegion


class ReadyQueue:
    """Max-priority queue; equal priorities come out in enqueue order."""

    def __init__(self):
        self._heap = []
        self._seq = itertools.count()

    def push(self, task, seq: Optional[int] = None) -> int:
        if seq is None:
            seq = next(self._seq)
        heapq.heappush(self._heap, (-task.priority, seq, task))
        return seq

    def pop(self):
        if not self._heap:
            return None, None
        _, seq, task = heapq.heappop(self._heap)
        return task, seq

    def __len__(self):
        return len(self._heap)

    def priorities(self):
        return [-p for p, _, _ in self._heap]


@dataclass(frozen=True)
class RegularAssignment:
    task: object


@dataclass(frozen=True)
class WorksharingJoin:
    region: WorksharingRegion

    @property
    def task(self):
        return self.region.task


Work = Union[RegularAssignment, WorksharingJoin, None]


class _NullTracer:
    def emit(self, *args, **kwargs):
        pass

    def now(self):
        return 0


class Scheduler:
    """``workers`` maps worker id -> object with ``id`` and ``team``."""

    def __init__(self, teams, tracer=None):
        self.teams: list[Team] = list(teams)
        self.queue = ReadyQueue()
        self.lock = threading.Lock()
        self.work_available = threading.Condition(threading.Lock())
        self.tracer = tracer or _NullTracer()
        self._last_ts = 0
        self.enqueued = 0
        self.bypassed = 0

    def _stamp(self) -> int:
        # Queue events get strictly increasing stamps so the queue contents
        # can be replayed exactly from the trace.  Caller holds self.lock.
        ts = self.tracer.now()
        if ts <= self._last_ts:
            ts = self._last_ts + 1
        self._last_ts = ts
        return ts

    def _notify(self):
        with self.work_available:
            self.work_available.notify_all()

    def enqueue(self, task, worker: int = -1) -> None:
        with self.lock:
            self.queue.push(task)
            self.enqueued += 1
            self.tracer.emit("Enqueue", worker, task.id, task.priority, None, ts=self._stamp())
        self._notify()

    def _dequeue(self, worker: int):
        with self.lock:
            task, seq = self.queue.pop()
            if task is not None:
                self.tracer.emit("Dequeue", worker, task.id, task.priority, None, ts=self._stamp())
            return task, seq

    def _install(self, task, team: Team) -> WorksharingRegion:
        # caller holds team.lock
        region = WorksharingRegion(task, team)
        if not region.exhausted:
            team.current = region
        return region

    def next_work(self, worker) -> Work:
        team = worker.team
        with team.lock:
            region = team.current
            if region is not None and region.has_work_for(worker.id):
                return WorksharingJoin(region)
            task, seq = self._dequeue(worker.id)
            if task is None:
                return None
            if not task.is_worksharing:
                return RegularAssignment(task)
            if team.current is not None:
                # a static region still owns the slot; hand the task back untouched
                with self.lock:
                    self.queue.push(task, seq)
                    self.tracer.emit("Enqueue", worker.id, task.id, task.priority, None,
                                     ts=self._stamp())
                return None
            region = self._install(task, team)
        self._notify()
        return WorksharingJoin(region)

    def on_finish(self, ready: list, worker) -> Work:
        """Immediate successor: keep the earliest newly-ready task on this worker."""
        if not ready:
            return None
        first, rest = ready[0], ready[1:]
        for t in rest:
            self.enqueue(t, worker.id)
        if not first.is_worksharing:
            self.bypassed += 1
            self.tracer.emit("Bypass", worker.id, first.id, first.priority, None)
            return RegularAssignment(first)
        team = worker.team
        with team.lock:
            if team.current is None:
                region = self._install(first, team)
                self.bypassed += 1
                self.tracer.emit("Bypass", worker.id, first.id, first.priority, None)
                installed = True
            else:
                installed = False
        if not installed:
            self.enqueue(first, worker.id)
            return None
        self._notify()
        return WorksharingJoin(region)

    def wait_for_work(self, timeout: float) -> None:
        with self.work_available:
            self.work_available.wait(timeout)

    def idle(self) -> bool:
        with self.lock:
            if len(self.queue):
                return False
        return all(t.current is None for t in self.teams)

"""Worker threads: pinning, the main loop, and regular/worksharing execution."""
from __future__ import annotations

import logging
import os
import threading
import time

from .scheduler import RegularAssignment, WorksharingJoin
from .task import TaskState
from .worksharing import BatchOutcome, WorkDescriptor, complete_batch, request_chunks

log = logging.getLogger(__name__)

SPIN_POLLS = 16
IDLE_WAIT_S = 0.002


def available_cpus() -> list[int]:
    if hasattr(os, "sched_getaffinity"):
        return sorted(os.sched_getaffinity(0))
    return list(range(os.cpu_count() or 1))


def hardware_threads() -> int:
    return len(available_cpus())


def pin(worker_index: int, cpus=None) -> int:
    """Pin the calling thread to ``cpus[worker_index % len(cpus)]``.

    Returns the CPU read back after setting the mask, or -1 when the platform
    has no affinity support or the call failed.
    """
    if not hasattr(os, "sched_setaffinity"):
        return -1
    cpus = cpus if cpus is not None else available_cpus()
    cpu = cpus[worker_index % len(cpus)]
    try:
        os.sched_setaffinity(0, {cpu})
        got = os.sched_getaffinity(0)
    except OSError as exc:
        log.warning("could not pin worker %d to cpu %d: %s", worker_index, cpu, exc)
        return -1
    return min(got) if len(got) == 1 else -1


class _Context(threading.local):
    worker = None
    task = None


context = _Context()


class Worker:
    def __init__(self, runtime, index: int, team):
        self.rt = runtime
        self.id = index
        self.team = team
        self.descriptor = WorkDescriptor(index)
        self.thread = threading.Thread(target=self._main, name=f"wstasks-worker-{index}",
                                       daemon=True)
        self.cpu = -1
        self._worked = False

    @property
    def socket(self) -> int:
        return self.id // self.rt.config.socket_size

    def start(self):
        self.thread.start()

    def _main(self):
        rt = self.rt
        context.worker = self
        if rt.config.pin:
            self.cpu = pin(self.id, rt.cpus)
        rt.affinity[self.id] = self.cpu
        try:
            while not rt.stopping:
                if not self.poll_once():
                    self.idle()
        finally:
            context.worker = None

    def poll_once(self) -> bool:
        work = self.rt.scheduler.next_work(self)
        if work is None:
            return False
        self._worked = True
        self.execute(work)
        return True

    def idle(self):
        rt = self.rt
        if self._worked:
            rt.tracer.emit("Idle", self.id)
            self._worked = False
        for _ in range(SPIN_POLLS):
            if rt.stopping:
                return
            time.sleep(0)
            if self.poll_once():
                return
        while not rt.stopping:
            rt.scheduler.wait_for_work(IDLE_WAIT_S)
            if self.poll_once():
                return

    def execute(self, work):
        while work is not None and not self.rt.aborted:
            if isinstance(work, RegularAssignment):
                work = self.run_regular(work.task)
            elif isinstance(work, WorksharingJoin):
                work = self.run_region(work.region)
            else:  # pragma: no cover
                raise TypeError(work)

    def run_regular(self, task):
        rt = self.rt
        task.set_state(TaskState.RUNNING)
        saved = context.task
        context.task = task
        rt.tracer.emit("TaskStart", self.id, task.id)
        try:
            if task.data_env is not None:
                task.body(task.data_env.storage)
            else:
                task.body()
        except BaseException as exc:
            rt.abort(task, exc)
            return None
        finally:
            context.task = saved
        rt.tracer.emit("TaskEnd", self.id, task.id)
        return rt.finish(task, self)

    def run_region(self, region):
        rt = self.rt
        task = region.task
        if region.total_iters == 0:
            with region.team.lock:
                if region.finished:
                    return None
                region.finished = True
            task.set_state(TaskState.RUNNING)
            return rt.finish(task, self)
        saved = context.task
        context.task = task
        try:
            while True:
                batch = request_chunks(region, self)
                if batch is None:
                    return None
                if task.state is TaskState.READY:
                    with region.team.lock:
                        if task.state is TaskState.READY:
                            task.set_state(TaskState.RUNNING)
                rt.tracer.emit("ChunkAssign", self.id, task.id, batch.lo, batch.hi)
                try:
                    task.body(task.iterations(batch.lo, batch.hi), batch.env_copy)
                except BaseException as exc:
                    rt.abort(task, exc)
                    return None
                rt.tracer.emit("ChunkDone", self.id, task.id, batch.lo, batch.hi)
                outcome = complete_batch(batch)
                if outcome is BatchOutcome.REGION_DONE:
                    context.task = saved
                    return rt.finish(task, self)
                if outcome is BatchOutcome.DRAINED_ELSEWHERE:
                    return None
        finally:
            context.task = saved

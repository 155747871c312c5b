"""Task creation, taskwait, and the run loop driving a program to completion."""
from __future__ import annotations

import itertools
import logging
import os
import threading
from dataclasses import dataclass, fields, replace
from typing import Callable, Optional

from .dependences import DepMode, DependenceLedger
from .errors import ConfigError, SpawnInsideWorksharing, TaskBodyError
from .executor import Worker, available_cpus, context
from .scheduler import Scheduler
from .task import DataEnvironment, TaskDescriptor, TaskKind, TaskState, normalize_loop
from .trace import ExecutionTrace, Tracer
from .worksharing import build_teams

log = logging.getLogger(__name__)

_ENV_PREFIX = "WSTASKS_"


def _parse_bool(v: str) -> bool:
    return v.strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class RuntimeConfig:
    workers: int = 4
    team_size: Optional[int] = None
    socket_size: Optional[int] = None
    dependence_mode: DepMode = DepMode.REGION
    trace: bool = True
    pin: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dependence_mode", DepMode.parse(self.dependence_mode))
        if self.socket_size is None:
            object.__setattr__(self, "socket_size", self.workers)
        if self.team_size is None:
            object.__setattr__(self, "team_size", self.socket_size)
        self.validate()

    def validate(self) -> None:
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.socket_size < 1 or self.team_size < 1:
            raise ConfigError("team and socket sizes must be >= 1")
        if self.team_size > self.socket_size:
            raise ConfigError(
                f"team size {self.team_size} exceeds socket size {self.socket_size}")

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "RuntimeConfig":
        """Read ``WSTASKS_WORKERS``, ``WSTASKS_TEAM_SIZE``, ``WSTASKS_SOCKET_SIZE``,
        ``WSTASKS_DEPENDENCE_MODE``, ``WSTASKS_TRACE`` and ``WSTASKS_PIN``."""
        environ = os.environ if environ is None else environ
        kw = {}
        for f in fields(cls):
            raw = environ.get(_ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if f.name in ("trace", "pin"):
                kw[f.name] = _parse_bool(raw)
            elif f.name == "dependence_mode":
                kw[f.name] = raw
            else:
                try:
                    kw[f.name] = int(raw)
                except ValueError:
                    raise ConfigError(f"{_ENV_PREFIX}{f.name.upper()}={raw!r} is not an integer")
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    def with_(self, **changes) -> "RuntimeConfig":
        return replace(self, **changes)


class _Children:
    """Outstanding direct children of one spawning context."""

    def __init__(self):
        self.pending = 0
        self.cond = threading.Condition(threading.Lock())

    def add(self):
        with self.cond:
            self.pending += 1

    def done(self):
        with self.cond:
            self.pending -= 1
            if self.pending == 0:
                self.cond.notify_all()


class Runtime:
    """A pool of workers executing tasks with data dependences.

    Use as a context manager; leaving the block waits for every task and
    stops the workers::

        with Runtime(RuntimeConfig(workers=4)) as rt:
            rt.spawn_for(body, 0, n, accesses=[inout(a, 0, n)])
        trace = rt.trace
    """

    def __init__(self, config: Optional[RuntimeConfig] = None, **overrides):
        if config is None:
            config = RuntimeConfig.from_env(**overrides)
        elif overrides:
            config = replace(config, **overrides)
        self.config = config
        self.tracer = Tracer(enabled=config.trace)
        self.ledger = DependenceLedger(config.dependence_mode)
        self.teams = build_teams(config.workers, config.team_size, config.socket_size)
        self.scheduler = Scheduler(self.teams, self.tracer)
        self.cpus = available_cpus()
        team_of = {w: t for t in self.teams for w in t.members}
        self.workers = [Worker(self, i, team_of[i]) for i in range(config.workers)]
        self._ids = itertools.count(1)
        self._spawn_lock = threading.Lock()
        self._root = _Children()
        self._tasks: dict[int, TaskDescriptor] = {}
        self.stopping = False
        self.aborted = False
        self.error: Optional[TaskBodyError] = None
        self.trace: Optional[ExecutionTrace] = None
        self._started = False
        self.releases = 0
        self.affinity: dict[int, int] = {}

    # lifecycle -------------------------------------------------------------

    def start(self) -> "Runtime":
        if self._started:
            return self
        self._started = True
        if self.config.pin and self.config.workers > len(self.cpus):
            log.warning("%d workers on %d hardware threads: pinning wraps around",
                        self.config.workers, len(self.cpus))
        self.tracer.emit("RuntimeStart", -1)
        for w in self.workers:
            w.start()
        return self

    def shutdown(self, wait: bool = True) -> ExecutionTrace:
        if self.trace is not None:
            return self.trace
        try:
            if wait and not self.aborted:
                self.taskwait()
        finally:
            self.stopping = True
            self.scheduler._notify()
            for w in self.workers:
                w.thread.join(timeout=5.0)
            self.tracer.emit("RuntimeStop", -1)
            self.trace = self.tracer.collect(self.header())
        if self.error is not None:
            raise self.error
        return self.trace

    def __enter__(self):
        return self.start()

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.aborted = True
            try:
                self.shutdown(wait=False)
            except TaskBodyError:
                pass
            return False
        self.shutdown()
        return False

    # task creation ---------------------------------------------------------

    def spawn(self, body: Callable, *, accesses=(), priority: int = 0,
              env: Optional[DataEnvironment] = None, label: Optional[str] = None) -> int:
        """Create a regular task; ``body()`` (or ``body(env.storage)``) runs once."""
        return self.submit(TaskDescriptor(body, TaskKind.REGULAR, accesses, priority,
                                          data_env=env, label=label))

    def spawn_for(self, body: Callable, lower: int, upper: Optional[int] = None, step: int = 1,
                  *, chunksize: Optional[int] = None, accesses=(), priority: int = 0,
                  env: Optional[DataEnvironment] = None, policy: str = "guided",
                  label: Optional[str] = None) -> int:
        """Create a worksharing task over ``range(lower, upper, step)``.

        ``body(iters, env)`` is called once per batch with a ``range`` of loop
        indices and the worker's private copy of ``env`` (None without env).
        """
        if upper is None:
            lower, upper = 0, lower
        count = normalize_loop(lower, upper, step)
        return self.submit(TaskDescriptor(
            body, TaskKind.WORKSHARING, accesses, priority, loop_bounds=(0, count),
            chunksize=chunksize, data_env=env, label=label, policy=policy,
            origin=(lower, step)))

    def submit(self, task: TaskDescriptor) -> int:
        if not self._started:
            self.start()
        parent = context.task
        if parent is not None and parent.is_worksharing:
            raise SpawnInsideWorksharing(
                f"task {parent.id} is a worksharing task and cannot create tasks")
        owner = self._root if parent is None else parent._children
        worker = context.worker.id if context.worker is not None else -1
        task.parent = parent
        task._children = _Children()
        owner.add()
        with self._spawn_lock:
            task.id = next(self._ids)
            self._tasks[task.id] = task
            pid = -1 if parent is None else parent.id
            if task.is_worksharing:
                lo, hi = task.loop_bounds
                self.tracer.emit("SpawnWS", worker, task.id, pid, hi - lo)
            else:
                self.tracer.emit("Spawn", worker, task.id, pid, None)
            blocked = self.ledger.register(task)
            for p in task.predecessors:
                self.tracer.emit("Dep", worker, task.id, p, None)
        if not blocked:
            self.scheduler.enqueue(task, worker)
        return task.id

    # synchronization -------------------------------------------------------

    def taskwait(self) -> None:
        """Wait for every task spawned by the calling context (direct children)."""
        if not self._started:
            return
        parent = context.task
        children = self._root if parent is None else parent._children
        me = context.worker
        if me is None:
            with children.cond:
                while children.pending and not self.aborted:
                    children.cond.wait(0.05)
        else:
            # inside a task: help execute other work instead of blocking the worker
            while children.pending and not self.aborted:
                if not me.poll_once():
                    with children.cond:
                        if children.pending:
                            children.cond.wait(0.001)
        if self.aborted and self.error is not None:
            raise self.error

    # called by workers -----------------------------------------------------

    def finish(self, task: TaskDescriptor, worker):
        task.set_state(TaskState.FINISHED)
        self.tracer.emit("Release", worker.id, task.id)
        ready = [self._tasks[i] for i in self.ledger.release(task.id)]
        self.releases += 1
        work = self.scheduler.on_finish(ready, worker)
        self._tasks.pop(task.id, None)
        (self._root if task.parent is None else task.parent._children).done()
        return work

    def abort(self, task: TaskDescriptor, exc: BaseException) -> None:
        log.error("task %s raised %r; aborting run", task.id, exc)
        if self.error is None:
            self.error = TaskBodyError(task.id, exc)
            self.error.__cause__ = exc
        self.aborted = True
        self.stopping = True
        self.scheduler._notify()
        with self._root.cond:
            self._root.cond.notify_all()

    def header(self) -> dict:
        return {
            "workers": self.config.workers,
            "teams": [list(t.members) for t in self.teams],
            "dependence_mode": self.config.dependence_mode.value,
            "affinity": dict(sorted(self.affinity.items())),
        }

    def quiescent(self) -> bool:
        return (self.scheduler.idle() and self.ledger.live_count() == 0
                and all(w.descriptor.task is None or w.descriptor.task.state is TaskState.FINISHED
                        for w in self.workers))


def run(program: Callable[[Runtime], object], config: Optional[RuntimeConfig] = None,
        **overrides) -> ExecutionTrace:
    """Execute ``program(rt)`` on a fresh worker pool and return its trace."""
    with Runtime(config, **overrides) as rt:
        program(rt)
    return rt.trace

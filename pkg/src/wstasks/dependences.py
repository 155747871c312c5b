"""Data-dependence tracking in two flavours.

*Discrete* dependences only compare the start offset of two accesses to the
same object; *region* dependences compare the whole half-open intervals and
detect any partial overlap.  ``a[0;8]`` is ``[0, 8)`` and ``a[2;6]`` is
``[2, 6)``: region mode orders them, discrete mode does not.
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Hashable

from .errors import DoubleRelease
from .task import TaskState


class AccessMode(enum.Enum):
    IN = "in"
    OUT = "out"
    INOUT = "inout"

    @property
    def writes(self) -> bool:
        return self is not AccessMode.IN


class DepMode(enum.Enum):
    DISCRETE = "discrete"
    REGION = "region"

    @classmethod
    def parse(cls, value) -> "DepMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def base_key(obj) -> Hashable:
    """Identity handle for the object an access refers to.

    Strings, ints and tuples are used as-is so programs can name buffers
    symbolically; anything else (numpy arrays in particular) is keyed by id.
    """
    if isinstance(obj, (str, int, tuple)):
        return obj
    return ("obj", id(obj))


@dataclass(frozen=True)
class AccessRegion:
    """Half-open element interval ``[start, start + length)`` of one object."""

    base: Hashable
    start: int
    length: int
    mode: AccessMode = AccessMode.INOUT

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"negative start offset {self.start}")
        if self.length < 1:
            raise ValueError(f"access length must be >= 1, got {self.length}")

    @property
    def stop(self) -> int:
        return self.start + self.length


def access(obj, start: int, length: int, mode=AccessMode.INOUT) -> AccessRegion:
    return AccessRegion(base_key(obj), int(start), int(length), AccessMode(mode))


def in_(obj, start: int, length: int) -> AccessRegion:
    return access(obj, start, length, AccessMode.IN)


def out(obj, start: int, length: int) -> AccessRegion:
    return access(obj, start, length, AccessMode.OUT)


def inout(obj, start: int, length: int) -> AccessRegion:
    return access(obj, start, length, AccessMode.INOUT)


def conflicts(a: AccessRegion, b: AccessRegion, mode: DepMode) -> bool:
    if a.base != b.base:
        return False
    if not (a.mode.writes or b.mode.writes):
        return False
    if mode is DepMode.DISCRETE:
        return a.start == b.start
    return a.start < b.stop and b.start < a.stop


class DependenceLedger:
    """Registers tasks in spawn order and releases them when they finish.

    Tasks handed to :meth:`register` need ``id``, ``accesses`` and a
    ``set_state`` method; state changes happen under the ledger lock so a
    concurrent release can never race the Blocked/Ready decision.
    """

    def __init__(self, mode=DepMode.REGION):
        self.mode = DepMode.parse(mode)
        self.lock = threading.Lock()
        self._history: dict[Hashable, list[tuple[int, AccessRegion]]] = {}
        self._pending: dict[int, int] = {}
        self._successors: dict[int, list[int]] = {}
        self._order: dict[int, int] = {}
        self._live: dict[int, object] = {}
        self._released: set[int] = set()
        self._seq = 0
        self.edges: list[tuple[int, int]] = []

    def register(self, task) -> int:
        """Return the number of live predecessors; 0 means the task is Ready."""
        with self.lock:
            preds: list[int] = []
            seen = set()
            for acc in task.accesses:
                for tid, other in self._history.get(acc.base, ()):
                    if tid not in seen and conflicts(acc, other, self.mode):
                        seen.add(tid)
                        preds.append(tid)
            for acc in task.accesses:
                self._history.setdefault(acc.base, []).append((task.id, acc))
            preds.sort(key=self._order.__getitem__)
            for p in preds:
                self._successors[p].append(task.id)
                self.edges.append((p, task.id))
            self._order[task.id] = self._seq
            self._seq += 1
            self._pending[task.id] = len(preds)
            self._successors[task.id] = []
            self._live[task.id] = task
            task.set_state(TaskState.BLOCKED if preds else TaskState.READY)
            task.predecessors = tuple(preds)
            return len(preds)

    def release(self, task_id: int) -> list[int]:
        """Retire a finished task; return successors that became Ready, in spawn order."""
        with self.lock:
            if task_id in self._released:
                raise DoubleRelease(f"task {task_id} already released")
            task = self._live.pop(task_id)
            self._released.add(task_id)
            for base in {acc.base for acc in task.accesses}:
                kept = [e for e in self._history[base] if e[0] != task_id]
                if kept:
                    self._history[base] = kept
                else:
                    del self._history[base]
            ready = []
            for s in self._successors.pop(task_id):
                self._pending[s] -= 1
                if self._pending[s] == 0:
                    ready.append(s)
            ready.sort(key=self._order.__getitem__)
            for s in ready:
                self._live[s].set_state(TaskState.READY)
            del self._pending[task_id]
            return ready

    def pending(self, task_id: int) -> int:
        with self.lock:
            return self._pending[task_id]

    def task(self, task_id: int):
        return self._live[task_id]

    def live_count(self) -> int:
        with self.lock:
            return len(self._live)

"""Task descriptors, their lifecycle, and data environments."""
from __future__ import annotations

import copy
import enum
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import IllegalTransition, InvalidBounds


class TaskKind(enum.Enum):
    REGULAR = "regular"
    WORKSHARING = "worksharing"


class TaskState(enum.Enum):
    CREATED = "created"
    BLOCKED = "blocked"
    READY = "ready"
    RUNNING = "running"
    FINISHED = "finished"


_ALLOWED = {
    TaskState.CREATED: {TaskState.BLOCKED, TaskState.READY},
    TaskState.BLOCKED: {TaskState.READY},
    TaskState.READY: {TaskState.RUNNING},
    TaskState.RUNNING: {TaskState.FINISHED},
    TaskState.FINISHED: set(),
}


class DataEnvironment:
    """Captured values plus the procedure that produces a private copy.

    Every collaborator of a worksharing task runs on its own copy, made once
    per work request.  The default duplication is a shallow copy: containers
    are copied, the arrays they point to stay shared.
    """

    def __init__(self, storage: Any = None, duplicate: Optional[Callable[[Any], Any]] = None):
        self.storage = storage
        self._duplicate = duplicate or copy.copy

    def duplicate(self) -> Any:
        return self._duplicate(self.storage)


def normalize_loop(lower: int, upper: int, step: int = 1) -> int:
    """Iteration count of ``for (i = lower; i < upper; i += step)``."""
    if step == 0:
        raise InvalidBounds("loop step must be non-zero")
    if (upper - lower) * step < 0:
        raise InvalidBounds(f"loop [{lower}, {upper}) with step {step} runs backwards")
    return -(-(upper - lower) // step)


@dataclass(eq=False)
class TaskDescriptor:
    body: Callable
    kind: TaskKind = TaskKind.REGULAR
    accesses: tuple = ()
    priority: int = 0
    loop_bounds: Optional[tuple[int, int]] = None
    chunksize: Optional[int] = None
    data_env: Optional[DataEnvironment] = None
    label: Optional[str] = None
    policy: str = "guided"
    # original loop (lower, step) so chunk bodies see the caller's indices
    origin: tuple[int, int] = (0, 1)
    id: int = -1
    parent: Any = None
    state: TaskState = field(default=TaskState.CREATED)
    predecessors: tuple = ()

    def __post_init__(self):
        self.accesses = tuple(self.accesses)
        self._state_lock = threading.Lock()
        if self.kind is TaskKind.WORKSHARING:
            if self.loop_bounds is None:
                raise InvalidBounds("worksharing task without loop bounds")
            lo, hi = self.loop_bounds
            if hi < lo:
                raise InvalidBounds(f"upper bound {hi} below lower bound {lo}")
            if self.chunksize is not None and self.chunksize < 1:
                raise InvalidBounds(f"chunksize must be positive, got {self.chunksize}")
        elif self.loop_bounds is not None or self.chunksize is not None:
            raise InvalidBounds("loop bounds and chunksize only apply to worksharing tasks")

    @property
    def is_worksharing(self) -> bool:
        return self.kind is TaskKind.WORKSHARING

    def set_state(self, new: TaskState) -> None:
        with self._state_lock:
            if new not in _ALLOWED[self.state]:
                raise IllegalTransition(f"task {self.id}: {self.state.name} -> {new.name}")
            self.state = new

    def iterations(self, lo: int, hi: int) -> range:
        """Map normalized chunk ``[lo, hi)`` back to the caller's loop indices."""
        lower, step = self.origin
        return range(lower + lo * step, lower + hi * step, step)

    def __repr__(self):
        name = self.label or getattr(self.body, "__name__", "task")
        return f"<{self.kind.value} task {self.id} {name} {self.state.name}>"

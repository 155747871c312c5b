"""Exception types raised by the runtime and the benchmark harness."""


class WSTasksError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(WSTasksError):
    """Inconsistent worker, team or experiment parameters."""


class SpawnInsideWorksharing(WSTasksError):
    """A task was spawned from the body of a worksharing task (those are final)."""


class InvalidBounds(WSTasksError):
    """Malformed loop bounds for a worksharing task."""


class DoubleRelease(WSTasksError):
    """Dependences of a task were released more than once."""


class NotTeamMember(WSTasksError):
    """A worker asked for chunks of a region hosted by another team."""


class DoubleComplete(WSTasksError):
    """The same chunk batch was completed twice."""


class IllegalTransition(WSTasksError):
    """A task state change outside Created -> Blocked/Ready -> Running -> Finished."""


class TaskBodyError(WSTasksError):
    """A user task body raised; the run was aborted."""

    def __init__(self, task_id, exc):
        super().__init__(f"task {task_id} raised {type(exc).__name__}: {exc}")
        self.task_id = task_id
        self.original = exc


class MalformedTrace(WSTasksError):
    """Trace events do not pair up (start without end, assign without done)."""


class ValidationFailed(WSTasksError):
    """A benchmark's parallel output disagrees with its serial oracle."""

    def __init__(self, benchmark, index, got, expected):
        super().__init__(
            f"{benchmark}: mismatch at index {index}: got {got!r}, expected {expected!r}"
        )
        self.benchmark = benchmark
        self.index = index

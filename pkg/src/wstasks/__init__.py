"""Task-parallel runtime with data-flow dependences and worksharing tasks."""
from .dependences import (
    AccessMode, AccessRegion, DepMode, DependenceLedger, access, conflicts, in_, inout, out,
)
from .errors import (
    ConfigError, DoubleComplete, DoubleRelease, InvalidBounds, MalformedTrace, NotTeamMember,
    SpawnInsideWorksharing, TaskBodyError, ValidationFailed, WSTasksError,
)
from .runtime import Runtime, RuntimeConfig, run
from .task import DataEnvironment, TaskDescriptor, TaskKind, TaskState
from .trace import ExecutionTrace, TraceEvent
from .worksharing import Team, build_teams, default_chunksize

__version__ = "0.1.0"

__all__ = [
    "AccessMode", "AccessRegion", "ConfigError", "DataEnvironment", "DepMode",
    "DependenceLedger", "DoubleComplete", "DoubleRelease", "ExecutionTrace", "InvalidBounds",
    "MalformedTrace", "NotTeamMember", "Runtime", "RuntimeConfig", "SpawnInsideWorksharing",
    "TaskBodyError", "TaskDescriptor", "TaskKind", "TaskState", "Team", "TraceEvent",
    "ValidationFailed", "WSTasksError", "access", "build_teams", "conflicts",
    "default_chunksize", "in_", "inout", "out", "run",
]

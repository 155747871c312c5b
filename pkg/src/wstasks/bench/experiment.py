from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, replace
from typing import Optional

from ..dependences import DepMode
from ..errors import ConfigError
from ..runtime import RuntimeConfig

BENCHMARKS = ("daxpy", "stream", "nbody", "matmul", "cg", "overlap")
VERSIONS = ("for_static", "for_dynamic", "for_guided", "tasks", "worksharing")
RESULT_COLUMNS = ("benchmark", "version", "ps", "ts", "cs", "n", "workers", "reps",
                  "mean_s", "min_s", "max_s", "throughput", "work_units")


@dataclass(frozen=True)
class Experiment:
    benchmark: str = "daxpy"
    version: str = "tasks"
    ps: int = 16384
    ts: int = 1024
    cs: Optional[int] = None
    n: Optional[int] = None
    workers: int = 4
    reps: int = 5
    deps: str = "region"
    socket_size: Optional[int] = None
    intensity: int = 1
    iters: int = 16
    seed: int = 0
    pin: bool = True
    task_ms: float = 20.0

    def validate(self) -> None:
        if self.benchmark not in BENCHMARKS:
            raise ConfigError(f"unknown benchmark {self.benchmark!r}")
        if self.version not in VERSIONS:
            raise ConfigError(f"unknown version {self.version!r}")
        if self.ps < 1:
            raise ConfigError(f"problem size must be >= 1, got {self.ps}")
        if not 1 <= self.ts <= self.ps:
            raise ConfigError(f"need 1 <= TS <= PS, got TS={self.ts} PS={self.ps}")
        if self.cs is not None and not 1 <= self.cs <= self.ts:
            raise ConfigError(f"chunksize must satisfy 1 <= CS <= TS, got CS={self.cs} TS={self.ts}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.intensity < 1 or self.iters < 1:
            raise ConfigError("intensity and iters must be >= 1")
        try:
            DepMode.parse(self.deps)
        except ValueError:
            raise ConfigError(f"unknown dependence mode {self.deps!r}") from None
        self.runtime_config()

    @property
    def team_size(self) -> int:
        """Collaborators per worksharing region for this version."""
        if self.version.startswith("for_"):
            return self.workers
        if self.version == "worksharing":
            return self.n or self.socket_size or self.workers
        return 1

    @property
    def chunksize(self) -> Optional[int]:
        """Chunk used by the version: for_static defaults to one equal slice
        per worker, for_dynamic/for_guided to TS, worksharing to TS/N."""
        if self.version == "for_static":
            return self.cs or -(-self.ps // self.workers)
        if self.version.startswith("for_"):
            return self.cs or self.ts
        return self.cs

    @property
    def work_units(self) -> float:
        return (self.ps / self.ts) / self.workers

    def runtime_config(self) -> RuntimeConfig:
        if self.version.startswith("for_"):
            socket = self.workers
        else:
            socket = self.socket_size or max(self.team_size, 1)
            if self.socket_size is None and self.version == "tasks":
                socket = self.workers
        return RuntimeConfig(workers=self.workers, team_size=self.team_size,
                             socket_size=socket, dependence_mode=self.deps, trace=False,
                             pin=self.pin)

    def with_(self, **changes) -> "Experiment":
        return replace(self, **changes)


@dataclass
class ResultRow:
    benchmark: str
    version: str
    ps: int
    ts: int
    cs: Optional[int]
    n: int
    workers: int
    reps: int
    mean_s: float
    min_s: float
    max_s: float
    throughput: float
    work_units: float

    @classmethod
    def from_times(cls, exp: Experiment, times, work_per_rep: float, version=None):
        mean = sum(times) / len(times)
        return cls(exp.benchmark, version or exp.version, exp.ps, exp.ts, exp.chunksize,
                   exp.team_size, exp.workers, exp.reps, mean, min(times), max(times),
                   work_per_rep / mean if mean > 0 else float("inf"), exp.work_units)

    def as_row(self) -> list:
        return ["" if v is None else v for v in asdict(self).values()]


def write_results(rows, dest=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow(r.as_row())
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w", newline="") as f:
            f.write(text)
    return text


def read_results(src) -> list[dict]:
    with open(src, newline="") as f:
        return list(csv.DictReader(f))


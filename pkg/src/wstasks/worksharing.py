"""Teams of workers and the chunk distribution of worksharing regions.

A worksharing task is shared with the team of the worker that dequeued it.
Members ask for work first-come-first-serve; each request returns a batch of
whole chunks, and the member that completes the last outstanding batch after
the iteration space is exhausted finishes the task.  Members whose batch ends
while others are still running simply leave: there is no barrier.
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, DoubleComplete, NotTeamMember

POLICIES = ("guided", "dynamic", "static")


def default_chunksize(total_iters: int, team_size: int) -> int:
    """Chunksize used when a worksharing task does not set one: ceil(TS / N)."""
    if team_size < 1:
        raise ValueError("team size must be >= 1")
    return max(1, -(-total_iters // team_size))


class Team:
    def __init__(self, team_id: int, members):
        self.id = team_id
        self.members = tuple(members)
        if not self.members:
            raise ConfigError("empty team")
        self._rank = {w: i for i, w in enumerate(self.members)}
        self.lock = threading.Lock()
        self.current: Optional[WorksharingRegion] = None

    @property
    def size(self) -> int:
        return len(self.members)

    def rank(self, worker_id: int) -> int:
        try:
            return self._rank[worker_id]
        except KeyError:
            raise NotTeamMember(f"worker {worker_id} is not in team {self.id}") from None

    def __contains__(self, worker_id) -> bool:
        return worker_id in self._rank

    def __repr__(self):
        return f"Team({self.id}, members={list(self.members)})"


def build_teams(workers: int, team_size: Optional[int] = None, socket_size: Optional[int] = None):
    """Partition workers into contiguous teams that never straddle a socket.

    ``team_size=None`` gives one team per socket.  A trailing partial team is
    formed inside each socket when the socket size is not a multiple of the
    team size, and in the last socket when workers run out.
    """
    if workers < 1:
        raise ConfigError(f"need at least one worker, got {workers}")
    if socket_size is None:
        socket_size = workers
    if socket_size < 1:
        raise ConfigError(f"socket size must be >= 1, got {socket_size}")
    if team_size is None:
        team_size = socket_size
    if team_size < 1:
        raise ConfigError(f"team size must be >= 1, got {team_size}")
    if team_size > socket_size:
        raise ConfigError(f"team size {team_size} exceeds socket size {socket_size}")
    teams = []
    for s0 in range(0, workers, socket_size):
        s1 = min(s0 + socket_size, workers)
        for t0 in range(s0, s1, team_size):
            teams.append(Team(len(teams), range(t0, min(t0 + team_size, s1))))
    return teams


class BatchOutcome(enum.Enum):
    MORE_WORK = "more_work"
    REGION_DONE = "region_done"
    DRAINED_ELSEWHERE = "drained_elsewhere"


class WorkDescriptor:
    """Per-worker preallocated control block, refilled on every work request."""

    __slots__ = ("worker", "task", "lo", "hi", "env", "fills")

    def __init__(self, worker: int):
        self.worker = worker
        self.task = None
        self.lo = self.hi = 0
        self.env = None
        self.fills = 0

    def fill(self, task, lo, hi, env):
        self.task, self.lo, self.hi, self.env = task, lo, hi, env
        self.fills += 1


@dataclass(eq=False)
class ChunkBatch:
    lo: int
    hi: int
    worker: int
    region: "WorksharingRegion"
    descriptor: WorkDescriptor
    env_copy: object = None
    chunks: int = 1
    completed: bool = field(default=False)

    @property
    def size(self) -> int:
        return self.hi - self.lo


class WorksharingRegion:
    """Execution state of one worksharing task on one team."""

    def __init__(self, task, team: Team, chunksize: Optional[int] = None, policy: Optional[str] = None):
        self.task = task
        self.team = team
        lo, hi = task.loop_bounds if task is not None else (0, 0)
        self.lower, self.upper = lo, hi
        self.total_iters = hi - lo
        self.chunksize = chunksize or getattr(task, "chunksize", None) or default_chunksize(
            max(self.total_iters, 1), team.size)
        self.policy = policy or getattr(task, "policy", "guided")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown chunk policy {self.policy!r}")
        self.next_unassigned = lo
        self.outstanding_workers = 0
        self.batches: list[tuple[int, int, int]] = []
        self.env_duplications = 0
        self.finished = False
        self.total_chunks = -(-self.total_iters // self.chunksize)
        self.assigned_chunks = 0
        # static policy: member rank r owns chunks r, r+N, r+2N, ...
        self._static_next = [r for r in range(team.size)]

    @property
    def chunks_remaining(self) -> int:
        return self.total_chunks - self.assigned_chunks

    @property
    def exhausted(self) -> bool:
        return self.assigned_chunks == self.total_chunks

    def has_work_for(self, worker_id: int) -> bool:
        if self.exhausted:
            return False
        if self.policy == "static":
            return self._static_next[self.team.rank(worker_id)] < self.total_chunks
        return True

    def _next_range(self, rank: int):
        cs = self.chunksize
        if self.policy == "static":
            k = self._static_next[rank]
            if k >= self.total_chunks:
                return None
            self._static_next[rank] = k + self.team.size
            lo = self.lower + k * cs
            return lo, min(lo + cs, self.upper), 1
        if self.next_unassigned >= self.upper:
            return None
        if self.policy == "dynamic":
            n = 1
        else:
            remaining = -(-(self.upper - self.next_unassigned) // cs)
            n = max(1, remaining // self.team.size)
        lo = self.next_unassigned
        hi = min(lo + n * cs, self.upper)
        self.next_unassigned = hi
        return lo, hi, n

    def __repr__(self):
        return (f"<region task={getattr(self.task, 'id', None)} team={self.team.id} "
                f"[{self.lower},{self.upper}) cs={self.chunksize} {self.policy}>")


def request_chunks(region: WorksharingRegion, worker) -> Optional[ChunkBatch]:
    """Hand the next batch of chunks to ``worker`` or return None when none are left.

    ``worker`` needs ``id`` and a preallocated ``descriptor``.  The descriptor
    is filled and the data environment duplicated once per successful request.
    """
    team = region.team
    rank = team.rank(worker.id)
    with team.lock:
        nxt = region._next_range(rank)
        if nxt is None:
            return None
        lo, hi, n = nxt
        region.assigned_chunks += n
        region.outstanding_workers += 1
        region.batches.append((lo, hi, worker.id))
        if region.exhausted and team.current is region:
            team.current = None
    env = region.task.data_env if region.task is not None else None
    env_copy = env.duplicate() if env is not None else None
    with team.lock:
        region.env_duplications += 1
    worker.descriptor.fill(region.task, lo, hi, env_copy)
    return ChunkBatch(lo, hi, worker.id, region, worker.descriptor, env_copy, n)


def complete_batch(batch: ChunkBatch) -> BatchOutcome:
    region = batch.region
    with region.team.lock:
        if batch.completed:
            raise DoubleComplete(f"batch [{batch.lo},{batch.hi}) completed twice")
        batch.completed = True
        region.outstanding_workers -= 1
        if region.exhausted:
            if region.outstanding_workers == 0:
                region.finished = True
                return BatchOutcome.REGION_DONE
            return BatchOutcome.DRAINED_ELSEWHERE
        if region.has_work_for(batch.worker):
            return BatchOutcome.MORE_WORK
        return BatchOutcome.DRAINED_ELSEWHERE

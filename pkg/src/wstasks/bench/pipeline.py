"""Rounds of independent worksharing loops, built to expose pipelining.

Each round spawns three loops over arrays ``a``, ``b`` and ``c``
(``inout`` on the whole array), so loop k of round r only depends on loop k
of round r-1.  The first iteration of every loop is slow: the member that
takes it keeps running while its teammate drains the rest and moves on to
the next ready loop, without waiting at a barrier.
"""
from __future__ import annotations

import time

import numpy as np

from ..dependences import inout
from ..runtime import Runtime, RuntimeConfig

NAMES = ("a", "b", "c")


def staged_loops(rt: Runtime, rounds: int = 2, iters: int = 4, chunksize: int = 1,
                 slow_s: float = 0.02, fast_s: float = 0.001) -> dict[str, np.ndarray]:
    """Spawn the loops on ``rt`` and return per-iteration touch counters.

    After ``rt.taskwait()`` every counter equals ``rounds``.
    """
    counts = {name: np.zeros(iters, dtype=np.int64) for name in NAMES}

    def body_for(arr):
        def body(its, env):
            for i in its:
                time.sleep(slow_s if i == 0 else fast_s)
                arr[i] += 1
        return body

    for r in range(rounds):
        for name in NAMES:
            rt.spawn_for(body_for(counts[name]), 0, iters, chunksize=chunksize,
                         accesses=[inout(name, 0, iters)], label=f"{name}{r}")
    return counts


def run_staged_loops(workers: int = 4, team_size: int = 2, pin: bool = False, **kw):
    """Run :func:`staged_loops` on a fresh runtime; returns ``(trace, counts)``."""
    config = RuntimeConfig(workers=workers, team_size=team_size, pin=pin, trace=True)
    with Runtime(config) as rt:
        counts = staged_loops(rt, **kw)
    return rt.trace, counts

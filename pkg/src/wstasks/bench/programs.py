"""Benchmark programs expressed once and lowered per version.

A program is a list of *phases* (a loop over ``[0, PS)`` blocked by TS) and
*single* steps (one regular task, used for reductions).  Lowering:

``tasks``        one regular task per TS block
``worksharing``  one worksharing task per TS block, chunksize CS
``for_<policy>`` one worksharing region over the whole loop spanning every
                 worker with the ``static``/``dynamic``/``guided`` policy
                 (chunk CS, else TS; static defaults to equal slices);
                 the runtime's analogue of a parallel-for.  Under ``static``,
                 consecutive block-local phases are fused into one region,
                 which is what ``nowait`` buys a static schedule.

Serial oracles run the same steps in program order on the main thread.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .. import kernels as K
from ..dependences import AccessMode, AccessRegion, DepMode
from ..errors import ConfigError, ValidationFailed
from .experiment import Experiment

RTOL = 1e-12


@dataclass
class Phase:
    name: str
    kernel: Callable[[int, int], None]
    accesses: Callable[[int, int], list]
    local: bool = True
    prioritized: bool = False


@dataclass
class Single:
    name: str
    fn: Callable[[], None]
    accesses: list = field(default_factory=list)


class Program:
    """Base class: allocate state in ``__init__``, describe a rep in ``steps``."""

    name = "?"
    integer = False

    def __init__(self, exp: Experiment):
        self.exp = exp
        self.mode = DepMode.parse(exp.deps)
        self.blocks = [(lo, min(lo + exp.ts, exp.ps)) for lo in range(0, exp.ps, exp.ts)]

    # access helpers -------------------------------------------------------

    def acc(self, name, lo, hi, mode=AccessMode.INOUT):
        return AccessRegion(name, lo, hi - lo, mode)

    def whole(self, name, mode=AccessMode.IN):
        """Access to a whole TS-blocked array.

        Region dependences express it as one interval; discrete dependences
        can only see start offsets, so every block start is listed.
        """
        if self.mode is DepMode.REGION:
            return [AccessRegion(name, 0, self.exp.ps, mode)]
        return [AccessRegion(name, lo, hi - lo, mode) for lo, hi in self.blocks]

    # to be provided by subclasses ------------------------------------------

    def steps(self) -> list:
        raise NotImplementedError

    def reset(self) -> None:
        pass

    def outputs(self) -> dict:
        raise NotImplementedError

    def work_per_rep(self) -> float:
        return float(self.exp.ps)

    # lowering ----------------------------------------------------------------

    def spawn_rep(self, rt) -> None:
        exp = self.exp
        steps = self.steps()
        i = 0
        while i < len(steps):
            step = steps[i]
            if isinstance(step, Single):
                rt.spawn(step.fn, accesses=step.accesses, label=step.name)
                i += 1
                continue
            group = [step]
            if exp.version == "for_static" and step.local:
                while (i + len(group) < len(steps) and isinstance(steps[i + len(group)], Phase)
                       and steps[i + len(group)].local):
                    group.append(steps[i + len(group)])
            i += len(group)
            if exp.version.startswith("for_"):
                self._spawn_loop(rt, group, exp.version[4:])
            elif exp.version == "tasks":
                for b, (lo, hi) in enumerate(self.blocks):
                    rt.spawn(partial(step.kernel, lo, hi), accesses=step.accesses(lo, hi),
                             priority=b if step.prioritized else 0, label=step.name)
            else:
                for b, (lo, hi) in enumerate(self.blocks):
                    rt.spawn_for(_chunked(step.kernel), lo, hi, chunksize=exp.cs,
                                 accesses=step.accesses(lo, hi),
                                 priority=b if step.prioritized else 0, label=step.name)

    def _spawn_loop(self, rt, group, policy):
        accesses = []
        seen = set()
        for ph in group:
            for lo, hi in self.blocks:
                for a in ph.accesses(lo, hi):
                    if a not in seen:
                        seen.add(a)
                        accesses.append(a)

        def body(iters, env):
            for ph in group:
                ph.kernel(iters.start, iters.stop)

        rt.spawn_for(body, 0, self.exp.ps, chunksize=self.exp.chunksize, policy=policy,
                     accesses=accesses, label="+".join(ph.name for ph in group))

    def run_serial(self, reps=None) -> None:
        for _ in range(self.exp.reps if reps is None else reps):
            self.reset()
            for step in self.steps():
                if isinstance(step, Single):
                    step.fn()
                else:
                    for lo, hi in self.blocks:
                        step.kernel(lo, hi)

    def expected(self) -> dict:
        oracle = type(self)(self.exp)
        oracle.run_serial()
        return oracle.outputs()

    def validate(self) -> None:
        expected = self.expected()
        for key, got in self.outputs().items():
            compare(f"{self.name}.{key}", np.asarray(got), np.asarray(expected[key]),
                    exact=self.integer)


def _chunked(kernel):
    def body(iters, env):
        kernel(iters.start, iters.stop)
    return body


def compare(label, got, expected, exact=False, rtol=RTOL):
    """Raise ValidationFailed at the first element outside tolerance."""
    got = np.ravel(got)
    expected = np.ravel(expected)
    if got.shape != expected.shape:
        raise ValidationFailed(label, -1, got.shape, expected.shape)
    if exact:
        bad = got != expected
    else:
        bad = ~(np.abs(got - expected) <= rtol * np.abs(expected))
        bad &= got != expected
    idx = np.flatnonzero(bad)
    if idx.size:
        i = int(idx[0])
        raise ValidationFailed(label, i, got[i], expected[i])


class Daxpy(Program):
    name = "daxpy"

    def __init__(self, exp):
        super().__init__(exp)
        n = exp.ps
        self.a = np.full(n, 1.0)
        self.b = np.full(n, 2.0)
        self.c = np.full(n, 3.0)

    def kernel(self, lo, hi):
        K.daxpy(self.a, self.b, self.c, lo, hi, self.exp.intensity)

    def steps(self):
        return [Phase("daxpy", self.kernel, lambda lo, hi: [self.acc("a", lo, hi)],
                      prioritized=True)]

    def outputs(self):
        return {"a": self.a}

    def expected(self):
        return {"a": np.full(self.exp.ps, 1.0 + self.exp.reps * 6.0)}

    def work_per_rep(self):
        return float(self.exp.ps * self.exp.intensity)


class Stream(Program):
    name = "stream"
    SCALAR = 0.5

    def __init__(self, exp):
        super().__init__(exp)
        n = exp.ps
        self.a = np.full(n, 1.0)
        self.b = np.full(n, 2.0)
        self.c = np.zeros(n)

    def steps(self):
        a, b, c, q = self.a, self.b, self.c, self.SCALAR
        acc, IN, OUT = self.acc, AccessMode.IN, AccessMode.OUT
        return [
            Phase("copy", lambda lo, hi: K.stream_copy(c, a, lo, hi),
                  lambda lo, hi: [acc("a", lo, hi, IN), acc("c", lo, hi, OUT)]),
            Phase("scale", lambda lo, hi: K.stream_scale(b, c, q, lo, hi),
                  lambda lo, hi: [acc("c", lo, hi, IN), acc("b", lo, hi, OUT)]),
            Phase("add", lambda lo, hi: K.stream_add(c, a, b, lo, hi),
                  lambda lo, hi: [acc("a", lo, hi, IN), acc("b", lo, hi, IN),
                                  acc("c", lo, hi, OUT)]),
            Phase("triad", lambda lo, hi: K.stream_triad(a, b, c, q, lo, hi),
                  lambda lo, hi: [acc("b", lo, hi, IN), acc("c", lo, hi, IN),
                                  acc("a", lo, hi, OUT)]),
        ]

    def outputs(self):
        return {"a": self.a, "b": self.b, "c": self.c}

    def work_per_rep(self):
        # bytes moved: copy 2, scale 2, add 3, triad 3 doubles per element
        return 10.0 * 8 * self.exp.ps


class NBody(Program):
    name = "nbody"
    EPS2 = 1e-2
    DT = 1e-3

    def __init__(self, exp):
        super().__init__(exp)
        rng = np.random.default_rng(exp.seed)
        n = exp.ps
        self.pos = rng.uniform(-1.0, 1.0, (n, 3))
        self.vel = rng.uniform(-0.1, 0.1, (n, 3))
        self.mass = rng.uniform(0.5, 1.5, n)
        self.accel = np.zeros((n, 3))

    def steps(self):
        IN, OUT = AccessMode.IN, AccessMode.OUT
        return [
            Phase("forces",
                  lambda lo, hi: K.nbody_forces(self.pos, self.mass, self.accel, self.EPS2, lo, hi),
                  lambda lo, hi: self.whole("pos") + [self.acc("acc", lo, hi, OUT)],
                  local=False),
            Phase("update",
                  lambda lo, hi: K.nbody_update(self.pos, self.vel, self.accel, self.DT, lo, hi),
                  lambda lo, hi: [self.acc("acc", lo, hi, IN), self.acc("vel", lo, hi),
                                  self.acc("pos", lo, hi)]),
        ]

    def outputs(self):
        return {"pos": self.pos, "vel": self.vel}

    def work_per_rep(self):
        return float(self.exp.ps) ** 2


class Matmul(Program):
    name = "matmul"

    def __init__(self, exp):
        super().__init__(exp)
        rng = np.random.default_rng(exp.seed)
        n = exp.ps
        self.A = rng.standard_normal((n, n))
        self.B = rng.standard_normal((n, n))
        self.C = np.zeros((n, n))

    def steps(self):
        return [Phase("matmul", lambda lo, hi: K.matmul_rows(self.A, self.B, self.C, lo, hi),
                      lambda lo, hi: [self.acc("C", lo, hi, AccessMode.OUT)])]

    def outputs(self):
        return {"C": self.C}

    def work_per_rep(self):
        return 2.0 * float(self.exp.ps) ** 3


def grid_dims(n: int) -> tuple[int, int, int]:
    """Three factors of n, as close to a cube as possible."""
    best = (n, 1, 1)
    for x in range(1, int(round(n ** (1 / 3))) + 2):
        if n % x:
            continue
        m = n // x
        for y in range(x, int(m ** 0.5) + 1):
            if m % y == 0:
                cand = tuple(sorted((x, y, m // y), reverse=True))
                if max(cand) - min(cand) < max(best) - min(best):
                    best = cand
    return best


def stencil27(dims):
    """27-point stencil matrix in padded row format: 27 on the diagonal, -1 off it."""
    nx, ny, nz = dims
    n = nx * ny * nz
    cols = np.empty((n, 27), dtype=np.int64)
    vals = np.zeros((n, 27))
    row = 0
    for iz in range(nz):
        for iy in range(ny):
            for ix in range(nx):
                k = 0
                for dz in (-1, 0, 1):
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            jx, jy, jz = ix + dx, iy + dy, iz + dz
                            if 0 <= jx < nx and 0 <= jy < ny and 0 <= jz < nz:
                                cols[row, k] = (jz * ny + jy) * nx + jx
                                vals[row, k] = 27.0 if (dx, dy, dz) == (0, 0, 0) else -1.0
                            else:
                                cols[row, k] = row
                            k += 1
                row += 1
    return cols, vals


class CG(Program):
    """Conjugate-gradient proxy on a 27-point stencil (HPCCG-like, not a reproduction).

    Dot products are split into an elementwise product phase and a single
    reduction task summing TS-block partials in block order, so every version
    follows the same floating-point trajectory.
    """

    name = "cg"

    def __init__(self, exp):
        super().__init__(exp)
        self.cols, self.vals = stencil27(grid_dims(exp.ps))
        self.rhs = self.vals.sum(axis=1)  # exact solution is all ones
        self.reset()

    def reset(self):
        n = self.exp.ps
        self.x = np.zeros(n)
        self.r = self.rhs.copy()
        self.p = self.rhs.copy()
        self.Ap = np.zeros(n)
        self.tmp = np.zeros(n)
        self.scal = np.zeros(4)  # rho, pAp, alpha, beta
        K.multiply(self.tmp, self.r, self.r, 0, n)
        self.scal[0] = self.dot(self.tmp)
        self.history = [self.scal[0]]

    def dot(self, v) -> float:
        s = 0.0
        for lo, hi in self.blocks:
            s = s + K.block_sum(v, lo, hi)
        return s

    def _alpha(self):
        pap = self.dot(self.tmp)
        self.scal[1] = pap
        self.scal[2] = self.scal[0] / pap if pap != 0.0 else 0.0

    def _beta(self):
        rho_new = self.dot(self.tmp)
        rho = self.scal[0]
        self.scal[3] = rho_new / rho if rho != 0.0 else 0.0
        self.scal[0] = rho_new
        self.history.append(rho_new)

    def _update(self, lo, hi):
        alpha = self.scal[2]
        K.axpy(self.x, alpha, self.p, lo, hi)
        K.axpy(self.r, -alpha, self.Ap, lo, hi)
        K.multiply(self.tmp, self.r, self.r, lo, hi)

    def steps(self):
        IN, OUT, INOUT = AccessMode.IN, AccessMode.OUT, AccessMode.INOUT
        acc = self.acc
        scal = [AccessRegion("scal", 0, 4, IN)]
        scal_w = [AccessRegion("scal", 0, 4, INOUT)]
        one_iter = [
            Phase("spmv",
                  lambda lo, hi: K.ell_matvec(self.cols, self.vals, self.p, self.Ap, lo, hi),
                  lambda lo, hi: self.whole("p") + [acc("Ap", lo, hi, OUT)], local=False),
            Phase("pAp", lambda lo, hi: K.multiply(self.tmp, self.p, self.Ap, lo, hi),
                  lambda lo, hi: [acc("p", lo, hi, IN), acc("Ap", lo, hi, IN),
                                  acc("tmp", lo, hi, OUT)]),
            Single("alpha", self._alpha, self.whole("tmp") + scal_w),
            Phase("update", self._update,
                  lambda lo, hi: scal + [acc("x", lo, hi), acc("r", lo, hi), acc("p", lo, hi, IN),
                                         acc("Ap", lo, hi, IN), acc("tmp", lo, hi, OUT)],
                  local=False),
            Single("beta", self._beta, self.whole("tmp") + scal_w),
            Phase("direction", lambda lo, hi: K.xpby(self.p, self.r, self.scal[3], lo, hi),
                  lambda lo, hi: scal + [acc("r", lo, hi, IN), acc("p", lo, hi)], local=False),
        ]
        return one_iter * self.exp.iters

    def outputs(self):
        return {"x": self.x, "history": np.array(self.history)}

    def residual_norms(self):
        return np.sqrt(np.abs(self.history))

    def work_per_rep(self):
        return float(self.exp.ps * self.exp.iters)


class Overlap(Program):
    """Two tasks touching a[0;8] and a[2;6]: ordered only under region dependences."""

    name = "overlap"
    integer = True

    def __init__(self, exp):
        super().__init__(exp)
        if exp.version != "tasks":
            raise ConfigError("overlap is a plain-task program; use --version tasks")
        self.a = np.zeros(max(exp.ps, 8), dtype=np.int64)

    def _body(self, lo, hi):
        time.sleep(self.exp.task_ms / 1000.0)
        self.a[lo:hi] += 1

    def steps(self):
        return [Single("T1", partial(self._body, 0, 8), [AccessRegion("a", 0, 8)]),
                Single("T2", partial(self._body, 2, 6), [AccessRegion("a", 2, 4)])]

    def run_serial(self, reps=None):
        for _ in range(self.exp.reps if reps is None else reps):
            self.a[0:8] += 1
            self.a[2:6] += 1

    def outputs(self):
        return {"a": self.a}

    def work_per_rep(self):
        return 2.0


PROGRAMS = {cls.name: cls for cls in (Daxpy, Stream, NBody, Matmul, CG, Overlap)}


def make_program(exp: Experiment) -> Program:
    exp.validate()
    return PROGRAMS[exp.benchmark](exp)

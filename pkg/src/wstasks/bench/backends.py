"""Compiled vs numpy kernel comparison.

Each kernel is timed on one thread and on ``threads`` threads working on
disjoint slices; the compiled kernels drop the GIL, the numpy ones only do
so inside individual array operations.
"""
from __future__ import annotations

import csv
import io
import threading
import time

import numpy as np

from ..kernels import available_backends, backend_module

COLUMNS = ("kernel", "backend", "threads", "size", "seconds", "speedup_vs_python")


def _cases(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    nb = max(16, int(n ** 0.5))
    mm = max(8, int(round(n ** (1 / 3))))
    a, b, c = rng.random(n), rng.random(n), rng.random(n)
    pos, mass = rng.random((nb, 3)), rng.random(nb)
    A, B = rng.random((mm, mm)), rng.random((mm, mm))

    def daxpy(k):
        out = a.copy()
        return out, n, lambda lo, hi: k.daxpy(out, b, c, lo, hi, 8)

    def triad(k):
        out = np.zeros(n)
        return out, n, lambda lo, hi: k.stream_triad(out, b, c, 0.5, lo, hi)

    def nbody(k):
        out = np.zeros((nb, 3))
        return out, nb, lambda lo, hi: k.nbody_forces(pos, mass, out, 1e-2, lo, hi)

    def matmul(k):
        out = np.zeros((mm, mm))
        return out, mm, lambda lo, hi: k.matmul_rows(A, B, out, lo, hi)

    return {"daxpy": daxpy, "triad": triad, "nbody": nbody, "matmul": matmul}


def _time(fn, size, threads, reps):
    bounds = [(size * t // threads, size * (t + 1) // threads) for t in range(threads)]
    best = float("inf")
    for _ in range(reps):
        ts = [threading.Thread(target=fn, args=b) for b in bounds]
        t0 = time.perf_counter()
        for t in ts:
            t.start()
        for t in ts:
            t.join()
        best = min(best, time.perf_counter() - t0)
    return best


def compare_backends(size: int = 1 << 18, threads: int = 4, reps: int = 3):
    """Rows of timings for every kernel, backend and thread count (1 and ``threads``)."""
    rows = []
    for name, make in _cases(size).items():
        ref = {}
        outputs = {}
        for backend in ["python"] + [b for b in available_backends() if b != "python"]:
            k = backend_module(backend)
            for nt in sorted({1, threads}):
                out, n, fn = make(k)
                secs = _time(fn, n, nt, reps)
                outputs[backend] = out
                if backend == "python":
                    ref[nt] = secs
                rows.append({"kernel": name, "backend": backend, "threads": nt, "size": n,
                             "seconds": secs, "speedup_vs_python": ref[nt] / secs})
        if "cython" in outputs and not np.array_equal(outputs["cython"], outputs["python"]):
            raise AssertionError(f"{name}: backends disagree")
    return rows


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()

"""Reference implementations written independently of the package.

None of these import wstasks internals; they work on plain tuples so a bug
shared between the runtime and its tests is unlikely.
"""
from __future__ import annotations

import math
import random

# an access is (base, start, length, writes)


def elements(start, length):
    return set(range(start, start + length))


def brute_conflict(a, b, mode):
    """Pairwise conflict by enumerating accessed elements (region) or offsets (discrete)."""
    base_a, start_a, len_a, w_a = a
    base_b, start_b, len_b, w_b = b
    if base_a != base_b or not (w_a or w_b):
        return False
    if mode == "discrete":
        return start_a == start_b
    return bool(elements(start_a, len_a) & elements(start_b, len_b))


def brute_edges(program, mode):
    """Direct dependence edges ``(i, j)`` with i < j for a list of access lists.

    Assumes every task is still live when the later one is registered.
    """
    edges = set()
    for j, accs_j in enumerate(program):
        for i in range(j):
            if any(brute_conflict(a, b, mode) for a in program[i] for b in accs_j):
                edges.add((i, j))
    return edges


def transitive_closure(n, edges):
    succ = {i: set() for i in range(n)}
    for i, j in edges:
        succ[i].add(j)
    reach = {}
    for i in reversed(range(n)):
        r = set()
        for j in succ[i]:
            r.add(j)
            r |= reach[j]
        reach[i] = r
    return {(i, j) for i in range(n) for j in reach[i]}


def random_program(rng: random.Random, max_tasks=50, bases=("x", "y", "z"), extent=32):
    program = []
    for _ in range(rng.randint(1, max_tasks)):
        accs = []
        for _ in range(rng.randint(0, 3)):
            start = rng.randrange(extent)
            length = rng.randint(1, extent - start)
            accs.append((rng.choice(bases), start, length, rng.random() < 0.6))
        program.append(accs)
    return program


def guided_batches(total_chunks, team_size):
    """Chunk counts handed out by the guided formula, one request at a time."""
    out, remaining = [], total_chunks
    while remaining > 0:
        n = max(1, math.floor(remaining / team_size))
        n = min(n, remaining)
        out.append(n)
        remaining -= n
    return out


def daxpy_naive(a, b, c, intensity=1):
    """``intensity`` repeated multiply-adds of b*c, averaged back into a."""
    out = list(a)
    for i in range(len(out)):
        s = 0.0
        for _ in range(intensity):
            s = s + b[i] * c[i]
        out[i] = out[i] + s / intensity
    return out


def nbody_naive(pos, mass, eps2):
    n = len(pos)
    acc = [[0.0, 0.0, 0.0] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            d = [pos[j][k] - pos[i][k] for k in range(3)]
            r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + eps2
            s = mass[j] / (r2 * math.sqrt(r2))
            for k in range(3):
                acc[i][k] += s * d[k]
    return acc

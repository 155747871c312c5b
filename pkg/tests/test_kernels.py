import os
import subprocess
import sys

import numpy as np
import pytest

from oracles import daxpy_naive, nbody_naive
from wstasks import kernels
from wstasks.bench.programs import grid_dims, stencil27

BACKENDS = kernels.available_backends()
rng = np.random.default_rng(7)


@pytest.fixture(params=BACKENDS)
def K(request):
    return kernels.backend_module(request.param)


@pytest.mark.parametrize("intensity", [1, 3])
def test_daxpy_matches_naive_loop(K, intensity):
    a, b, c = rng.random(50), rng.random(50), rng.random(50)
    out = a.copy()
    K.daxpy(out, b, c, 10, 40, intensity)
    want = np.array(daxpy_naive(a, b, c, intensity))
    assert np.array_equal(out[10:40], want[10:40])
    assert np.array_equal(out[:10], a[:10]) and np.array_equal(out[40:], a[40:])


def test_stream_kernels(K):
    x, y = rng.random(30), rng.random(30)
    d = np.zeros(30)
    K.stream_copy(d, x, 0, 30)
    assert np.array_equal(d, x)
    K.stream_scale(d, x, 0.5, 0, 30)
    assert np.array_equal(d, 0.5 * x)
    K.stream_add(d, x, y, 0, 30)
    assert np.array_equal(d, x + y)
    K.stream_triad(d, x, y, 0.5, 0, 30)
    assert np.array_equal(d, x + 0.5 * y)


def test_vector_updates(K):
    x, y = rng.random(20), rng.random(20)
    d = y.copy()
    K.axpy(d, 2.0, x, 0, 20)
    assert np.array_equal(d, y + 2.0 * x)
    d = y.copy()
    K.xpby(d, x, 3.0, 0, 20)
    assert np.array_equal(d, x + 3.0 * y)
    K.multiply(d, x, y, 5, 15)
    assert np.array_equal(d[5:15], x[5:15] * y[5:15])


def test_block_sum_is_left_to_right(K):
    x = rng.random(101)
    s = 0.0
    for v in x[3:90]:
        s = s + v
    assert K.block_sum(x, 3, 90) == s
    assert K.block_sum(x, 5, 5) == 0.0


def test_nbody_forces_match_direct_sum(K):
    pos, mass = rng.uniform(-1, 1, (12, 3)), rng.uniform(0.5, 1.5, 12)
    acc = np.zeros((12, 3))
    K.nbody_forces(pos, mass, acc, 1e-2, 0, 12)
    want = np.array(nbody_naive(pos.tolist(), mass.tolist(), 1e-2))
    assert np.allclose(acc, want, rtol=1e-12, atol=1e-14)


def test_two_bodies_pull_equally_and_oppositely(K):
    pos = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, -0.5]])
    mass = np.ones(2)
    acc = np.zeros((2, 3))
    K.nbody_forces(pos, mass, acc, 1e-2, 0, 2)
    assert np.allclose(acc[0], -acc[1], rtol=0, atol=1e-15)


def test_nbody_update(K):
    pos, vel, acc = rng.random((5, 3)), rng.random((5, 3)), rng.random((5, 3))
    p, v = pos.copy(), vel.copy()
    K.nbody_update(p, v, acc, 0.1, 0, 5)
    assert np.array_equal(v, vel + 0.1 * acc)
    assert np.array_equal(p, pos + 0.1 * v)


def test_matmul_rows(K):
    A, B = rng.standard_normal((9, 7)), rng.standard_normal((7, 5))
    C = np.zeros((9, 5))
    K.matmul_rows(A, B, C, 2, 9)
    assert np.allclose(C[2:], A[2:] @ B, rtol=1e-12, atol=1e-13)
    assert not C[:2].any()
    M = rng.standard_normal((6, 6))
    C = np.zeros((6, 6))
    K.matmul_rows(np.eye(6), M, C, 0, 6)
    assert np.array_equal(C, M)


def test_ell_matvec_matches_dense_product(K):
    cols, vals = stencil27(grid_dims(60))
    dense = np.zeros((60, 60))
    for i in range(60):
        for k in range(27):
            dense[i, cols[i, k]] += vals[i, k]
    x, y = rng.random(60), np.zeros(60)
    K.ell_matvec(cols, vals, x, y, 0, 60)
    assert np.allclose(y, dense @ x, rtol=1e-12, atol=1e-12)
    assert np.array_equal(dense, dense.T)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backends_agree_bit_for_bit():
    C, P = kernels.backend_module("cython"), kernels.backend_module("python")
    a, b, c = rng.random(1000), rng.random(1000), rng.random(1000)
    outs = []
    for K in (C, P):
        x = a.copy()
        K.daxpy(x, b, c, 0, 1000, 5)
        acc = np.zeros((40, 3))
        K.nbody_forces(np.linspace(0, 1, 120).reshape(40, 3), b[:40], acc, 1e-2, 0, 40)
        m = np.zeros((10, 10))
        K.matmul_rows(a[:100].reshape(10, 10), b[:100].reshape(10, 10), m, 0, 10)
        outs.append((x, acc, m, K.block_sum(c, 0, 1000)))
    for u, v in zip(*outs):
        assert np.array_equal(u, v)


def test_fallback_is_selected_by_environment():
    env = dict(os.environ, WSTASKS_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", "from wstasks import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backend_benchmark_reports_both():
    from wstasks.bench.backends import compare_backends, to_csv
    rows = compare_backends(size=4096, threads=2, reps=1)
    assert {r["backend"] for r in rows} == {"cython", "python"}
    assert {r["threads"] for r in rows} == {1, 2}
    assert to_csv(rows).splitlines()[0] == "kernel,backend,threads,size,seconds,speedup_vs_python"

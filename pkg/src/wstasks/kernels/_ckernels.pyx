# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled benchmark kernels.  Every loop releases the GIL.

Each kernel works on the index range [lo, hi) so that tasks and chunk
batches can call it on their own slice.  Operation order matches
``_pykernels`` exactly; results are bit-identical between the two.
"""
from libc.math cimport sqrt


def daxpy(double[::1] a, double[::1] b, double[::1] c, Py_ssize_t lo, Py_ssize_t hi,
          int intensity=1):
    cdef Py_ssize_t j
    cdef int k
    cdef double s
    with nogil:
        for j in range(lo, hi):
            s = 0.0
            for k in range(intensity):
                s = s + b[j] * c[j]
            a[j] = a[j] + s / intensity


def stream_copy(double[::1] dst, double[::1] src, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = src[j]


def stream_scale(double[::1] dst, double[::1] src, double q, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = q * src[j]


def stream_add(double[::1] dst, double[::1] x, double[::1] y, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = x[j] + y[j]


def stream_triad(double[::1] dst, double[::1] x, double[::1] y, double q,
                 Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = x[j] + q * y[j]


def multiply(double[::1] dst, double[::1] x, double[::1] y, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = x[j] * y[j]


def axpy(double[::1] dst, double alpha, double[::1] x, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = dst[j] + alpha * x[j]


def xpby(double[::1] dst, double[::1] x, double beta, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    with nogil:
        for j in range(lo, hi):
            dst[j] = x[j] + beta * dst[j]


def block_sum(double[::1] x, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t j
    cdef double s = 0.0
    with nogil:
        for j in range(lo, hi):
            s = s + x[j]
    return s


def nbody_forces(double[:, ::1] pos, double[::1] mass, double[:, ::1] acc, double eps2,
                 Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t i, j, n = pos.shape[0]
    cdef double xi, yi, zi, dx, dy, dz, r2, inv, s, ax, ay, az
    with nogil:
        for i in range(lo, hi):
            xi = pos[i, 0]
            yi = pos[i, 1]
            zi = pos[i, 2]
            ax = 0.0
            ay = 0.0
            az = 0.0
            for j in range(n):
                dx = pos[j, 0] - xi
                dy = pos[j, 1] - yi
                dz = pos[j, 2] - zi
                r2 = dx * dx + dy * dy + dz * dz + eps2
                inv = 1.0 / (r2 * sqrt(r2))
                s = mass[j] * inv
                ax = ax + dx * s
                ay = ay + dy * s
                az = az + dz * s
            acc[i, 0] = ax
            acc[i, 1] = ay
            acc[i, 2] = az


def nbody_update(double[:, ::1] pos, double[:, ::1] vel, double[:, ::1] acc, double dt,
                 Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t i, d
    with nogil:
        for i in range(lo, hi):
            for d in range(3):
                vel[i, d] = vel[i, d] + dt * acc[i, d]
                pos[i, d] = pos[i, d] + dt * vel[i, d]


def matmul_rows(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C,
                Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t i, j, k, m = A.shape[1], p = B.shape[1]
    cdef double s
    with nogil:
        for i in range(lo, hi):
            for j in range(p):
                s = 0.0
                for k in range(m):
                    s = s + A[i, k] * B[k, j]
                C[i, j] = s


def ell_matvec(long long[:, ::1] cols, double[:, ::1] vals, double[::1] x, double[::1] y,
               Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t i, k, K = cols.shape[1]
    cdef double s
    with nogil:
        for i in range(lo, hi):
            s = 0.0
            for k in range(K):
                s = s + vals[i, k] * x[cols[i, k]]
            y[i] = s

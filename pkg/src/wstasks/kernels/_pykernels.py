"""numpy versions of the compiled kernels.

Loops that accumulate run in the same order as the compiled code (the
reduction index is the Python loop, the independent index is vectorized),
so both backends agree to the last bit.
"""
import numpy as np


def daxpy(a, b, c, lo, hi, intensity=1):
    bj, cj = b[lo:hi], c[lo:hi]
    s = np.zeros(hi - lo)
    for _ in range(intensity):
        s = s + bj * cj
    a[lo:hi] = a[lo:hi] + s / intensity


def stream_copy(dst, src, lo, hi):
    dst[lo:hi] = src[lo:hi]


def stream_scale(dst, src, q, lo, hi):
    dst[lo:hi] = q * src[lo:hi]


def stream_add(dst, x, y, lo, hi):
    dst[lo:hi] = x[lo:hi] + y[lo:hi]


def stream_triad(dst, x, y, q, lo, hi):
    dst[lo:hi] = x[lo:hi] + q * y[lo:hi]


def multiply(dst, x, y, lo, hi):
    dst[lo:hi] = x[lo:hi] * y[lo:hi]


def axpy(dst, alpha, x, lo, hi):
    dst[lo:hi] = dst[lo:hi] + alpha * x[lo:hi]


def xpby(dst, x, beta, lo, hi):
    dst[lo:hi] = x[lo:hi] + beta * dst[lo:hi]


def block_sum(x, lo, hi):
    if hi <= lo:
        return 0.0
    # cumsum accumulates strictly left to right, unlike np.sum's pairwise scheme
    return float(np.cumsum(x[lo:hi])[-1])


def nbody_forces(pos, mass, acc, eps2, lo, hi):
    xi, yi, zi = pos[lo:hi, 0], pos[lo:hi, 1], pos[lo:hi, 2]
    ax = np.zeros(hi - lo)
    ay = np.zeros(hi - lo)
    az = np.zeros(hi - lo)
    for j in range(pos.shape[0]):
        dx = pos[j, 0] - xi
        dy = pos[j, 1] - yi
        dz = pos[j, 2] - zi
        r2 = dx * dx + dy * dy + dz * dz + eps2
        inv = 1.0 / (r2 * np.sqrt(r2))
        s = mass[j] * inv
        ax = ax + dx * s
        ay = ay + dy * s
        az = az + dz * s
    acc[lo:hi, 0] = ax
    acc[lo:hi, 1] = ay
    acc[lo:hi, 2] = az


def nbody_update(pos, vel, acc, dt, lo, hi):
    vel[lo:hi] = vel[lo:hi] + dt * acc[lo:hi]
    pos[lo:hi] = pos[lo:hi] + dt * vel[lo:hi]


def matmul_rows(A, B, C, lo, hi):
    s = np.zeros((hi - lo, B.shape[1]))
    for k in range(A.shape[1]):
        s = s + A[lo:hi, k, None] * B[k]
    C[lo:hi] = s


def ell_matvec(cols, vals, x, y, lo, hi):
    s = np.zeros(hi - lo)
    for k in range(cols.shape[1]):
        s = s + vals[lo:hi, k] * x[cols[lo:hi, k]]
    y[lo:hi] = s

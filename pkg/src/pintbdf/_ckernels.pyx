# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: batched tridiagonal LU with partial pivoting and the
power-series recurrence for the CQ weights.

The tridiagonal routines mirror LAPACK ``?gttrf``/``?gttrs`` (same pivot
rule, same storage) but act on a whole batch of systems, one per row of the
input arrays, and release the GIL so several threads can share a batch.
"""
import numpy as np

cdef inline double cabs1(double complex z) nogil:
    return (z.real if z.real >= 0 else -z.real) + (z.imag if z.imag >= 0 else -z.imag)


def gttrf_batch(double complex[:, ::1] dl, double complex[:, ::1] d,
                double complex[:, ::1] du, double complex[:, ::1] du2,
                int[:, ::1] ipiv, Py_ssize_t start, Py_ssize_t stop):
    """Factor rows ``start:stop`` in place. Returns the first singular row or -1."""
    cdef Py_ssize_t b, i, n = d.shape[1]
    cdef double complex fact, temp
    cdef Py_ssize_t bad = -1
    with nogil:
        for b in range(start, stop):
            for i in range(n):
                ipiv[b, i] = <int>i
            for i in range(n - 2):
                du2[b, i] = 0
            for i in range(n - 1):
                if cabs1(d[b, i]) >= cabs1(dl[b, i]):
                    if cabs1(d[b, i]) != 0:
                        fact = dl[b, i] / d[b, i]
                        dl[b, i] = fact
                        d[b, i + 1] = d[b, i + 1] - fact * du[b, i]
                else:
                    fact = d[b, i] / dl[b, i]
                    d[b, i] = dl[b, i]
                    dl[b, i] = fact
                    temp = du[b, i]
                    du[b, i] = d[b, i + 1]
                    d[b, i + 1] = temp - fact * d[b, i + 1]
                    if i < n - 2:
                        du2[b, i] = du[b, i + 1]
                        du[b, i + 1] = -fact * du[b, i + 1]
                    ipiv[b, i] = <int>(i + 1)
            for i in range(n):
                if cabs1(d[b, i]) == 0:
                    if bad < 0:
                        bad = b
                    break
    return bad


def gttrs_batch(const double complex[:, ::1] dl, const double complex[:, ::1] d,
                const double complex[:, ::1] du, const double complex[:, ::1] du2,
                const int[:, ::1] ipiv, double complex[:, ::1] rhs,
                Py_ssize_t start, Py_ssize_t stop):
    """Overwrite ``rhs[start:stop]`` with the solutions of the factored systems."""
    cdef Py_ssize_t b, i, ip, n = d.shape[1]
    cdef double complex temp
    with nogil:
        for b in range(start, stop):
            for i in range(n - 1):
                ip = ipiv[b, i]
                temp = rhs[b, 2 * i + 1 - ip] - dl[b, i] * rhs[b, ip]
                rhs[b, i] = rhs[b, ip]
                rhs[b, i + 1] = temp
            rhs[b, n - 1] = rhs[b, n - 1] / d[b, n - 1]
            if n > 1:
                rhs[b, n - 2] = (rhs[b, n - 2] - du[b, n - 2] * rhs[b, n - 1]) / d[b, n - 2]
            for i in range(n - 3, -1, -1):
                rhs[b, i] = (rhs[b, i] - du[b, i] * rhs[b, i + 1]
                             - du2[b, i] * rhs[b, i + 2]) / d[b, i]


def power_series(const double[::1] coef, double alpha, Py_ssize_t n_max):
    """Taylor coefficients 0..n_max of ``p(x)**alpha`` for a polynomial ``p``."""
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef Py_ssize_t n, i, top
    cdef double s, a0 = coef[0]
    out = np.empty(n_max + 1, dtype=np.float64)
    cdef double[::1] w = out
    w[0] = a0 ** alpha
    with nogil:
        for n in range(1, n_max + 1):
            s = 0.0
            top = k if k < n else n
            for i in range(1, top + 1):
                s += ((alpha + 1.0) * i - n) * coef[i] * w[n - i]
            w[n] = s / (n * a0)
    return out

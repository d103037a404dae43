"""Pure-Python counterparts of the compiled kernels in ``_ckernels.pyx``.

Same signatures and storage. The tridiagonal routines loop over the batch
and hand each system to LAPACK through :mod:`scipy.linalg.lapack`.
"""
import numpy as np
from scipy.linalg import lapack


def gttrf_batch(dl, d, du, du2, ipiv, start, stop):
    bad = -1
    n = d.shape[1]
    for b in range(start, stop):
        if n <= 2:
            # the LAPACK wrapper rejects n == 2
            if not _gttrf_small(dl[b], d[b], du[b], ipiv[b]) and bad < 0:
                bad = b
            continue
        dl_b, d_b, du_b, du2_b, piv, info = lapack.zgttrf(dl[b], d[b], du[b])
        dl[b], d[b], du[b] = dl_b, d_b, du_b
        if n > 2:
            du2[b] = du2_b
        ipiv[b] = piv - 1
        if info > 0 and bad < 0:
            bad = b
    return bad


def _cabs1(z):
    return abs(z.real) + abs(z.imag)


def _gttrf_small(dl, d, du, ipiv):
    ipiv[:] = np.arange(len(d))
    if len(d) == 2:
        if _cabs1(d[0]) >= _cabs1(dl[0]):
            if _cabs1(d[0]) != 0:
                dl[0] = dl[0] / d[0]
                d[1] = d[1] - dl[0] * du[0]
        else:
            fact = d[0] / dl[0]
            d[0] = dl[0]
            dl[0] = fact
            temp = du[0]
            du[0] = d[1]
            d[1] = temp - fact * d[1]
            ipiv[0] = 1
    return all(_cabs1(x) != 0 for x in d)


def gttrs_batch(dl, d, du, du2, ipiv, rhs, start, stop):
    n = d.shape[1]
    for b in range(start, stop):
        if n <= 2:
            if n == 2:
                ip = ipiv[b, 0]
                temp = rhs[b, 1 - ip] - dl[b, 0] * rhs[b, ip]
                rhs[b, 0] = rhs[b, ip]
                rhs[b, 1] = temp
                rhs[b, 1] /= d[b, 1]
                rhs[b, 0] = (rhs[b, 0] - du[b, 0] * rhs[b, 1]) / d[b, 0]
            else:
                rhs[b] = rhs[b] / d[b]
            continue
        u2 = du2[b]
        x, info = lapack.zgttrs(dl[b], d[b], du[b], u2, ipiv[b] + 1, rhs[b])
        rhs[b] = x


def power_series(coef, alpha, n_max):
    coef = np.asarray(coef, dtype=float)
    k = len(coef) - 1
    a0 = coef[0]
    w = np.empty(n_max + 1)
    w[0] = a0**alpha
    i = np.arange(1, k + 1)
    scaled = coef[1:]
    for n in range(1, n_max + 1):
        top = min(k, n)
        ii = i[:top]
        w[n] = np.dot(((alpha + 1.0) * ii - n) * scaled[:top], w[n - ii]) / (n * a0)
    return w

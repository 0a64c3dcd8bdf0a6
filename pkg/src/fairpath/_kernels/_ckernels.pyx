# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels in ``_pykernels``.

Same contract as the python backend; hand-rolled Cholesky solves to keep
per-call overhead out of the PC/FCI/GES inner loops.
"""

from libc.math cimport erfc, fabs, log, sqrt
from libc.stdlib cimport free, malloc

import numpy as np

BACKEND_NAME = "cython"

CLAMP = 1.0 - 1e-12


cdef int _cholesky(double* a, int k) noexcept nogil:
    # in-place lower-triangular Cholesky; -1 when not positive definite
    cdef int i, j, m
    cdef double s
    for j in range(k):
        s = a[j * k + j]
        for m in range(j):
            s -= a[j * k + m] * a[j * k + m]
        if s <= 1e-13:
            return -1
        a[j * k + j] = sqrt(s)
        for i in range(j + 1, k):
            s = a[i * k + j]
            for m in range(j):
                s -= a[i * k + m] * a[j * k + m]
            a[i * k + j] = s / a[j * k + j]
    return 0


cdef void _forward(double* L, double* b, int k) noexcept nogil:
    # solve L x = b in place
    cdef int i, m
    for i in range(k):
        for m in range(i):
            b[i] -= L[i * k + m] * b[m]
        b[i] /= L[i * k + i]


cdef void _backward(double* L, double* b, int k) noexcept nogil:
    # solve L^T x = b in place
    cdef int i, m
    for i in range(k - 1, -1, -1):
        for m in range(i + 1, k):
            b[i] -= L[m * k + i] * b[m]
        b[i] /= L[i * k + i]


def partial_correlation(double[:, ::1] corr, int i, int j, cond):
    """Partial correlation of i, j given ``cond``; clamped to +-(1 - 1e-12)."""
    cdef long[::1] c = np.ascontiguousarray(cond, dtype=np.int64)
    cdef int k = c.shape[0] + 2
    cdef int a, b, st
    cdef double p00, p01, p11, r
    if k == 2:
        r = corr[i, j]
    else:
        buf = <double*> malloc(sizeof(double) * (k * k + 2 * k))
        if buf == NULL:
            raise MemoryError()
        idx = <long*> malloc(sizeof(long) * k)
        if idx == NULL:
            free(buf)
            raise MemoryError()
        try:
            idx[0] = i
            idx[1] = j
            for a in range(2, k):
                idx[a] = c[a - 2]
            for a in range(k):
                for b in range(k):
                    buf[a * k + b] = corr[idx[a], idx[b]]
            st = _cholesky(buf, k)
            if st != 0:
                raise np.linalg.LinAlgError("conditioning submatrix is singular")
            w0 = buf + k * k
            w1 = w0 + k
            for a in range(k):
                w0[a] = 1.0 if a == 0 else 0.0
                w1[a] = 1.0 if a == 1 else 0.0
            _forward(buf, w0, k)
            _forward(buf, w1, k)
            p00 = 0.0
            p01 = 0.0
            p11 = 0.0
            for a in range(k):
                p00 += w0[a] * w0[a]
                p01 += w0[a] * w1[a]
                p11 += w1[a] * w1[a]
            if p00 * p11 <= 0.0:
                raise np.linalg.LinAlgError("non-positive precision diagonal")
            r = -p01 / sqrt(p00 * p11)
        finally:
            free(idx)
            free(buf)
    if r > CLAMP:
        r = CLAMP
    elif r < -CLAMP:
        r = -CLAMP
    return r


def fisher_z_stat(double r, int n, int k):
    cdef double z = 0.5 * log((1.0 + r) / (1.0 - r))
    return sqrt(n - k - 3.0) * fabs(z)


def normal_sf2(double stat):
    return erfc(stat / sqrt(2.0))


def gauss_bic_local(double[:, ::1] cov, int n, int node, parents):
    """(score, ridge_used) Gaussian BIC local score; see python twin."""
    cdef long[::1] p = np.ascontiguousarray(parents, dtype=np.int64)
    cdef int k = p.shape[0]
    cdef int a, b, st
    cdef double resid = cov[node, node]
    cdef double acc
    cdef bint ridge_used = False
    if k > 0:
        buf = <double*> malloc(sizeof(double) * (k * k + 2 * k))
        if buf == NULL:
            raise MemoryError()
        try:
            rhs = buf + k * k
            save = rhs + k
            for a in range(k):
                for b in range(k):
                    buf[a * k + b] = cov[p[a], p[b]]
                save[a] = cov[p[a], node]
                rhs[a] = save[a]
            st = _cholesky(buf, k)
            if st != 0:
                ridge_used = True
                for a in range(k):
                    for b in range(k):
                        buf[a * k + b] = cov[p[a], p[b]]
                    buf[a * k + a] += 1e-8
                    rhs[a] = save[a]
                st = _cholesky(buf, k)
                if st != 0:
                    raise np.linalg.LinAlgError("parent covariance is singular")
            _forward(buf, rhs, k)
            _backward(buf, rhs, k)
            acc = 0.0
            for a in range(k):
                acc += save[a] * rhs[a]
            resid -= acc
        finally:
            free(buf)
    if resid < 1e-12:
        resid = 1e-12
    return -n * log(resid) - k * log(<double> n), ridge_used

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log1p, pow, NAN

cnp.import_array()

cdef double SERIES_TOL = 1e-16
cdef Py_ssize_t MAX_TERMS = 200000


cdef double _hyp2f1(double a, double b, double c, double x) noexcept nogil:
    cdef double y, cb, s, t, ratio
    cdef Py_ssize_t k
    if x > 0.0:
        return NAN
    if x == 0.0 or a == 0.0:
        return 1.0
    y = x / (x - 1.0)
    cb = c - b
    s = 1.0
    t = 1.0
    for k in range(MAX_TERMS):
        ratio = (a + k) * (cb + k) / ((c + k) * (k + 1.0)) * y
        t *= ratio
        s += t
        if t == 0.0:
            return s * pow(1.0 - x, -a)
        if fabs(t) <= SERIES_TOL * fabs(s) and fabs(ratio) < 1.0:
            return s * pow(1.0 - x, -a)
    return NAN


def hyp2f1(double a, double b, double c, double x):
    return _hyp2f1(a, b, c, x)


def hyp2f1_array(double a, double b, double c, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _hyp2f1(a, b, c, xv[i])
    return out.reshape(np.shape(x))


def segment_log1p_sum(values, offsets):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t nseg = off.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(nseg, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in range(nseg):
            acc = 0.0
            for j in range(off[i], off[i + 1]):
                acc += log1p(v[j])
            out[i] = acc
    return out


def timeline_collisions(starts, double tau_k, t_hat, double tau_i):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st = np.ascontiguousarray(starts, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th = np.sort(np.asarray(t_hat, dtype=np.float64))
    cdef Py_ssize_t n = th.shape[0], m = st.shape[0]
    cdef Py_ssize_t i, j = 0
    cdef long long hits = 0
    cdef double t
    with nogil:
        for i in range(n):
            t = th[i]
            while j + 1 < m and st[j + 1] <= t:
                j += 1
            if t < st[j] + tau_k or t + tau_i > st[j + 1]:
                hits += 1
    return int(hits)

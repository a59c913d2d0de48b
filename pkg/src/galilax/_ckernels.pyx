# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration hot loop; see ``_pykernels`` for the reference version."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow

cnp.import_array()

cdef double COLLISION_REL2 = 1e-24


cdef int _reduced(const double[:, ::1] b, const double[:, ::1] deltas,
                  const double[::1] coef, double alpha, double eps2, bint singular,
                  double[:, ::1] out, double[::1] r2) noexcept nogil:
    cdef Py_ssize_t npair = deltas.shape[0], m = b.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double acc, s, w, scale = 0.0
    for k in range(npair):
        acc = 0.0
        for i in range(m):
            s = 0.0
            for j in range(m):
                s = s + b[i, j] * deltas[k, j]
            acc = acc + deltas[k, i] * s
        r2[k] = acc
        if acc > scale:
            scale = acc
    if singular and eps2 <= 0.0:
        for k in range(npair):
            if scale <= 0.0 or r2[k] <= COLLISION_REL2 * scale:
                return <int>k
    for i in range(m):
        for j in range(m):
            out[i, j] = 0.0
    for k in range(npair):
        s = r2[k] + eps2
        if alpha == 1.0:
            w = coef[k] / (s * sqrt(s))
        else:
            w = coef[k] * alpha * pow(s, -0.5 * alpha - 1.0)
        for i in range(m):
            acc = w * deltas[k, i]
            for j in range(i, m):
                out[i, j] = out[i, j] + acc * deltas[k, j]
    for i in range(m):
        for j in range(i):
            out[i, j] = out[j, i]
    return -1


def reduced_wc_power(b, deltas, coef, double alpha, double eps2, bint singular):
    cdef const double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = bv.shape[0]
    out = np.zeros((m, m))
    r2 = np.empty(deltas.shape[0])
    cdef int bad = _reduced(bv, np.ascontiguousarray(deltas, dtype=np.float64),
                            np.ascontiguousarray(coef, dtype=np.float64),
                            alpha, eps2, singular, out, r2)
    if bad >= 0:
        out[:] = 0.0
    return out, bad


def z_rhs_power(Z, deltas, coef, double alpha, double eps2, minv, bint singular):
    cdef const double[:, ::1] z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef const double[::1] mi = np.ascontiguousarray(minv, dtype=np.float64)
    cdef Py_ssize_t d = z.shape[0], m = z.shape[1] // 2
    cdef Py_ssize_t a, i, j
    cdef double s
    b_arr = np.empty((m, m))
    at_arr = np.empty((m, m))
    out_arr = np.empty((d, 2 * m))
    cdef double[:, ::1] b = b_arr
    cdef double[:, ::1] at = at_arr
    cdef double[:, ::1] out = out_arr
    for i in range(m):
        for j in range(i, m):
            s = 0.0
            for a in range(d):
                s = s + z[a, i] * z[a, j]
            b[i, j] = s
            b[j, i] = s
    cdef int bad = _reduced(b, np.ascontiguousarray(deltas, dtype=np.float64),
                            np.ascontiguousarray(coef, dtype=np.float64),
                            alpha, eps2, singular, at, np.empty(deltas.shape[0]))
    if bad >= 0:
        out_arr[:] = 0.0
        return out_arr, bad
    for a in range(d):
        for i in range(m):
            out[a, i] = z[a, m + i] * mi[i]
            s = 0.0
            for j in range(m):
                s = s + z[a, j] * at[j, i]
            out[a, m + i] = -s
    return out_arr, -1


def k_rhs_power(K, deltas, coef, double alpha, double eps2, minv, bint singular):
    cdef const double[:, ::1] k = np.ascontiguousarray(K, dtype=np.float64)
    cdef const double[::1] mi = np.ascontiguousarray(minv, dtype=np.float64)
    cdef Py_ssize_t m = k.shape[0] // 2, n2 = k.shape[0]
    cdef Py_ssize_t i, j, l
    cdef double s
    b_arr = np.empty((m, m))
    at_arr = np.empty((m, m))
    out_arr = np.empty((n2, n2))
    cdef double[:, ::1] b = b_arr
    cdef double[:, ::1] at = at_arr
    cdef double[:, ::1] out = out_arr
    # b = sym(-K[m:, :m])
    for i in range(m):
        for j in range(m):
            b[i, j] = -0.5 * (k[m + i, j] + k[m + j, i])
    cdef int bad = _reduced(b, np.ascontiguousarray(deltas, dtype=np.float64),
                            np.ascontiguousarray(coef, dtype=np.float64),
                            alpha, eps2, singular, at, np.empty(deltas.shape[0]))
    if bad >= 0:
        out_arr[:] = 0.0
        return out_arr, bad
    # P = [[0, At], [-diag(minv), 0]];  out = P K - K P
    for i in range(n2):
        for j in range(n2):
            # (P K)[i, j]
            if i < m:
                s = 0.0
                for l in range(m):
                    s = s + at[i, l] * k[m + l, j]
            else:
                s = -mi[i - m] * k[i - m, j]
            # (K P)[i, j]
            if j < m:
                s = s + k[i, m + j] * mi[j]
            else:
                for l in range(m):
                    s = s - k[i, l] * at[l, j - m]
            out[i, j] = s
    return out_arr, -1

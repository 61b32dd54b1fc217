# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled objective tables over every binary treatment vector.

Mirrors ``_kernels_py.objective_table``; see ``kernels`` for the contract.
Vectors are visited in Gray-code order so each step flips one agent and
updates the per-group sums in O(1); the sums are rebuilt from scratch every
``RESYNC`` steps to bound rounding drift.
"""

import numpy as np

from libc.math cimport fabs
from libc.stdlib cimport calloc, free
from libc.stdint cimport int64_t


cdef enum:
    REG_NONE = 0
    REG_DP = 1
    REG_FPR = 2
    REG_FNR = 3
    REG_EEO = 4
    REG_CAL = 5
    REG_BGL = 6
    RESYNC = 256


cdef inline double _reg_value(int reg, int n_groups, const double *counts, const double *s_t,
                              const double *s_fp, const double *s_tp, const double *s_fn,
                              const double *s_l, double total_p) noexcept nogil:
    cdef double r = 0.0, ra, rb, total_t
    cdef int g
    if reg == REG_DP:
        r = fabs(s_t[0] * counts[1] - s_t[1] * counts[0]) / (counts[0] * counts[1])
    elif reg == REG_FPR:
        ra = s_fp[0] / s_t[0] if s_t[0] > 0.0 else 0.0
        rb = s_fp[1] / s_t[1] if s_t[1] > 0.0 else 0.0
        r = fabs(ra - rb)
    elif reg == REG_FNR:
        r = fabs(s_fn[0] / counts[0] - s_fn[1] / counts[1])
    elif reg == REG_EEO:
        if total_p > 0.0:
            total_t = s_t[0] + s_t[1]
            ra = s_tp[0] / s_t[0] if s_t[0] > 0.0 else 0.0
            rb = s_tp[1] / s_t[1] if s_t[1] > 0.0 else 0.0
            r = fabs(ra * total_t / total_p - rb * total_t / total_p)
    elif reg == REG_CAL or reg == REG_BGL:
        for g in range(n_groups):
            r = r + s_l[g] / counts[g]
    return r


def objective_table(const double[:, ::1] p1, const int64_t[::1] group, int n_groups,
                    int reg, double lam):
    cdef Py_ssize_t N = p1.shape[0]
    cdef Py_ssize_t m = p1.shape[1]
    cdef Py_ssize_t K = (<Py_ssize_t>1) << m
    out = np.empty((N, K), dtype=np.float64)
    cdef double[:, ::1] o = out

    cdef double *counts = <double *>calloc(n_groups, sizeof(double))
    cdef double *s_t = <double *>calloc(n_groups, sizeof(double))
    cdef double *s_fp = <double *>calloc(n_groups, sizeof(double))
    cdef double *s_tp = <double *>calloc(n_groups, sizeof(double))
    cdef double *s_fn = <double *>calloc(n_groups, sizeof(double))
    cdef double *s_l = <double *>calloc(n_groups, sizeof(double))
    cdef char *bit = <char *>calloc(m, sizeof(char))
    if not (counts and s_t and s_fp and s_tp and s_fn and s_l and bit):
        free(counts); free(s_t); free(s_fp); free(s_tp); free(s_fn); free(s_l); free(bit)
        raise MemoryError()

    cdef Py_ssize_t n, k, i, g, b, code
    cdef double p, loss, total_p, sign
    cdef double w = 1.0 - lam

    try:
        with nogil:
            for i in range(m):
                counts[group[i]] += 1.0
            for n in range(N):
                total_p = 0.0
                for i in range(m):
                    total_p = total_p + p1[n, i]
                    bit[i] = 0
                code = 0
                k = 0
                while k < K:
                    if k % RESYNC == 0:
                        for g in range(n_groups):
                            s_t[g] = 0.0
                            s_fp[g] = 0.0
                            s_tp[g] = 0.0
                            s_fn[g] = 0.0
                            s_l[g] = 0.0
                        loss = 0.0
                        for i in range(m):
                            p = p1[n, i]
                            g = group[i]
                            if bit[i]:
                                s_t[g] += 1.0
                                s_fp[g] += 1.0 - p
                                s_tp[g] += p
                                s_l[g] += 1.0 - p
                                loss = loss + (1.0 - p)
                            else:
                                s_fn[g] += p
                                s_l[g] += p
                                loss = loss + p
                    o[n, code] = w * (loss / m) + lam * _reg_value(
                        reg, n_groups, counts, s_t, s_fp, s_tp, s_fn, s_l, total_p)
                    k += 1
                    if k == K:
                        break
                    # flip the agent at the lowest set bit of k
                    b = 0
                    while not ((k >> b) & 1):
                        b += 1
                    i = m - 1 - b
                    code = code ^ ((<Py_ssize_t>1) << b)
                    p = p1[n, i]
                    g = group[i]
                    bit[i] = 1 - bit[i]
                    sign = 1.0 if bit[i] else -1.0
                    s_t[g] += sign
                    s_fp[g] += sign * (1.0 - p)
                    s_tp[g] += sign * p
                    s_fn[g] -= sign * p
                    s_l[g] += sign * (1.0 - 2.0 * p)
                    loss = loss + sign * (1.0 - 2.0 * p)
    finally:
        free(counts); free(s_t); free(s_fp); free(s_tp); free(s_fn); free(s_l); free(bit)
    return out

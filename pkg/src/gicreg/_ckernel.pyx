# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch evaluator for sums of phi terms.

Each term has the form phi(sum_s num[t,s] g_s / (1 + sum_s den[t,s] g_s)) where
g_s(w) = gains[n,s] * shapes[shape_idx[n,s], w]. The GIL is released while
looping, so several threads can evaluate disjoint chunks concurrently.
"""
import numpy as np

from libc.math cimport log2

cdef enum:
    MAXDIM = 64


def phi_terms(const double[:, ::1] gains,
              const long long[:, ::1] shape_idx,
              const double[:, ::1] shapes,
              const double[::1] weights,
              const double[:, ::1] num,
              const double[:, ::1] den):
    cdef Py_ssize_t n_pts = gains.shape[0]
    cdef Py_ssize_t n_sp = gains.shape[1]
    cdef Py_ssize_t n_w = shapes.shape[1]
    cdef Py_ssize_t n_t = num.shape[0]
    if n_sp > MAXDIM or n_t > MAXDIM:
        raise ValueError("too many spectra or terms for the compiled kernel")
    if shape_idx.shape[0] != n_pts or shape_idx.shape[1] != n_sp:
        raise ValueError("shape_idx does not match gains")
    if weights.shape[0] != n_w:
        raise ValueError("weights do not match the shape table")
    if num.shape[1] != n_sp or den.shape[1] != n_sp or den.shape[0] != n_t:
        raise ValueError("term matrices do not match gains")

    out = np.zeros((n_pts, n_t), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef double g[MAXDIM]
    cdef double acc[MAXDIM]
    cdef long long row[MAXDIM]
    # sparse term structure
    cdef int nnz_num[MAXDIM]
    cdef int nnz_den[MAXDIM]
    cdef int idx_num[MAXDIM][MAXDIM]
    cdef int idx_den[MAXDIM][MAXDIM]
    cdef double c_num[MAXDIM][MAXDIM]
    cdef double c_den[MAXDIM][MAXDIM]
    cdef Py_ssize_t i, k, s, t, j
    cdef double a, b, wk

    for t in range(n_t):
        nnz_num[t] = 0
        nnz_den[t] = 0
        for s in range(n_sp):
            if num[t, s] != 0.0:
                idx_num[t][nnz_num[t]] = <int>s
                c_num[t][nnz_num[t]] = num[t, s]
                nnz_num[t] += 1
            if den[t, s] != 0.0:
                idx_den[t][nnz_den[t]] = <int>s
                c_den[t][nnz_den[t]] = den[t, s]
                nnz_den[t] += 1

    with nogil:
        for i in range(n_pts):
            for t in range(n_t):
                acc[t] = 0.0
            for s in range(n_sp):
                row[s] = shape_idx[i, s]
            for k in range(n_w):
                wk = weights[k]
                for s in range(n_sp):
                    g[s] = gains[i, s] * shapes[row[s], k]
                for t in range(n_t):
                    if nnz_num[t] == 0:
                        continue
                    a = 0.0
                    for j in range(nnz_num[t]):
                        a = a + c_num[t][j] * g[idx_num[t][j]]
                    b = 1.0
                    for j in range(nnz_den[t]):
                        b = b + c_den[t][j] * g[idx_den[t][j]]
                    acc[t] = acc[t] + wk * log2(1.0 + a / b)
            for t in range(n_t):
                res[i, t] = acc[t]
    return out

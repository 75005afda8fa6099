# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edit-distance kernels (see _pykernels for the reference semantics)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef int _lev(const int[:] a, const int[:] b, int[:] prev, int[:] cur):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i, j
    cdef int cost, d, tmp
    if n == 0:
        return <int> m
    if m == 0:
        return <int> n
    for j in range(m + 1):
        prev[j] = <int> j
    for i in range(1, n + 1):
        cur[0] = <int> i
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d = prev[j] + 1
            tmp = cur[j - 1] + 1
            if tmp < d:
                d = tmp
            tmp = prev[j - 1] + cost
            if tmp < d:
                d = tmp
            cur[j] = d
        prev, cur = cur, prev
    return prev[m]


def levenshtein(a, b):
    cdef const int[:] av = a
    cdef const int[:] bv = b
    cdef cnp.ndarray[int, ndim=1] row1 = np.empty(bv.shape[0] + 1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] row2 = np.empty(bv.shape[0] + 1, dtype=np.int32)
    return _lev(av, bv, row1, row2)


def normalized_distance_matrix(bag_a, bag_b):
    cdef Py_ssize_t na = len(bag_a)
    cdef Py_ssize_t nb = len(bag_b)
    cdef cnp.ndarray[double, ndim=2] out = np.empty((na, nb), dtype=np.float64)
    cdef Py_ssize_t i, j, denom, maxlen = 1
    for j in range(nb):
        if len(bag_b[j]) > maxlen:
            maxlen = len(bag_b[j])
    cdef cnp.ndarray[int, ndim=1] row1 = np.empty(maxlen + 1, dtype=np.int32)
    cdef cnp.ndarray[int, ndim=1] row2 = np.empty(maxlen + 1, dtype=np.int32)
    cdef const int[:] av
    cdef const int[:] bv
    for i in range(na):
        av = bag_a[i]
        for j in range(nb):
            bv = bag_b[j]
            denom = av.shape[0] if av.shape[0] > bv.shape[0] else bv.shape[0]
            if denom == 0:
                out[i, j] = 0.0
            else:
                out[i, j] = _lev(av, bv, row1, row2) / <double> denom
    return out

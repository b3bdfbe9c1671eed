# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for histogram accumulation, selective-max and slice EMD."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def accumulate(const cnp.int64_t[::1] index, const double[::1] weight, Py_ssize_t size):
    cdef Py_ssize_t i, k, n = index.shape[0]
    out = np.zeros(size, dtype=np.float64)
    cdef double[::1] acc = out
    with nogil:
        for i in range(n):
            k = index[i]
            if k >= 0:
                acc[k] += weight[i]
    return out


def select_max(const double[:, ::1] power, const cnp.uint8_t[:, ::1] mask):
    cdef Py_ssize_t nc = power.shape[0], nb = power.shape[1]
    cdef Py_ssize_t a, b
    cdef double best
    out = np.full(nb, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = out
    with nogil:
        for b in range(nb):
            best = -1.0
            for a in range(nc):
                if mask[a, b] and power[a, b] > best:
                    best = power[a, b]
                    idx[b] = a
    return out


def emd_slices(const double[:, ::1] T, const cnp.int64_t[::1] hot, double dv):
    cdef Py_ssize_t nv = T.shape[0], nb = T.shape[1]
    cdef Py_ssize_t v, b
    cdef double mass, cdf, acc, step
    emd = np.zeros(nb, dtype=np.float64)
    valid = np.zeros(nb, dtype=np.bool_)
    cdef double[::1] e = emd
    cdef cnp.uint8_t[::1] ok = valid.view(np.uint8)
    with nogil:
        for b in range(nb):
            if hot[b] < 0:
                continue
            mass = 0.0
            for v in range(nv):
                mass += T[v, b]
            if mass <= 0.0:
                continue
            cdf = 0.0
            acc = 0.0
            for v in range(nv):
                cdf += T[v, b] / mass
                step = 1.0 if v >= hot[b] else 0.0
                acc += fabs(cdf - step)
            e[b] = acc * dv
            ok[b] = 1
    return emd, valid

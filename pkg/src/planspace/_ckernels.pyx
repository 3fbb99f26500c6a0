# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: stress residuals, normal-equation assembly, raster ops.

Mirrors planspace._pykernels; see that module for the semantic contracts.
"""

import numpy as np

from libc.math cimport sqrt


def pair_residuals(const double[:, ::1] coords, const int[::1] ii,
                   const int[::1] jj, const double[::1] targets, double eps):
    cdef Py_ssize_t m = ii.shape[0]
    cdef Py_ssize_t d = coords.shape[1]
    res_arr = np.empty(m)
    units_arr = np.empty((m, d))
    norms_arr = np.empty(m)
    cdef double[::1] res = res_arr
    cdef double[:, ::1] units = units_arr
    cdef double[::1] norms = norms_arr
    cdef Py_ssize_t p, k
    cdef int a, b
    cdef double acc, nrm, safe
    for p in range(m):
        a = ii[p]
        b = jj[p]
        acc = 0.0
        for k in range(d):
            units[p, k] = coords[a, k] - coords[b, k]
            acc += units[p, k] * units[p, k]
        nrm = sqrt(acc)
        norms[p] = nrm
        res[p] = nrm - targets[p]
        if nrm == 0.0:
            units[p, 0] = 1.0
            for k in range(1, d):
                units[p, k] = 0.0
        else:
            safe = nrm if nrm > eps else eps
            for k in range(d):
                units[p, k] /= safe
    return res_arr, units_arr, norms_arr


def normal_equations(const double[:, ::1] coords, const int[::1] ii,
                     const int[::1] jj, const double[::1] targets, double eps):
    cdef Py_ssize_t n = coords.shape[0]
    cdef Py_ssize_t d = coords.shape[1]
    cdef Py_ssize_t m = ii.shape[0]
    res_arr, units_arr, _ = pair_residuals(coords, ii, jj, targets, eps)
    cdef double[::1] res = res_arr
    cdef double[:, ::1] units = units_arr
    A_arr = np.zeros((n * d, n * d))
    g_arr = np.zeros(n * d)
    cdef double[:, ::1] A = A_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t p, r, c
    cdef int a, b
    cdef double block, w
    for p in range(m):
        a = ii[p]
        b = jj[p]
        for r in range(d):
            w = units[p, r] * res[p]
            g[a * d + r] += w
            g[b * d + r] -= w
            for c in range(d):
                block = units[p, r] * units[p, c]
                A[a * d + r, a * d + c] += block
                A[b * d + r, b * d + c] += block
                A[a * d + r, b * d + c] -= block
                A[b * d + r, a * d + c] -= block
    return A_arr, g_arr, res_arr


cdef inline void _iou_accumulate(const unsigned char[:, ::1] a,
                                 const unsigned char[:, ::1] b,
                                 bint occupancy, long* inter, long* union_) noexcept nogil:
    # Branch-free body so the compiler can vectorize the byte compares.
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t cols = a.shape[1]
    cdef Py_ssize_t y, x
    cdef unsigned char av, bv
    cdef long i_acc = 0
    cdef long u_acc = 0
    if occupancy:
        for y in range(rows):
            for x in range(cols):
                av = a[y, x]
                bv = b[y, x]
                u_acc += ((av | bv) != 0)
                i_acc += (av != 0) & (bv != 0)
    else:
        for y in range(rows):
            for x in range(cols):
                av = a[y, x]
                bv = b[y, x]
                u_acc += ((av | bv) != 0)
                i_acc += (av == bv) & (av != 0)
    inter[0] = i_acc
    union_[0] = u_acc


def iou_counts(const unsigned char[:, ::1] a, const unsigned char[:, ::1] b,
               bint occupancy):
    cdef long inter = 0
    cdef long union_ = 0
    _iou_accumulate(a, b, occupancy, &inter, &union_)
    return inter, union_


def pixel_diff(const unsigned char[:, ::1] a, const unsigned char[:, ::1] b):
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t cols = a.shape[1]
    cdef long count = 0
    cdef Py_ssize_t y, x
    for y in range(rows):
        for x in range(cols):
            count += (a[y, x] != b[y, x])
    return count


def iou_distance_stack(const unsigned char[:, ::1] query,
                       const unsigned char[:, :, ::1] stack, bint occupancy):
    cdef Py_ssize_t k = stack.shape[0]
    out_arr = np.empty(k)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t idx
    cdef long inter, union_
    for idx in range(k):
        inter = 0
        union_ = 0
        _iou_accumulate(query, stack[idx], occupancy, &inter, &union_)
        if union_ == 0:
            out[idx] = 0.0
        else:
            out[idx] = 1.0 - (<double>inter) / (<double>union_)
    return out_arr

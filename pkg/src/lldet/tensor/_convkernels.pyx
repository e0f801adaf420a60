# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernels.

Loop nests are ordered so that every output element accumulates its
terms in the same sequence as the numpy fallback (corr: ci, u, v;
scatter: c1, u, v; weight grad: n, i, j).  Together with the
-ffp-contract=off build flag this keeps the two backends bit-identical.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def corr2d(double[:, :, :, ::1] xp, double[:, :, :, ::1] k, int stride):
    cdef Py_ssize_t n = xp.shape[0], ci = xp.shape[1], hp = xp.shape[2], wp = xp.shape[3]
    cdef Py_ssize_t co = k.shape[0], kh = k.shape[2], kw = k.shape[3]
    cdef Py_ssize_t ho = (hp - kh) // stride + 1
    cdef Py_ssize_t wo = (wp - kw) // stride + 1
    out_arr = np.zeros((n, co, ho, wo), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, o, i, j, c, u, v
    cdef double acc
    with nogil:
        for b in range(n):
            for o in range(co):
                for i in range(ho):
                    for j in range(wo):
                        acc = 0.0
                        for c in range(ci):
                            for u in range(kh):
                                for v in range(kw):
                                    acc = acc + xp[b, c, i * stride + u, j * stride + v] * k[o, c, u, v]
                        out[b, o, i, j] = acc
    return out_arr


def scatter2d(double[:, :, :, ::1] x, double[:, :, :, ::1] k, int stride,
              Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t n = x.shape[0], c1 = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t c2 = k.shape[1], kh = k.shape[2], kw = k.shape[3]
    out_arr = np.zeros((n, c2, out_h, out_w), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, o, c, u, v, i, j
    cdef double kv
    with nogil:
        for b in range(n):
            for o in range(c2):
                for c in range(c1):
                    for u in range(kh):
                        for v in range(kw):
                            kv = k[c, o, u, v]
                            for i in range(h):
                                for j in range(w):
                                    out[b, o, i * stride + u, j * stride + v] = (
                                        out[b, o, i * stride + u, j * stride + v]
                                        + x[b, c, i, j] * kv
                                    )
    return out_arr


def corr2d_k(double[:, :, :, ::1] xp, double[:, :, :, ::1] gy,
             Py_ssize_t kh, Py_ssize_t kw, int stride):
    cdef Py_ssize_t n = xp.shape[0], ci = xp.shape[1]
    cdef Py_ssize_t co = gy.shape[1], ho = gy.shape[2], wo = gy.shape[3]
    gk_arr = np.zeros((co, ci, kh, kw), dtype=np.float64)
    cdef double[:, :, :, ::1] gk = gk_arr
    cdef Py_ssize_t o, c, u, v, b, i, j
    cdef double acc
    with nogil:
        for o in range(co):
            for c in range(ci):
                for u in range(kh):
                    for v in range(kw):
                        acc = 0.0
                        for b in range(n):
                            for i in range(ho):
                                for j in range(wo):
                                    acc = acc + gy[b, o, i, j] * xp[b, c, i * stride + u, j * stride + v]
                        gk[o, c, u, v] = acc
    return gk_arr

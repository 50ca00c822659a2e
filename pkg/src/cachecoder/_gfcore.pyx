# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled GF(2^m) stream kernels (hot path of every delivery/decode).

Mirror of `_gfcore_py`; `gf` picks whichever imports.
"""

BACKEND = "compiled"


def xor_into(unsigned short[::1] dst, const unsigned short[::1] src):
    cdef Py_ssize_t i, n = src.shape[0]
    for i in range(n):
        dst[i] ^= src[i]


def axpy_into(unsigned short[::1] dst, int c, const unsigned short[::1] src,
              const unsigned short[::1] exp, const int[::1] log):
    cdef Py_ssize_t i, n = src.shape[0]
    cdef int lc
    cdef unsigned short s
    if c == 0:
        return
    lc = log[c]
    for i in range(n):
        s = src[i]
        if s:
            dst[i] ^= exp[lc + log[s]]


def scale_into(unsigned short[::1] dst, int c,
               const unsigned short[::1] exp, const int[::1] log):
    cdef Py_ssize_t i, n = dst.shape[0]
    cdef int lc
    cdef unsigned short s
    if c == 0:
        for i in range(n):
            dst[i] = 0
        return
    if c == 1:
        return
    lc = log[c]
    for i in range(n):
        s = dst[i]
        if s:
            dst[i] = exp[lc + log[s]]

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled string kernels (same API as ``_pykernels``)."""
from libc.stdlib cimport malloc, free

import numpy as np


cdef Py_UCS4* _to_ucs4(str s, Py_ssize_t* n) except NULL:
    cdef Py_ssize_t k = len(s)
    cdef Py_UCS4* buf = <Py_UCS4*> malloc((k + 1) * sizeof(Py_UCS4))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i = 0
    cdef Py_UCS4 ch
    for ch in s:
        buf[i] = ch
        i += 1
    n[0] = k
    return buf


cdef Py_ssize_t _lev(const Py_UCS4* a, Py_ssize_t n,
                     const Py_UCS4* b, Py_ssize_t m,
                     Py_ssize_t* row) noexcept nogil:
    # row must hold at least min(n, m) + 1 entries
    cdef Py_ssize_t i, j, diag, up, best, start = 0
    while start < n and start < m and a[start] == b[start]:
        start += 1
    a += start
    b += start
    n -= start
    m -= start
    while n > 0 and m > 0 and a[n - 1] == b[m - 1]:
        n -= 1
        m -= 1
    if n < m:
        a, b = b, a
        n, m = m, n
    if m == 0:
        return n
    for j in range(m + 1):
        row[j] = j
    for i in range(1, n + 1):
        diag = row[0]
        row[0] = i
        for j in range(1, m + 1):
            up = row[j]
            best = diag + (a[i - 1] != b[j - 1])
            if up + 1 < best:
                best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = up
    return row[m]


def lev(str a, str b):
    """Unit-cost Levenshtein distance (insert, delete, replace)."""
    cdef Py_ssize_t n, m, d
    cdef Py_UCS4* pa = _to_ucs4(a, &n)
    cdef Py_UCS4* pb
    cdef Py_ssize_t* row
    try:
        pb = _to_ucs4(b, &m)
        try:
            row = <Py_ssize_t*> malloc((min(n, m) + 1) * sizeof(Py_ssize_t))
            if row == NULL:
                raise MemoryError()
            d = _lev(pa, n, pb, m, row)
            free(row)
        finally:
            free(pb)
    finally:
        free(pa)
    return d


cdef inline double _norm(Py_ssize_t d, Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    if d == 0:
        return 0.0
    return 2.0 * d / (n + m + d)


def nlev(str a, str b):
    """Normalized edit distance 2L / (|a| + |b| + L), with ("", "") -> 0."""
    return _norm(lev(a, b), len(a), len(b))


def nlev_matrix(xs, ys):
    """Matrix of :func:`nlev` over all pairs of ``xs`` and ``ys``."""
    cdef Py_ssize_t nx = len(xs), ny = len(ys), i, j, longest = 0
    out = np.zeros((nx, ny), dtype=np.float64)
    if nx == 0 or ny == 0:
        return out
    cdef double[:, ::1] view = out
    cdef Py_UCS4** bx = <Py_UCS4**> malloc(nx * sizeof(Py_UCS4*))
    cdef Py_UCS4** by = <Py_UCS4**> malloc(ny * sizeof(Py_UCS4*))
    cdef Py_ssize_t* lx = <Py_ssize_t*> malloc(nx * sizeof(Py_ssize_t))
    cdef Py_ssize_t* ly = <Py_ssize_t*> malloc(ny * sizeof(Py_ssize_t))
    cdef Py_ssize_t* row = NULL
    if bx == NULL or by == NULL or lx == NULL or ly == NULL:
        free(bx); free(by); free(lx); free(ly)
        raise MemoryError()
    for i in range(nx):
        bx[i] = NULL
    for j in range(ny):
        by[j] = NULL
    try:
        for i in range(nx):
            bx[i] = _to_ucs4(xs[i], &lx[i])
            if lx[i] > longest:
                longest = lx[i]
        for j in range(ny):
            by[j] = _to_ucs4(ys[j], &ly[j])
            if ly[j] > longest:
                longest = ly[j]
        row = <Py_ssize_t*> malloc((longest + 1) * sizeof(Py_ssize_t))
        if row == NULL:
            raise MemoryError()
        with nogil:
            for i in range(nx):
                for j in range(ny):
                    view[i, j] = _norm(_lev(bx[i], lx[i], by[j], ly[j], row),
                                       lx[i], ly[j])
    finally:
        for i in range(nx):
            free(bx[i])
        for j in range(ny):
            free(by[j])
        free(bx); free(by); free(lx); free(ly); free(row)
    return out

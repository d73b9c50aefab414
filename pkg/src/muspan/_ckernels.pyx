# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in ``muspan._pykernels``."""

from array import array

from libc.stdlib cimport malloc, free


cdef object _ids(object seq):
    if isinstance(seq, array) and seq.typecode == "q":
        return seq
    return array("q", seq)


def kmp_find(pattern, text, Py_ssize_t boundary):
    cdef const long long[:] p = _ids(pattern)
    cdef const long long[:] t = _ids(text)
    cdef Py_ssize_t m = p.shape[0], n = t.shape[0], i, j = 0, k = 0
    cdef long long c
    if m == 0:
        raise ValueError("empty pattern")
    cdef Py_ssize_t *fail = <Py_ssize_t *> malloc(m * sizeof(Py_ssize_t))
    if fail == NULL:
        raise MemoryError()
    try:
        fail[0] = 0
        for i in range(1, m):
            c = p[i]
            while k and p[k] != c:
                k = fail[k - 1]
            if p[k] == c:
                k += 1
            fail[i] = k
        for i in range(n):
            if i == boundary:
                j = 0
            c = t[i]
            while j and p[j] != c:
                j = fail[j - 1]
            if p[j] == c:
                j += 1
                if j == m:
                    return i - m + 1
        return -1
    finally:
        free(fail)


def levenshtein(str a, str b):
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t la = len(a), lb = len(b), i, j
    cdef Py_ssize_t best, sub
    cdef Py_UCS4 ca
    if lb == 0:
        return la
    cdef Py_ssize_t *prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *cur = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *tmp
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            ca = a[i - 1]
            cur[0] = i
            for j in range(1, lb + 1):
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                sub = prev[j - 1] + (ca != b[j - 1])
                if sub < best:
                    best = sub
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb]
    finally:
        free(prev)
        free(cur)


def lcs_length(a, b):
    cdef const long long[:] x = _ids(a)
    cdef const long long[:] y = _ids(b)
    if x.shape[0] < y.shape[0]:
        x, y = y, x
    cdef Py_ssize_t la = x.shape[0], lb = y.shape[0], i, j
    if lb == 0:
        return 0
    cdef Py_ssize_t *prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *cur = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *tmp
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(lb + 1):
            prev[j] = 0
        for i in range(la):
            cur[0] = 0
            for j in range(1, lb + 1):
                if x[i] == y[j - 1]:
                    cur[j] = prev[j - 1] + 1
                elif prev[j] >= cur[j - 1]:
                    cur[j] = prev[j]
                else:
                    cur[j] = cur[j - 1]
            tmp = prev
            prev = cur
            cur = tmp
        return prev[lb]
    finally:
        free(prev)
        free(cur)


def best_pair(start, end, Py_ssize_t n, blocked, bint allow_equal):
    import numpy as np
    cdef const double[:] s = np.ascontiguousarray(start, dtype=np.float64)
    cdef const double[:] e = np.ascontiguousarray(end, dtype=np.float64)
    cdef const unsigned char[:] mask = np.ascontiguousarray(blocked, dtype=np.uint8)
    cdef Py_ssize_t k, l, bk = -1, bl = -1
    cdef Py_ssize_t offset = 0 if allow_equal else 1
    cdef double best = -1.0, p, sk
    for k in range(n):
        if mask[k]:
            continue
        sk = s[k]
        for l in range(k + offset, n):
            if mask[l]:
                break
            p = sk * e[l]
            if p > best:
                best = p
                bk = k
                bl = l
    if bk < 0:
        return -1, -1, -1.0
    return bk, bl, best

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edit-distance kernels. Mirrors ``speakerid._fuzzy_py`` exactly."""

from libc.stdlib cimport free, malloc


cpdef Py_ssize_t levenshtein(str a, str b) except -1:
    cdef Py_ssize_t n = len(a)
    cdef Py_ssize_t m = len(b)
    cdef Py_ssize_t i, j, cost, best, ins, dele
    cdef Py_ssize_t *prev
    cdef Py_ssize_t *cur
    cdef Py_ssize_t *tmp
    cdef Py_UCS4 ca

    if n == 0:
        return m
    if m == 0:
        return n
    if n < m:
        a, b = b, a
        n, m = m, n

    prev = <Py_ssize_t *> malloc((m + 1) * sizeof(Py_ssize_t))
    cur = <Py_ssize_t *> malloc((m + 1) * sizeof(Py_ssize_t))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(m + 1):
            prev[j] = j
        for i in range(1, n + 1):
            ca = a[i - 1]
            cur[0] = i
            for j in range(1, m + 1):
                cost = 0 if ca == <Py_UCS4> b[j - 1] else 1
                best = prev[j - 1] + cost
                dele = prev[j] + 1
                ins = cur[j - 1] + 1
                if dele < best:
                    best = dele
                if ins < best:
                    best = ins
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[m]
    finally:
        free(prev)
        free(cur)


cpdef double similarity(str a, str b):
    cdef Py_ssize_t l_sum = len(a) + len(b)
    if l_sum == 0:
        return 1.0
    return <double> (l_sum - levenshtein(a, b)) / <double> l_sum

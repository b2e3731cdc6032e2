# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; results are bit-identical."""

from libc.stdint cimport uint32_t, uint64_t
from libc.stdlib cimport free, malloc

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cdef uint32_t* _codepoints(str text, Py_ssize_t* length) except NULL:
    cdef Py_ssize_t n = len(text)
    cdef uint32_t* buf = <uint32_t*> malloc((n if n > 0 else 1) * sizeof(uint32_t))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i = 0
    cdef Py_UCS4 ch
    for ch in text:
        buf[i] = <uint32_t> ch
        i += 1
    length[0] = n
    return buf


cdef inline uint64_t _hash_gram(const uint32_t* cps, Py_ssize_t start, int k) nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef uint32_t cp
    cdef int j, b
    for j in range(k):
        cp = cps[start + j]
        for b in range(4):
            h ^= (cp >> (8 * b)) & 0xFF
            h *= FNV_PRIME
    return h


cdef uint64_t* _hashes(str text, int k, Py_ssize_t* count) except? NULL:
    cdef Py_ssize_t n
    cdef uint32_t* cps = _codepoints(text, &n)
    cdef Py_ssize_t m = n - k + 1
    cdef uint64_t* out
    cdef Py_ssize_t i
    if m <= 0:
        free(cps)
        count[0] = 0
        return NULL
    out = <uint64_t*> malloc(m * sizeof(uint64_t))
    if out == NULL:
        free(cps)
        raise MemoryError()
    with nogil:
        for i in range(m):
            out[i] = _hash_gram(cps, i, k)
    free(cps)
    count[0] = m
    return out


def kgram_hashes(str text, int k):
    if k < 1:
        raise ValueError("k must be >= 1")
    cdef Py_ssize_t m, i
    cdef uint64_t* hs = _hashes(text, k, &m)
    try:
        return [hs[i] for i in range(m)]
    finally:
        free(hs)


def winnow(str text, int k, int w):
    if k < 1:
        raise ValueError("k must be >= 1")
    if w < 1:
        raise ValueError("w must be >= 1")
    cdef Py_ssize_t m, i, head = 0, tail = 0
    cdef uint64_t* hs = _hashes(text, k, &m)
    cdef Py_ssize_t* dq
    cdef uint64_t best
    cdef set selected = set()
    if m == 0:
        return selected
    try:
        if m <= w:
            best = hs[0]
            for i in range(1, m):
                if hs[i] < best:
                    best = hs[i]
            selected.add(best)
            return selected
        dq = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
        if dq == NULL:
            raise MemoryError()
        try:
            for i in range(m):
                while tail > head and hs[dq[tail - 1]] > hs[i]:
                    tail -= 1
                dq[tail] = i
                tail += 1
                if dq[head] <= i - w:
                    head += 1
                if i >= w - 1:
                    selected.add(hs[dq[head]])
        finally:
            free(dq)
        return selected
    finally:
        free(hs)


def ngram_counts(str text, int n, int dim):
    if n < 1:
        raise ValueError("k must be >= 1")
    cdef Py_ssize_t m, i
    cdef uint64_t* hs = _hashes(text, n, &m)
    cdef list counts = [0] * dim
    cdef long* acc = <long*> malloc(dim * sizeof(long))
    if acc == NULL:
        free(hs)
        raise MemoryError()
    try:
        for i in range(dim):
            acc[i] = 0
        for i in range(m):
            acc[hs[i] % <uint64_t> dim] += 1
        for i in range(dim):
            counts[i] = acc[i]
        return counts
    finally:
        free(acc)
        free(hs)

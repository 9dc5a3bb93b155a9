# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_pykernels`` for the reference semantics.

Inputs are int64 arrays.  Callers guarantee that every row sum and every
product of row sums fits below 2**62 (``kernels`` checks this and falls
back to the pure-Python module otherwise).
"""

from libc.stdlib cimport malloc, calloc, free
from libc.stdint cimport int64_t

import numpy as np

cdef enum:
    EF = 0
    EF1 = 1
    EFX = 2
    EFX0 = 3


cdef inline void _decode(int64_t code, int n, int k, int* owner) noexcept nogil:
    cdef int g
    for g in range(k - 1, -1, -1):
        owner[g] = <int>(code % n)
        code //= n


cdef inline void _key(const int64_t* sums, int n, int* count, int64_t* prod) noexcept nogil:
    cdef int i
    count[0] = 0
    prod[0] = 1
    for i in range(n):
        if sums[i] > 0:
            count[0] += 1
            prod[0] *= sums[i]


cdef inline void _advance(const int64_t[:, ::1] vals, int n, int k, int* owner, int64_t* sums) noexcept nogil:
    cdef int g = k - 1
    cdef int i
    while g >= 0:
        i = owner[g]
        sums[i] -= vals[i, g]
        if i + 1 < n:
            owner[g] = i + 1
            sums[i + 1] += vals[i + 1, g]
            return
        owner[g] = 0
        sums[0] += vals[0, g]
        g -= 1


cdef void _init_walk(const int64_t[:, ::1] vals, int n, int k, int64_t lo, int* owner, int64_t* sums) noexcept nogil:
    cdef int g, i
    _decode(lo, n, k, owner)
    for i in range(n):
        sums[i] = 0
    for g in range(k):
        sums[owner[g]] += vals[owner[g], g]


def mnw_best(const int64_t[:, ::1] vals, int64_t lo, int64_t hi):
    cdef int n = vals.shape[0]
    cdef int k = vals.shape[1]
    cdef int* owner = <int*>malloc(max(k, 1) * sizeof(int))
    cdef int64_t* sums = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t code
    cdef int count, best_count = -1
    cdef int64_t prod, best_prod = 0
    if owner == NULL or sums == NULL:
        free(owner); free(sums)
        raise MemoryError()
    with nogil:
        _init_walk(vals, n, k, lo, owner, sums)
        for code in range(lo, hi):
            _key(sums, n, &count, &prod)
            if count > best_count or (count == best_count and prod > best_prod):
                best_count = count
                best_prod = prod
            _advance(vals, n, k, owner, sums)
    free(owner)
    free(sums)
    return best_count, best_prod


def mnw_collect(const int64_t[:, ::1] vals, int64_t lo, int64_t hi, int target_count, int64_t target_prod):
    cdef int n = vals.shape[0]
    cdef int k = vals.shape[1]
    cdef int* owner = <int*>malloc(max(k, 1) * sizeof(int))
    cdef int64_t* sums = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t code
    cdef int count
    cdef int64_t prod
    out = []
    if owner == NULL or sums == NULL:
        free(owner); free(sums)
        raise MemoryError()
    _init_walk(vals, n, k, lo, owner, sums)
    for code in range(lo, hi):
        _key(sums, n, &count, &prod)
        if count == target_count and prod == target_prod:
            out.append(code)
        _advance(vals, n, k, owner, sums)
    free(owner)
    free(sums)
    return out


cdef int _violation(const int64_t[:, ::1] vals, const int* owner, int m, int notion,
                    int64_t* work, int* wi, int* wj, int* wg) noexcept nogil:
    """Core of ``first_violation``; ``work`` holds ``5*n*n + n`` slots."""
    cdef int n = vals.shape[0]
    cdef int nn = n * n
    cdef int64_t* worth = work
    cdef int64_t* low = work + nn
    cdef int64_t* lowpos = work + 2 * nn
    cdef int64_t* high = work + 3 * nn
    cdef int64_t* size = work + 4 * nn
    cdef int i, j, g, idx
    cdef int64_t v, mine, excess
    for idx in range(nn):
        worth[idx] = 0
        low[idx] = -1
        lowpos[idx] = -1
        high[idx] = 0
    for i in range(n):
        size[i] = 0
    for g in range(m):
        j = owner[g]
        size[j] += 1
        for i in range(n):
            v = vals[i, g]
            idx = i * n + j
            worth[idx] += v
            if low[idx] < 0 or v < low[idx]:
                low[idx] = v
            if v > 0 and (lowpos[idx] < 0 or v < lowpos[idx]):
                lowpos[idx] = v
            if v > high[idx]:
                high[idx] = v
    for i in range(n):
        mine = worth[i * n + i]
        for j in range(n):
            if i == j or size[j] == 0:
                continue
            idx = i * n + j
            excess = worth[idx] - mine
            if excess <= 0:
                continue
            wi[0] = i
            wj[0] = j
            if notion == EF:
                wg[0] = -1
                return 1
            if notion == EF1:
                if high[idx] < excess:
                    for g in range(m):
                        if owner[g] == j and vals[i, g] == high[idx]:
                            wg[0] = g
                            return 1
                continue
            if notion == EFX0:
                if low[idx] < excess:
                    for g in range(m):
                        if owner[g] == j and vals[i, g] < excess:
                            wg[0] = g
                            return 1
                continue
            if lowpos[idx] >= 0 and lowpos[idx] < excess:
                for g in range(m):
                    if owner[g] == j and vals[i, g] > 0 and vals[i, g] < excess:
                        wg[0] = g
                        return 1
    return 0


def first_violation(const int64_t[:, ::1] vals, const int64_t[::1] owner_arr, int notion):
    cdef int n = vals.shape[0]
    cdef int m = owner_arr.shape[0]
    cdef int64_t* work = <int64_t*>malloc((5 * n * n + n) * sizeof(int64_t))
    cdef int* owner = <int*>malloc(max(m, 1) * sizeof(int))
    cdef int g, found, wi = 0, wj = 0, wg = 0
    if work == NULL or owner == NULL:
        free(work); free(owner)
        raise MemoryError()
    for g in range(m):
        owner[g] = <int>owner_arr[g]
    found = _violation(vals, owner, m, notion, work, &wi, &wj, &wg)
    free(work)
    free(owner)
    if found:
        return (wi, wj, wg)
    return None


def perturbation_counterexample(const int64_t[:, ::1] pert, const int64_t[:, ::1] orig):
    cdef int n = orig.shape[0]
    cdef int m = orig.shape[1]
    cdef int64_t total = 1
    cdef int64_t code, found_code = -1, efx_count = 0
    cdef int g, wi, wj, wg
    cdef int64_t* work = <int64_t*>malloc((5 * n * n + n) * sizeof(int64_t))
    cdef int* owner = <int*>malloc(max(m, 1) * sizeof(int))
    if work == NULL or owner == NULL:
        free(work); free(owner)
        raise MemoryError()
    for g in range(m):
        total *= n
    with nogil:
        for code in range(total):
            _decode(code, n, m, owner)
            if not _violation(pert, owner, m, EFX, work, &wi, &wj, &wg):
                efx_count += 1
                if _violation(orig, owner, m, EFX0, work, &wi, &wj, &wg):
                    found_code = code
                    break
    free(work)
    free(owner)
    return found_code, efx_count

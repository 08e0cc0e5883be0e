# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coloring kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()


cdef inline int _first_hom(int* colors, const int[::1] members, const int[::1] offsets, int nh) noexcept nogil:
    cdef int h, p, lo, hi, c
    for h in range(nh):
        lo = offsets[h]
        hi = offsets[h + 1]
        if lo == hi:
            return h
        c = colors[members[lo]]
        p = lo + 1
        while p < hi:
            if colors[members[p]] != c:
                break
            p += 1
        if p == hi:
            return h
    return -1


def first_homogeneous(colors, members, offsets):
    cdef int[::1] m = np.ascontiguousarray(members, dtype=np.int32)
    cdef int[::1] o = np.ascontiguousarray(offsets, dtype=np.int32)
    cdef int[::1] col = np.ascontiguousarray(colors, dtype=np.int32)
    cdef int nh = o.shape[0] - 1
    if col.shape[0] == 0:
        return _first_hom(NULL, m, o, nh) if nh == 0 or o[1] == 0 else -1
    return _first_hom(&col[0], m, o, nh)


def exhaustive(int n, int k, members, offsets, int lo, int hi, bint want_certs):
    cdef int[::1] m = np.ascontiguousarray(members, dtype=np.int32)
    cdef int[::1] o = np.ascontiguousarray(offsets, dtype=np.int32)
    cdef int nh = o.shape[0] - 1
    cdef long long total, count = 0
    cdef int h, p
    cdef int* colors
    cdef cnp.ndarray[cnp.int32_t, ndim=1] certs
    cdef int* cptr = NULL

    if n == 0:
        # without copies every hyperedge is empty, hence homogeneous
        if nh == 0:
            return [], None, 1
        return None, (np.zeros(1, dtype=np.int32) if want_certs else None), 1

    total = hi - lo
    for p in range(1, n):
        total *= k
    if want_certs:
        certs = np.empty(total, dtype=np.int32)
        cptr = <int*> certs.data
    colors = <int*> calloc(n, sizeof(int))
    colors[0] = lo
    try:
        with nogil:
            while True:
                h = _first_hom(colors, m, o, nh)
                if h < 0:
                    break
                if cptr != NULL:
                    cptr[count] = h
                count += 1
                p = n - 1
                while p >= 0:
                    colors[p] += 1
                    if p == 0:
                        break
                    if colors[p] < k:
                        break
                    colors[p] = 0
                    p -= 1
                if p == 0 and colors[0] >= hi:
                    break
        if h < 0:
            return [colors[p] for p in range(n)], None, count + 1
        return None, (certs if want_certs else None), count
    finally:
        free(colors)


def backtrack(int n, int k, members, offsets, order, long long node_limit):
    cdef int[::1] m = np.ascontiguousarray(members, dtype=np.int32)
    cdef int[::1] o = np.ascontiguousarray(offsets, dtype=np.int32)
    cdef int[::1] ordv = np.ascontiguousarray(order, dtype=np.int32)
    cdef int nh = o.shape[0] - 1
    cdef int h, p, i, j, c, cj, top, depth
    cdef long long nodes = 0
    cdef bint ok, placed, limited = node_limit > 0
    cdef int result = 0  # 1 found, 2 exhausted, 3 limit

    for h in range(nh):
        if o[h + 1] == o[h]:
            return None, True, 0

    # incidence lists (CSR)
    cdef int* inc_off = <int*> calloc(n + 1, sizeof(int))
    cdef int* inc = <int*> malloc(max(1, o[nh]) * sizeof(int))
    cdef int* fill = <int*> calloc(n, sizeof(int))
    cdef int* size = <int*> malloc(max(1, nh) * sizeof(int))
    cdef int* cnt = <int*> calloc(max(1, nh) * k, sizeof(int))
    cdef int* colors = <int*> malloc(n * sizeof(int))
    cdef int* next_c = <int*> calloc(n + 1, sizeof(int))
    cdef int* used_max = <int*> malloc((n + 1) * sizeof(int))
    try:
        for h in range(nh):
            size[h] = o[h + 1] - o[h]
            for p in range(o[h], o[h + 1]):
                inc_off[m[p] + 1] += 1
        for i in range(n):
            inc_off[i + 1] += inc_off[i]
        for h in range(nh):
            for p in range(o[h], o[h + 1]):
                i = m[p]
                inc[inc_off[i] + fill[i]] = h
                fill[i] += 1
        for i in range(n):
            colors[i] = -1
        for i in range(n + 1):
            used_max[i] = -1

        depth = 0
        with nogil:
            while True:
                if depth == n:
                    result = 1
                    break
                i = ordv[depth]
                c = next_c[depth]
                top = used_max[depth] + 1
                if top > k - 1:
                    top = k - 1
                placed = False
                while c <= top:
                    ok = True
                    for p in range(inc_off[i], inc_off[i + 1]):
                        h = inc[p]
                        if cnt[h * k + c] == size[h] - 1:
                            ok = False
                            break
                    if ok:
                        nodes += 1
                        if limited and nodes > node_limit:
                            result = 3
                            break
                        colors[i] = c
                        for p in range(inc_off[i], inc_off[i + 1]):
                            cnt[inc[p] * k + c] += 1
                        next_c[depth] = c + 1
                        used_max[depth + 1] = used_max[depth] if used_max[depth] > c else c
                        next_c[depth + 1] = 0
                        depth += 1
                        placed = True
                        break
                    c += 1
                if result == 3:
                    break
                if placed:
                    continue
                if depth == 0:
                    result = 2
                    break
                depth -= 1
                j = ordv[depth]
                cj = colors[j]
                for p in range(inc_off[j], inc_off[j + 1]):
                    cnt[inc[p] * k + cj] -= 1
                colors[j] = -1
        if result == 1:
            return [colors[i] for i in range(n)], True, nodes
        if result == 2:
            return None, True, nodes
        return None, False, nodes
    finally:
        free(inc_off); free(inc); free(fill); free(size); free(cnt)
        free(colors); free(next_c); free(used_max)

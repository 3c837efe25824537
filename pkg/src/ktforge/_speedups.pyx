# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled twins of the pure-Python kernels in ``_kernels_py``.

Same three entry points, same semantics; coefficients stay arbitrary
precision Python ints, the speedup comes from the loop structure.
"""


def mono_mul(tuple fa, tuple fb, odd):
    cdef Py_ssize_t i = 0, j = 0, na = len(fa), nb = len(fb)
    cdef int sign = 1, odd_rem = 0
    cdef long ga, gb, ea, eb
    if na == 0:
        return fb, 1
    if nb == 0:
        return fa, 1
    cdef const unsigned char[:] mask = odd
    for i in range(na):
        if mask[<Py_ssize_t> (<tuple> fa[i])[0]]:
            odd_rem += 1
    out = []
    i = 0
    while i < na and j < nb:
        ga = (<tuple> fa[i])[0]
        gb = (<tuple> fb[j])[0]
        if ga < gb:
            out.append(fa[i])
            if mask[<Py_ssize_t> ga]:
                odd_rem -= 1
            i += 1
        elif ga > gb:
            if mask[<Py_ssize_t> gb] and (odd_rem & 1):
                sign = -sign
            out.append(fb[j])
            j += 1
        else:
            if mask[<Py_ssize_t> ga]:
                return (), 0
            ea = (<tuple> fa[i])[1]
            eb = (<tuple> fb[j])[1]
            out.append((ga, ea + eb))
            i += 1
            j += 1
    while i < na:
        out.append(fa[i])
        i += 1
    while j < nb:
        out.append(fb[j])
        j += 1
    return tuple(out), sign


def mono_sort(gids, odd):
    cdef list lst = list(gids)
    cdef Py_ssize_t n = len(lst), i, j, k, e
    cdef int sign = 1
    cdef long g, h
    cdef bint g_odd
    cdef const unsigned char[:] mask = odd
    for i in range(1, n):
        g = lst[i]
        g_odd = mask[<Py_ssize_t> g]
        j = i - 1
        while j >= 0:
            h = lst[j]
            if h <= g:
                break
            if g_odd and mask[<Py_ssize_t> h]:
                sign = -sign
            lst[j + 1] = h
            j -= 1
        lst[j + 1] = g
    out = []
    k = 0
    while k < n:
        g = lst[k]
        e = 1
        while k + e < n and <long> lst[k + e] == g:
            e += 1
        if e > 1 and mask[<Py_ssize_t> g]:
            return (), 0
        out.append((g, e))
        k += e
    return tuple(out), sign


def bareiss(list rows, Py_ssize_t ncols):
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t piv = 0, c, i, cc, r
    cdef list pivots = [], ri, rp
    prev = 1
    for c in range(ncols):
        r = -1
        for i in range(piv, nrows):
            if (<list> rows[i])[c] != 0:
                r = i
                break
        if r < 0:
            continue
        if r != piv:
            rows[r], rows[piv] = rows[piv], rows[r]
        rp = <list> rows[piv]
        pv = rp[c]
        for i in range(piv + 1, nrows):
            ri = <list> rows[i]
            t = ri[c]
            if t != 0:
                for cc in range(c, ncols):
                    ri[cc] = (pv * ri[cc] - t * rp[cc]) // prev
            elif prev != 1 or pv != 1:
                for cc in range(c, ncols):
                    ri[cc] = (pv * ri[cc]) // prev
        prev = pv
        pivots.append(c)
        piv += 1
        if piv == nrows:
            break
    return piv, pivots

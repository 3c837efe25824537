"""Pure-Python kernels for the hot inner loops.

``ktforge._speedups`` (Cython) implements the same three functions with
identical semantics; ``ktforge.kernels`` picks one at import time.  Keep the
two in lockstep: ``tests/test_kernels.py`` cross-checks them.

Conventions: a monomial is a tuple of ``(gid, exp)`` pairs with strictly
ascending gids; ``odd`` is indexable by gid and holds 1 for odd-degree
generators.  Odd generators always carry exponent 1.
"""


def mono_mul(fa, fb, odd):
    """Merge two sorted factor tuples; return ``(factors, sign)``.

    The sign is the Koszul sign of sorting the concatenation ``fa + fb``,
    i.e. (-1)^(number of odd-odd crossings); it is 0 when an odd generator
    would acquire exponent 2.
    """
    if not fa:
        return fb, 1
    if not fb:
        return fa, 1
    out = []
    sign = 1
    odd_rem = 0
    for g, _e in fa:
        if odd[g]:
            odd_rem += 1
    i = j = 0
    na = len(fa)
    nb = len(fb)
    while i < na and j < nb:
        ga, ea = fa[i]
        gb, eb = fb[j]
        if ga < gb:
            out.append(fa[i])
            if odd[ga]:
                odd_rem -= 1
            i += 1
        elif ga > gb:
            # gb crosses every remaining odd factor of fa
            if odd[gb] and (odd_rem & 1):
                sign = -sign
            out.append(fb[j])
            j += 1
        else:
            if odd[ga]:
                return (), 0
            out.append((ga, ea + eb))
            i += 1
            j += 1
    if i < na:
        out.extend(fa[i:])
    elif j < nb:
        out.extend(fb[j:])
    return tuple(out), sign


def mono_sort(gids, odd):
    """Sort a raw generator-id word; return ``(factors, sign)``.

    Insertion sort counting odd-odd transpositions, then exponent folding;
    sign 0 when an odd generator repeats.
    """
    lst = list(gids)
    sign = 1
    for i in range(1, len(lst)):
        g = lst[i]
        g_odd = odd[g]
        j = i - 1
        while j >= 0 and lst[j] > g:
            if g_odd and odd[lst[j]]:
                sign = -sign
            lst[j + 1] = lst[j]
            j -= 1
        lst[j + 1] = g
    factors = []
    k = 0
    n = len(lst)
    while k < n:
        g = lst[k]
        e = 1
        while k + e < n and lst[k + e] == g:
            e += 1
        if e > 1 and odd[g]:
            return (), 0
        factors.append((g, e))
        k += e
    return tuple(factors), sign


def bareiss(rows, ncols):
    """Fraction-free in-place row echelon over Python integers.

    Pivoting is deterministic: first nonzero entry in column order, first
    candidate row.  Returns ``(rank, pivot_columns)``; ``rows`` is left in
    echelon form with exact integer entries.
    """
    nrows = len(rows)
    piv = 0
    prev = 1
    pivots = []
    for c in range(ncols):
        r = -1
        for i in range(piv, nrows):
            if rows[i][c]:
                r = i
                break
        if r < 0:
            continue
        if r != piv:
            rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[piv][c]
        for i in range(piv + 1, nrows):
            ri = rows[i]
            t = ri[c]
            if t:
                for cc in range(c, ncols):
                    ri[cc] = (pv * ri[cc] - t * rows[piv][cc]) // prev
            elif prev != 1 or pv != 1:
                for cc in range(c, ncols):
                    ri[cc] = (pv * ri[cc]) // prev
        prev = pv
        pivots.append(c)
        piv += 1
        if piv == nrows:
            break
    return piv, pivots

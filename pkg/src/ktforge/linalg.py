"""Exact rational linear algebra on dense row matrices.

Rows are lists of Fractions (or ints).  Elimination is fraction-free
(Bareiss) over integers after row scaling, which controls coefficient
blowup; pivoting is deterministic (first nonzero in column order), so every
derived object -- ranks, nullspace bases, particular solutions -- is
reproducible bit for bit.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

from ktforge.kernels import bareiss


def _int_rows(rows):
    """Scale each row to primitive integer entries (kernel/solutions kept)."""
    out = []
    for row in rows:
        denom = 1
        for x in row:
            if isinstance(x, Fraction):
                denom = lcm(denom, x.denominator)
        ints = [int(x * denom) if isinstance(x, Fraction) else x * denom for x in row]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        out.append(ints)
    return out


def echelon(rows, ncols):
    """Integer echelon form; returns (rank, pivot_cols, echelon_rows)."""
    work = _int_rows(rows)
    rank, pivots = bareiss(work, ncols)
    return rank, pivots, work


def rank(rows, ncols) -> int:
    if not rows:
        return 0
    return echelon(rows, ncols)[0]


def _back_substitute(ech, pivots, ncols, free_assign):
    """Solve the echelon system with the given values on free columns."""
    x = [Fraction(0)] * ncols
    pivot_set = set(pivots)
    for c in range(ncols):
        if c not in pivot_set:
            x[c] = Fraction(free_assign.get(c, 0))
    for r in range(len(pivots) - 1, -1, -1):
        pc = pivots[r]
        s = Fraction(0)
        row = ech[r]
        for c in range(pc + 1, ncols):
            if row[c]:
                s += row[c] * x[c]
        x[pc] = -s / row[pc]
    return x


def nullspace(rows, ncols):
    """Deterministic basis of {x : M x = 0}, one vector per free column."""
    if ncols == 0:
        return []
    if not rows:
        basis = []
        for c in range(ncols):
            v = [Fraction(0)] * ncols
            v[c] = Fraction(1)
            basis.append(v)
        return basis
    rk, pivots, ech = echelon(rows, ncols)
    ech = ech[:rk]
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        basis.append(_back_substitute(ech, pivots, ncols, {f: 1}))
    return basis


def solve(rows, ncols, rhs):
    """One exact solution of M x = rhs (free variables = 0), or None.

    'First solution under canonical basis order' means exactly this
    particular solution: deterministic pivots, free coordinates zero.
    """
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    if not aug:
        return [Fraction(0)] * ncols if ncols else []
    rk, pivots, ech = echelon(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = _back_substitute(ech[:rk], pivots, ncols + 1, {ncols: -1})
    return x[:ncols]


def rref(rows, ncols):
    """Reduced row echelon form over Fractions (pivots normalized to 1).

    Used for quotient normal forms where repeated reduction against the same
    span must be cheap and canonical.  Returns (rref_rows, pivot_cols).
    """
    mat = [[Fraction(x) for x in row] for row in rows]
    nrows = len(mat)
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if mat[i][c]:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return mat[: len(pivots)], pivots


def mat_vec(rows, vec):
    return [sum((row[j] * vec[j] for j in range(len(vec))), Fraction(0)) for row in rows]


def is_zero_matrix(rows) -> bool:
    return all(not x for row in rows for x in row)

"""Shared test utilities: deterministic random algebras, morphisms, oracles."""

from fractions import Fraction

from ktforge import gca
from ktforge.dga import DGAlgebra, DGMorphism, extend_differential
from ktforge.gca import GenRegistry, Poly
from ktforge.homology import Window, WindowedComplex


def brute_sort_sign(gids, odd):
    """Adjacent-transposition bubble sort counting odd-odd swaps (oracle)."""
    lst = list(gids)
    sign = 1
    n = len(lst)
    for i in range(n):
        for j in range(n - 1 - i):
            if lst[j] > lst[j + 1]:
                if odd[lst[j]] and odd[lst[j + 1]]:
                    sign = -sign
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
    for a, b in zip(lst, lst[1:]):
        if a == b and odd[a]:
            return tuple(lst), 0
    return tuple(lst), sign


def random_poly(rng, alg, n, max_terms=3, cx=None, window=None):
    """Random homogeneous degree-n element inside a window."""
    if cx is None:
        cx = WindowedComplex(alg, window or Window(4, 3))
    basis = cx.basis(n)
    if not basis:
        return Poly.zero(alg.reg)
    acc = Poly.zero(alg.reg)
    for _ in range(rng.randint(1, max_terms)):
        mono = basis[rng.randrange(len(basis))]
        coeff = Fraction(rng.randint(-3, 3))
        acc = acc + Poly.monomial(alg.reg, mono, coeff)
    return acc


def random_dga(rng, n_even0=2, n_extra=2, max_deg=2):
    """Small random DGAlgebra built by staged adjunction (d^2 = 0 for free).

    Images are linear in zero-differential generators (or scalars for
    degree-1 cells), so the differential never raises the polynomial degree
    and every window closes.  Duplicated images create nontrivial homology.
    """
    reg = GenRegistry()
    gens = [reg.add(f"b{i}", 0, gca.BASE_COORD) for i in range(n_even0)]
    alg = DGAlgebra(reg, gens, {g: Poly.zero(reg) for g in gens})
    for k in range(n_extra):
        deg = rng.randint(1, max_deg)
        killed = [
            g for g in alg.gens
            if reg.hdeg(g) == deg - 1 and alg.d_gen(g).is_zero()
        ]
        choice = rng.random()
        if choice < 0.35 or not killed:
            if deg == 1 and choice < 0.15:
                img = Poly.scalar(reg, rng.randint(1, 2))  # acyclic cell
            else:
                img = Poly.zero(reg)  # sphere cell
        else:
            img = Poly.zero(reg)
            for g in rng.sample(killed, rng.randint(1, min(2, len(killed)))):
                img = img + Poly.gen(reg, g, Fraction(rng.randint(-2, 2)))
        alg = extend_differential(
            alg, [(f"g{k}d{deg}", deg)], [img], base=None, stage=0
        )
    # forget intermediate bases: treat the whole thing as one algebra
    return DGAlgebra(reg, alg.gens, alg.diff)


def random_morphism(rng, A, B, window=None):
    """Random chain morphism A -> B (images solved degree by degree).

    Degree-0 generators map to random cycles of B_0 (anything);
    positive-degree generators get an image whose boundary matches, found by
    solving the windowed linear system; falls back to zero.
    """
    window = window or Window(3, 3)
    cxB = WindowedComplex(B, window)
    rule = {}
    partial = {}

    def apply_partial(p):
        out = Poly.zero(B.reg)
        for mono, c in p.terms.items():
            term = Poly.scalar(B.reg, c)
            for g, e in mono:
                img = partial[g]
                for _ in range(e):
                    term = term * img
            out = out + term
        return out

    for g in sorted(A.gens, key=A.reg.well_order_key):
        n = A.reg.hdeg(g)
        target = apply_partial(A.d_gen(g))
        if target.is_zero() and rng.random() < 0.4:
            img = Poly.zero(B.reg)
        else:
            vec = cxB.coords(target, n - 1) if n > 0 else None
            if n == 0:
                img = random_poly(rng, B, 0, cx=cxB) if rng.random() < 0.8 else Poly.zero(B.reg)
                # degree-0 images are unconstrained: d = 0 in degree -1
            else:
                sol = None
                mat = cxB.matrix(n)
                ncols = len(cxB.basis(n))
                if ncols:
                    from ktforge import linalg

                    sol = linalg.solve(mat, ncols, vec)
                if sol is None:
                    raise ValueError("no chain image available")
                img = cxB.from_coords(sol, n)
                # optionally shift by a cycle for variety
                if rng.random() < 0.5:
                    cyc = cxB.cycle_basis(n)
                    if cyc:
                        img = img + cxB.from_coords(cyc[rng.randrange(len(cyc))], n)
        rule[g] = img
        partial[g] = img
    m = DGMorphism(A, B, rule)
    m.verify_chain()
    return m


def rank_oracle_transpose(rows, ncols):
    """Independent rank computation: plain Fraction Gauss on the transpose."""
    mat = [[Fraction(rows[r][c]) for r in range(len(rows))] for c in range(ncols)]
    nr = len(mat)
    nc = len(mat[0]) if mat else 0
    rank = 0
    for c in range(nc):
        piv = None
        for r in range(rank, nr):
            if mat[r][c]:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][c]
        for r in range(nr):
            if r != rank and mat[r][c]:
                f = mat[r][c] / pv
                for cc in range(c, nc):
                    mat[r][cc] -= f * mat[rank][cc]
        rank += 1
    return rank

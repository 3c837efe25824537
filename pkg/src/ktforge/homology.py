"""Exact homology oracle in finite truncation windows.

A :class:`Window` bounds the homological degree, the total polynomial degree
(every generator counts uniformly) and, for jet algebras, the jet order of
the monomials.  Closure of the window under the differential is checked,
never assumed: silent truncation would fabricate homology.

Boundary matrices are exact rational; elimination is fraction-free with
deterministic pivoting, so ranks and representatives reproduce across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ktforge import linalg
from ktforge.errors import (
    InvariantViolationError,
    NotACycleError,
    WindowClosureError,
)
from ktforge.gca import Poly, mono_key, monomial_degree, monomial_hdeg
from ktforge.dga import DGAlgebra, DGMorphism


@dataclass(frozen=True)
class Window:
    hdeg_max: int
    poly_deg_cap: int
    jet_cap: int | None = None

    def __post_init__(self):
        if self.hdeg_max < 0 or self.poly_deg_cap < 0:
            raise InvariantViolationError("window caps must be non-negative")


@dataclass
class HomologyReport:
    window: Window
    ranks: list[int]
    representatives: list[list[Poly]]


def _jet_order_fn(alg: DGAlgebra):
    ctx = alg.jet
    if ctx is None:
        return lambda gid: 0
    return ctx.gen_jet_order


class WindowedComplex:
    """Chain-level view of a DGAlgebra inside a window.

    Bases are enumerated deterministically (graded-lex canonical order) for
    homological degrees up to hdeg_max + 1; the extra degree feeds the
    boundary rank needed by H_{hdeg_max}.  Construction rejects windows that
    the differential leaves, naming a witness monomial.
    """

    def __init__(self, alg: DGAlgebra, window: Window):
        self.alg = alg
        self.w = window
        self._jet_of = _jet_order_fn(alg)
        self._basis: dict[int, list] = {}
        self._index: dict[int, dict] = {}
        self._mat: dict[int, list] = {}
        self._check_closure()

    # -- basis ---------------------------------------------------------------

    def mono_in_window(self, mono) -> bool:
        if monomial_degree(mono) > self.w.poly_deg_cap:
            return False
        if self.w.jet_cap is not None:
            jo = self._jet_of
            if any(jo(g) > self.w.jet_cap for g, _e in mono):
                return False
        return True

    def basis(self, n: int):
        """Window monomials of homological degree n, canonical order."""
        if n < 0:
            return []
        got = self._basis.get(n)
        if got is None:
            got = self._enumerate(n)
            self._basis[n] = got
            self._index[n] = {m: i for i, m in enumerate(got)}
        return got

    def index(self, n: int):
        self.basis(n)
        return self._index[n]

    def _enumerate(self, n: int):
        reg = self.alg.reg
        jet_cap = self.w.jet_cap
        jo = self._jet_of
        gens = [
            g
            for g in sorted(self.alg.gens)
            if jet_cap is None or jo(g) <= jet_cap
        ]
        out = []

        def rec(i, hleft, dleft, acc):
            if i == len(gens):
                if hleft == 0:
                    out.append(tuple(acc))
                return
            rec(i + 1, hleft, dleft, acc)  # exponent 0
            g = gens[i]
            h = reg.hdeg(g)
            emax = dleft if h == 0 else min(dleft, hleft // h)
            if reg.is_odd(g):
                emax = min(emax, 1)
            for e in range(1, emax + 1):
                acc.append((g, e))
                rec(i + 1, hleft - e * h, dleft - e, acc)
                acc.pop()

        rec(0, n, self.w.poly_deg_cap, [])
        out.sort(key=mono_key)
        return out

    # -- closure and matrices ------------------------------------------------

    def _check_closure(self):
        for n in range(0, self.w.hdeg_max + 2):
            idx_lower = self.index(n - 1) if n > 0 else {}
            for mono in self.basis(n):
                img = self.alg.d(Poly.monomial(self.alg.reg, mono))
                for m in img.terms:
                    if n == 0 or m not in idx_lower:
                        raise WindowClosureError(
                            "window is not closed under the differential",
                            witness=mono,
                        )

    def matrix(self, n: int):
        """Boundary matrix d_n : C_n -> C_{n-1}; rows over basis(n-1)."""
        got = self._mat.get(n)
        if got is not None:
            return got
        cols = self.basis(n)
        rows_basis = self.basis(n - 1)
        idx = self.index(n - 1) if n > 0 else {}
        mat = [[Fraction(0)] * len(cols) for _ in rows_basis]
        for j, mono in enumerate(cols):
            img = self.alg.d(Poly.monomial(self.alg.reg, mono))
            for m, c in img.terms.items():
                mat[idx[m]][j] = c
        self._mat[n] = mat
        return mat

    def coords(self, p: Poly, n: int):
        idx = self.index(n)
        vec = [Fraction(0)] * len(self.basis(n))
        for m, c in p.terms.items():
            pos = idx.get(m)
            if pos is None:
                raise InvariantViolationError(
                    "element does not lie in the window"
                )
            vec[pos] = c
        return vec

    def from_coords(self, vec, n: int):
        terms = {}
        for m, c in zip(self.basis(n), vec):
            if c:
                terms[m] = Fraction(c)
        return Poly(self.alg.reg, terms)

    # -- homology -------------------------------------------------------------

    def rank_d(self, n: int) -> int:
        if n <= 0:
            return 0
        mat = self.matrix(n)
        if not mat or not mat[0]:
            return 0
        return linalg.rank(mat, len(mat[0]))

    def homology_rank(self, n: int) -> int:
        dim = len(self.basis(n))
        return dim - self.rank_d(n) - self.rank_d(n + 1)

    def cycle_basis(self, n: int):
        """Coordinate vectors spanning ker d_n, deterministic order."""
        cols = len(self.basis(n))
        if n == 0:
            return [
                [Fraction(1 if i == j else 0) for j in range(cols)]
                for i in range(cols)
            ]
        return linalg.nullspace(self.matrix(n), cols)

    def boundary_vectors(self, n: int):
        """Images of the degree n+1 basis inside C_n (as vectors)."""
        mat = self.matrix(n + 1)
        if not mat:
            return []
        ncols = len(mat[0])
        return [[mat[r][j] for r in range(len(mat))] for j in range(ncols)]

    def representatives(self, n: int):
        """Cycles spanning a complement of the boundaries, greedily chosen
        along the canonical cycle order."""
        cycles = self.cycle_basis(n)
        if not cycles:
            return []
        ncols = len(self.basis(n))
        span = [v for v in self.boundary_vectors(n) if any(v)]
        reps = []
        current = linalg.rank(span, ncols) if span else 0
        for v in cycles:
            cand = span + [v]
            r = linalg.rank(cand, ncols)
            if r > current:
                span = cand
                current = r
                reps.append(self.from_coords(v, n))
        return reps

    def is_boundary(self, z: Poly):
        """A preimage y with d(y) = z inside the window, else None.

        Absence is a statement about this window only, never a global claim.
        """
        if z.is_zero():
            return Poly.zero(self.alg.reg)
        n = z.hdeg()
        if n is None:
            raise InvariantViolationError("inhomogeneous cycle")
        r = self.alg.d(z)
        if not r.is_zero():
            raise NotACycleError("is_boundary requires a cycle", residual=r)
        vec = self.coords(z, n)
        mat = self.matrix(n + 1)
        ncols = len(self.basis(n + 1))
        if ncols == 0:
            return None
        sol = linalg.solve(mat, ncols, vec)
        if sol is None:
            return None
        return self.from_coords(sol, n + 1)

    def class_coords(self, p: Poly, n: int, reps=None):
        """Coordinates of the class [p] over the representative basis.

        Solves p = sum c_i rep_i + boundary; None when p is not in the span
        (only possible for non-cycles)."""
        if reps is None:
            reps = self.representatives(n)
        dim = len(self.basis(n))
        cols = [self.coords(r, n) for r in reps]
        cols += [v for v in self.boundary_vectors(n) if any(v)]
        if not cols:
            return [] if not any(self.coords(p, n)) else None
        mat = [[cols[j][i] for j in range(len(cols))] for i in range(dim)]
        sol = linalg.solve(mat, len(cols), self.coords(p, n))
        if sol is None:
            return None
        return sol[: len(reps)]


# -- spec-level operation surface ---------------------------------------------


def monomial_basis(A: DGAlgebra, n: int, w: Window):
    return WindowedComplex(A, w).basis(n)


def boundary_matrix(A: DGAlgebra, n: int, w: Window):
    return WindowedComplex(A, w).matrix(n)


def homology_rank(A: DGAlgebra, n: int, w: Window) -> int:
    if n > w.hdeg_max:
        raise InvariantViolationError("degree outside the window")
    return WindowedComplex(A, w).homology_rank(n)


def homology_representatives(A: DGAlgebra, n: int, w: Window):
    if n > w.hdeg_max:
        raise InvariantViolationError("degree outside the window")
    return WindowedComplex(A, w).representatives(n)


def homology_report(A: DGAlgebra, w: Window) -> HomologyReport:
    cx = WindowedComplex(A, w)
    ranks = []
    reps = []
    for n in range(w.hdeg_max + 1):
        r = cx.representatives(n)
        reps.append(r)
        ranks.append(cx.homology_rank(n))
    return HomologyReport(w, ranks, reps)


def is_boundary(A: DGAlgebra, z: Poly, w: Window):
    return WindowedComplex(A, w).is_boundary(z)


class FreeTargetAdapter:
    """Windowed view of a DGAlgebra target B for the factorization machinery."""

    def __init__(self, B: DGAlgebra, w: Window):
        self.B = B
        self.reg = B.reg
        self.cx = WindowedComplex(B, w)
        self._reps: dict[int, list] = {}

    def d(self, p):
        return self.B.d(p)

    def eq(self, p, q):
        return p == q

    def is_zero(self, p):
        return p.is_zero()

    def hom_basis(self, n: int):
        if n not in self._reps:
            self._reps[n] = self.cx.representatives(n)
        return self._reps[n]

    def hom_rank(self, n: int) -> int:
        return len(self.hom_basis(n))

    def class_coords(self, p, n: int):
        return self.cx.class_coords(p, n, self.hom_basis(n))

    def boundary_preimage(self, z):
        return self.cx.is_boundary(z)


def target_adapter(B, w: Window):
    """Adapter for a DGAlgebra or any object already exposing the interface."""
    if isinstance(B, DGAlgebra):
        return FreeTargetAdapter(B, w)
    if hasattr(B, "hom_basis") and hasattr(B, "boundary_preimage"):
        return B
    raise InvariantViolationError(f"no windowed adapter for {type(B).__name__}")


def relative_critical_cycles(A: DGAlgebra, q: DGMorphism, n: int, w: Window):
    """Basis of the degree-n kernel of H(q), paired with boundary preimages.

    Returns (sigma, b) pairs: sigma spans the classes of A (inside the
    window) that q sends to boundaries of B, and b is the deterministic
    first preimage with d_B(b) = q(sigma).  This realizes the one-generator-
    per-class selection of the non-functorial variant.
    """
    cx = WindowedComplex(A, w)
    reps = cx.representatives(n)
    if not reps:
        return []
    tgt = target_adapter(q.target, w)
    coords = []
    for r in reps:
        c = tgt.class_coords(q(r), n)
        if c is None:
            raise InvariantViolationError("chain image is not a cycle class")
        coords.append(c)
    hdim = tgt.hom_rank(n)
    mat = [[coords[j][i] for j in range(len(reps))] for i in range(hdim)]
    kernel = linalg.nullspace(mat, len(reps))
    out = []
    for vec in kernel:
        sigma = Poly.zero(A.reg)
        for c, r in zip(vec, reps):
            if c:
                sigma = sigma + r * c
        b = tgt.boundary_preimage(q(sigma))
        if b is None:
            raise InvariantViolationError(
                "kernel class image unexpectedly not a boundary in window"
            )
        out.append((sigma, b))
    out.sort(key=lambda sb: sb[0].order_key())
    return out


def export_sparse_matrix(rows) -> str:
    """Documented triplet text format (docs/formats.md): one line per nonzero
    entry, row-major, '<row> <col> <numerator> <denominator>'."""
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    lines = ["ktforge-sparse/1", f"rows {nrows} cols {ncols}"]
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if x:
                f = Fraction(x)
                lines.append(f"{i} {j} {f.numerator} {f.denominator}")
    return "\n".join(lines) + "\n"

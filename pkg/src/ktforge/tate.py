"""Concrete resolutions for polynomial PDE systems.

Pieces: the classical Koszul resolution of a coordinate zero locus, a
windowed search for Noether identities (syzygies with total-derivative
coefficients), the Koszul-Tate complex whose nilpotency IS the Noether
identity, and the on-shell resolution pipeline that runs the staged
cofibrant replacement of the windowed quotient over the jet algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ktforge import gca, linalg
from ktforge.dga import DGAlgebra, DGMorphism, extend_differential
from ktforge.errors import (
    CapOverflowError,
    InvariantViolationError,
)
from ktforge.factorize import ResolutionTrace, resolve_weq
from ktforge.gca import GenRegistry, Poly
from ktforge.homology import Window, WindowedComplex
from ktforge.jet import JetContext, multi_index_order, multi_indices


# -- windowed quotient presentations -------------------------------------------


class QuotientWindow:
    """Windowed quotient of a degree-0 algebra by a derivative-closed ideal.

    The ideal slice is spanned by the products m * f (m a window monomial,
    f an ideal generator) that stay entirely inside the window.  Normal
    forms come from one reduced echelon pass; the quotient basis is the set
    of non-pivot window monomials.  Everything is concentrated in degree 0
    with zero differential.
    """

    def __init__(self, alg: DGAlgebra, ideal_gens, window: Window):
        if any(alg.reg.hdeg(g) != 0 for g in alg.gens):
            raise InvariantViolationError("quotient base must live in degree 0")
        self.alg = alg
        self.reg = alg.reg
        self.w = window
        self.cx = WindowedComplex(alg, window)
        basis0 = self.cx.basis(0)
        self._idx = {m: i for i, m in enumerate(basis0)}
        self._basis0 = basis0
        rows = []
        seen = set()
        for f in ideal_gens:
            if f.is_zero():
                continue
            for m in basis0:
                prod = Poly.monomial(self.reg, m) * f
                if prod.is_zero():
                    continue
                if any(mm not in self._idx for mm in prod.terms):
                    continue
                key = prod.canonical_key()
                if key in seen:
                    continue
                seen.add(key)
                rows.append(self.cx.coords(prod, 0))
        self._rref, self._pivots = linalg.rref(rows, len(basis0))
        pivot_set = set(self._pivots)
        self.basis_monos = [m for i, m in enumerate(basis0) if i not in pivot_set]
        self._quotient_pos = {
            i: j
            for j, i in enumerate(
                i for i in range(len(basis0)) if i not in pivot_set
            )
        }

    @property
    def dim(self) -> int:
        return len(self.basis_monos)

    def nf_coords(self, p: Poly):
        """Coordinates of p mod the windowed ideal over the quotient basis."""
        if p.is_zero():
            return [Fraction(0)] * self.dim
        if not p.is_homogeneous(0):
            raise InvariantViolationError("quotient elements live in degree 0")
        vec = self.cx.coords(p, 0)
        for row, c in zip(self._rref, self._pivots):
            f = vec[c]
            if f:
                vec = [a - f * b for a, b in zip(vec, row)]
        return [vec[i] for i in range(len(vec)) if i in self._quotient_pos]

    def lift(self, j: int) -> Poly:
        return Poly.monomial(self.reg, self.basis_monos[j])

    # -- duck interface shared with DGAlgebra targets --------------------------

    def d(self, p: Poly) -> Poly:
        return Poly.zero(self.reg)

    def eq(self, p: Poly, q: Poly) -> bool:
        diff = p - q
        if diff.is_zero():
            return True
        return all(not c for c in self.nf_coords(diff))

    def is_zero(self, p: Poly) -> bool:
        return self.eq(p, Poly.zero(self.reg))

    def hom_basis(self, n: int):
        if n != 0:
            return []
        return [self.lift(j) for j in range(self.dim)]

    def hom_rank(self, n: int) -> int:
        return self.dim if n == 0 else 0

    def class_coords(self, p: Poly, n: int):
        if n != 0:
            if p.is_zero():
                return []
            # a degree-n element of a degree-0 algebra can only be zero
            return [] if self.is_zero(p) else None
        return self.nf_coords(p)

    def boundary_preimage(self, z: Poly):
        if z.is_zero() or self.is_zero(z):
            return Poly.zero(self.reg)
        return None


# -- PDE systems ----------------------------------------------------------------


@dataclass
class PDESystem:
    ctx: JetContext
    equations: list
    labels: list | None = None

    def __post_init__(self):
        for i, F in enumerate(self.equations):
            if F.is_zero():
                raise InvariantViolationError(f"equation {i + 1} is zero")
            if not F.is_homogeneous(0):
                raise InvariantViolationError(f"equation {i + 1} is not of degree 0")
            if not self.ctx.is_jet_poly(F, allow_antifields=False):
                raise InvariantViolationError(
                    f"equation {i + 1} does not live in the jet algebra"
                )
        if self.labels is None:
            self.labels = [f"phi{i + 1}*" for i in range(len(self.equations))]


@dataclass
class NoetherOperator:
    """A relation sum_i,alpha g^i_alpha D^alpha F_i = 0 among the equations."""

    coeffs: tuple  # per equation: dict multi-index -> Poly

    def apply(self, ctx: JetContext, targets) -> Poly:
        """sum g^i_alpha D^alpha(targets[i]); targets default to the F_i."""
        acc = Poly.zero(ctx.reg)
        for i, table in enumerate(self.coeffs):
            for alpha, g in sorted(table.items()):
                acc = acc + g * ctx.multi_derivative(targets[i], alpha)
        return acc

    def format(self, ctx: JetContext) -> str:
        parts = []
        for i, table in enumerate(self.coeffs):
            for alpha, g in sorted(table.items()):
                dtag = "".join("xyzw"[k] * a for k, a in enumerate(alpha))
                op = f"D{dtag} " if dtag else ""
                parts.append(f"({g.format()})*{op}F{i + 1}")
        return " + ".join(parts) if parts else "0"


# -- Koszul ----------------------------------------------------------------------


def koszul_resolution(reg: GenRegistry, coords) -> DGAlgebra:
    """The Koszul complex on the given degree-0 coordinates: one odd
    degree-1 generator per coordinate, differential sending it to the
    coordinate."""
    coords = list(coords)
    if len(set(coords)) != len(coords):
        raise InvariantViolationError("repeated coordinate")
    for x in coords:
        if reg.hdeg(x) != 0:
            raise InvariantViolationError("coordinates must have degree 0")
    base = DGAlgebra(reg, tuple(coords), {x: Poly.zero(reg) for x in coords})
    if not coords:
        return base
    return extend_differential(
        base,
        [(f"{reg.name(x)}*", 1) for x in coords],
        [Poly.gen(reg, x) for x in coords],
        kind=gca.ANTIFIELD,
    )


def build_koszul(r: int):
    """Fresh registry with r coordinates and their Koszul complex."""
    reg = GenRegistry()
    xs = [reg.add(f"x{i + 1}", 0, gca.BASE_COORD) for i in range(r)]
    return koszul_resolution(reg, xs)


# -- Noether identities ----------------------------------------------------------


def noether_identities(sys: PDESystem, order_cap: int, coeff_deg_cap: int):
    """Basis of the relations sum g^i_alpha D^alpha F_i = 0 within the caps.

    The coefficient polynomials g range over jet monomials of total degree
    at most coeff_deg_cap; |alpha| <= order_cap.  An empty result means no
    identities were found within the caps, not that none exist.
    """
    ctx = sys.ctx
    eqs = sys.equations
    slots = []
    prolonged = []
    for i, F in enumerate(eqs):
        base_order = ctx.mono_max_order(F)
        for alpha in multi_indices(ctx.base_dim, order_cap):
            if base_order + multi_index_order(alpha) > ctx.jet_cap:
                raise CapOverflowError(
                    "prolongation within order_cap exceeds the jet cap"
                )
            slots.append((i, alpha))
            prolonged.append(ctx.multi_derivative(F, alpha))
    # coefficient monomials over everything materialized so far
    coeff_alg = DGAlgebra(
        ctx.reg,
        sorted(g for g in ctx.materialized_gens() if ctx.reg.hdeg(g) == 0),
        {g: Poly.zero(ctx.reg) for g in ctx.materialized_gens()
         if ctx.reg.hdeg(g) == 0},
        jet=ctx,
    )
    coeff_basis = WindowedComplex(
        coeff_alg, Window(0, coeff_deg_cap, ctx.jet_cap)
    ).basis(0)
    unknowns = []
    columns = []
    for s, (slot, Fp) in enumerate(zip(slots, prolonged)):
        for m in coeff_basis:
            unknowns.append((slot, m))
            columns.append(Poly.monomial(ctx.reg, m) * Fp)
    mono_index: dict = {}
    for col in columns:
        for m in col.terms:
            mono_index.setdefault(m, len(mono_index))
    rows = [[Fraction(0)] * len(unknowns) for _ in range(len(mono_index))]
    for j, col in enumerate(columns):
        for m, c in col.terms.items():
            rows[mono_index[m]][j] = c
    kernel = linalg.nullspace(rows, len(unknowns))
    out = []
    for vec in kernel:
        per_eq = [dict() for _ in eqs]
        for val, ((i, alpha), m) in zip(vec, unknowns):
            if val:
                cur = per_eq[i].get(alpha, Poly.zero(ctx.reg))
                per_eq[i][alpha] = cur + Poly.monomial(ctx.reg, m, val)
        op = NoetherOperator(tuple(per_eq))
        residual = op.apply(ctx, eqs)
        if not residual.is_zero():
            raise InvariantViolationError(
                "kernel vector fails to annihilate the system",
                residual=residual,
            )
        out.append(op)
    return out


# -- Koszul-Tate complex ----------------------------------------------------------


def kt_complex(sys: PDESystem, noether) -> DGAlgebra:
    """The Koszul-Tate complex: degree-1 antifield towers for the equations,
    degree-2 towers for the Noether operators, total derivatives taken in
    the extended sense.  d^2 = 0 on the degree-2 towers is exactly the
    Noether identity and is re-verified; a bad operator surfaces as the
    residual of that check.
    """
    ctx = sys.ctx
    if not ctx.extended:
        raise InvariantViolationError(
            "kt_complex needs an extended-mode JetContext"
        )
    diff: dict = {}
    phi_towers = []
    for i, F in enumerate(sys.equations):
        tower = ctx.add_tower(sys.labels[i], 1)
        phi_towers.append(tower)
        base_order = ctx.mono_max_order(F)
        for alpha in multi_indices(ctx.base_dim, ctx.jet_cap - base_order):
            gid = ctx.tower_var(tower, alpha)
            diff[gid] = ctx.multi_derivative(F, alpha)
    for j, op in enumerate(noether):
        tower = ctx.add_tower(f"C{j + 1}*", 2)
        seed = op.apply(
            ctx,
            [Poly.gen(ctx.reg, ctx.tower_var(phi_towers[i], (0,) * ctx.base_dim))
             for i in range(len(sys.equations))],
        )
        for beta in multi_indices(ctx.base_dim, ctx.jet_cap):
            try:
                img = ctx.multi_derivative(seed, beta)
            except CapOverflowError:
                continue
            if any(
                ctx.reg.hdeg(h) > 0 and h not in diff
                for h in img.support_gens()
            ):
                continue  # tower stops where the cap stops feeding d^2
            gid = ctx.tower_var(tower, beta)
            diff[gid] = img
    zero_gens = sorted(
        g for g in ctx.materialized_gens()
        if ctx.reg.hdeg(g) == 0
    )
    base = DGAlgebra(ctx.reg, zero_gens,
                     {g: Poly.zero(ctx.reg) for g in zero_gens}, jet=ctx)
    anti = sorted(diff, key=ctx.reg.well_order_key)
    table = base.gens + tuple(anti)
    full = {**base.diff, **diff}
    alg = DGAlgebra(ctx.reg, table, full, base=base, jet=ctx)
    alg.verify_d_squared()
    return alg


# -- on-shell resolution -----------------------------------------------------------


def shell_presentation(sys: PDESystem, w: Window):
    """Materialize the windowed prolongation ideal and present the quotient.

    Returns (A, B, phi): the jet-window algebra, the quotient target and the
    projection.  All fiber jet variables up to the window's jet cap are part
    of the presentation (the shell keeps unconstrained derivative
    directions); base coordinates appear only when the equations use them.
    """
    ctx = sys.ctx
    jet_cap = w.jet_cap if w.jet_cap is not None else ctx.jet_cap
    for j in range(1, ctx.fiber_rank + 1):
        for alpha in multi_indices(ctx.base_dim, min(jet_cap, ctx.jet_cap)):
            ctx.jet(j, alpha)
    ideal = []
    for F in sys.equations:
        base_order = ctx.mono_max_order(F)
        for alpha in multi_indices(ctx.base_dim, jet_cap - base_order):
            ideal.append(ctx.multi_derivative(F, alpha))
    zero_gens = sorted(
        g for g in ctx.materialized_gens() if ctx.reg.hdeg(g) == 0
    )
    A = DGAlgebra(ctx.reg, zero_gens,
                  {g: Poly.zero(ctx.reg) for g in zero_gens}, jet=ctx)
    B = QuotientWindow(A, ideal, w)
    phi = DGMorphism(A, B, {g: Poly.gen(ctx.reg, g) for g in A.gens},
                     validate=False)
    return A, B, phi


def resolve_onshell(sys: PDESystem, w: Window, max_stages: int,
                    noether=None) -> ResolutionTrace:
    """Resolution of the on-shell algebra over the jet algebra.

    Builds the windowed quotient presentation of the shell, then drives the
    staged replacement with the jet algebra as base.  When a Noether basis
    is supplied, the Koszul-Tate towers seed stages 1 and 2 and the loop
    only adds what windowed homology still demands.
    """
    if noether:
        return _resolve_onshell_seeded(sys, w, max_stages, noether)
    _A, _B, phi = shell_presentation(sys, w)
    return resolve_weq(phi, w, max_stages)


def _resolve_onshell_seeded(sys: PDESystem, w: Window, max_stages: int, noether):
    ctx = sys.ctx
    kt = kt_complex(sys, noether)
    _A, _B, phi = shell_presentation(sys, w)
    tower_gens_1 = [
        g for g in kt.gens if ctx.reg.hdeg(g) == 1 and ctx.gen_in_tower(g)
    ]
    tower_gens_2 = [
        g for g in kt.gens if ctx.reg.hdeg(g) == 2 and ctx.gen_in_tower(g)
    ]

    def in_window(p: Poly, jet_cap) -> bool:
        return (
            p.max_poly_degree() <= w.poly_deg_cap
            and ctx.mono_max_order(p) <= jet_cap
        )

    def seed(fact):
        jet_cap = w.jet_cap if w.jet_cap is not None else ctx.jet_cap
        mapping: dict[int, Poly] = {}

        def substitute(p: Poly) -> Poly:
            out = Poly.zero(ctx.reg)
            for mono, c in p.terms.items():
                term = Poly.scalar(ctx.reg, c)
                for g, e in mono:
                    img = mapping.get(g, Poly.gen(ctx.reg, g))
                    for _ in range(e):
                        term = term * img
                out = out + term
            return out

        fact.open_stage(1)
        for g in sorted(tower_gens_1, key=ctx.reg.well_order_key):
            sigma = kt.d_gen(g)
            if not in_window(sigma, jet_cap):
                continue
            gid = fact.tate_gen(1, sigma, Poly.zero(fact.B.reg), 0)
            mapping[g] = Poly.gen(ctx.reg, gid)
        fact.open_stage(2)
        for g in sorted(tower_gens_2, key=ctx.reg.well_order_key):
            sigma = substitute(kt.d_gen(g))
            if any(
                h not in fact.A.gen_set and h not in fact._rec
                for h in sigma.support_gens()
            ):
                continue  # references a tower variable that was not seeded
            if not in_window(sigma, jet_cap):
                continue
            fact.tate_gen(2, sigma, Poly.zero(fact.B.reg), 1)

    return resolve_weq(phi, w, max_stages, seed=seed)

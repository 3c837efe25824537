"""Differential graded algebra structures.

A :class:`DGAlgebra` is an ordered generator table plus a differential rule
(generator -> polynomial); the differential extends to everything by the
graded Leibniz rule, and A (x) SV is represented as one free algebra over
the union of the generators.  Split versus non-split is a property of the
differential detected by :func:`check_structure`, not a representation
difference.

The generator table order IS the Sullivan well-order of the presentation;
constructors in this package emit tables sorted by the canonical key
(hdeg, stage, gid), which makes the minimality check a sort-order check.
"""

from __future__ import annotations

from dataclasses import dataclass

from ktforge import gca
from ktforge.errors import (
    ChainConditionError,
    DegreeMismatchError,
    InvariantViolationError,
    NotACycleError,
    UnknownGeneratorError,
)
from ktforge.gca import Derivation, GenRegistry, Poly


class DGAlgebra:
    """Free graded-commutative algebra with a degree -1 differential.

    ``gens`` is the ordered generator table (the well-order used by the
    structural checks); ``diff`` must assign an image to every table entry
    (explicit zeros included).  ``base`` marks a sub-DGAlgebra whose
    generators are exempt from the Sullivan-order checks.  Instances are
    immutable; extensions return new values sharing the registry.
    """

    __slots__ = ("reg", "gens", "diff", "base", "jet", "_gen_set", "_d")

    def __init__(self, reg: GenRegistry, gens, diff: dict, base=None, jet=None,
                 validate: bool = True):
        self.reg = reg
        self.gens = tuple(gens)
        self.diff = dict(diff)
        self.base = base
        self.jet = jet
        self._gen_set = frozenset(self.gens)
        if len(self._gen_set) != len(self.gens):
            raise InvariantViolationError("duplicate generator in table")
        for g in self.gens:
            if g not in reg:
                raise UnknownGeneratorError(g)
            if g not in self.diff:
                raise InvariantViolationError(
                    f"no differential rule for {reg.name(g)} (use an explicit zero)"
                )
        if base is not None:
            if not base.gen_set <= self._gen_set:
                raise InvariantViolationError("base generators missing from table")
            for g in base.gens:
                if self.diff[g] != base.diff[g]:
                    raise InvariantViolationError(
                        f"differential of base generator {reg.name(g)} was altered"
                    )
        if validate:
            for g in self.gens:
                img = self.diff[g]
                if img.is_zero():
                    continue
                want = reg.hdeg(g) - 1
                if want < 0 or not img.is_homogeneous(want):
                    raise DegreeMismatchError(
                        f"d({reg.name(g)}) must be homogeneous of degree {want}"
                    )
        self._d = Derivation(reg, self.diff, -1, on_missing="error")

    @property
    def gen_set(self):
        return self._gen_set

    def d_gen(self, gid: int) -> Poly:
        try:
            return self.diff[gid]
        except KeyError:
            raise UnknownGeneratorError(gid) from None

    def d(self, p: Poly) -> Poly:
        return self._d(p)

    def eq(self, p: Poly, q: Poly) -> bool:
        return p == q

    def contains(self, p: Poly) -> bool:
        return p.reg is self.reg and p.support_gens() <= self._gen_set

    def zero(self) -> Poly:
        return Poly.zero(self.reg)

    def one(self) -> Poly:
        return Poly.one(self.reg)

    def gen_poly(self, gid: int) -> Poly:
        if gid not in self._gen_set:
            raise UnknownGeneratorError(gid)
        return Poly.gen(self.reg, gid)

    def verify_d_squared(self):
        for g in self.gens:
            r = self.d(self.diff[g])
            if not r.is_zero():
                raise NotACycleError(
                    f"d^2({self.reg.name(g)}) != 0", residual=r
                )

    def structural_eq(self, other) -> bool:
        return (
            isinstance(other, DGAlgebra)
            and self.reg is other.reg
            and self.gens == other.gens
            and self.diff == other.diff
        )

    def __repr__(self):
        names = ", ".join(self.reg.name(g) for g in self.gens[:8])
        more = "..." if len(self.gens) > 8 else ""
        return f"DGAlgebra([{names}{more}])"


def trivial_algebra(reg: GenRegistry | None = None) -> DGAlgebra:
    """The ground field as a DG algebra (no generators, zero differential)."""
    return DGAlgebra(reg if reg is not None else GenRegistry(), (), {})


class DGMorphism:
    """Degree-0 algebra morphism given by its values on source generators.

    Extension to products is multiplicative; the chain-map property holds on
    generators by the construction rules of this package and can be
    re-verified with :meth:`verify_chain`.  The target may be a
    :class:`DGAlgebra` or any object with ``reg``, ``d`` and ``eq`` (the
    windowed quotient presentations qualify).
    """

    __slots__ = ("source", "target", "rule")

    def __init__(self, source: DGAlgebra, target, rule: dict, validate: bool = True):
        self.source = source
        self.target = target
        self.rule = dict(rule)
        if validate:
            treg = target.reg
            for g in source.gens:
                if g not in self.rule:
                    raise InvariantViolationError(
                        f"no image for generator {source.reg.name(g)}"
                    )
                img = self.rule[g]
                if img.reg is not treg:
                    raise InvariantViolationError("image lives in the wrong registry")
                if not img.is_zero() and not img.is_homogeneous(source.reg.hdeg(g)):
                    raise DegreeMismatchError(
                        f"image of {source.reg.name(g)} is not of degree "
                        f"{source.reg.hdeg(g)}"
                    )

    def __call__(self, p: Poly) -> Poly:
        treg = self.target.reg
        out = Poly.zero(treg)
        for mono, c in p.terms.items():
            term = Poly.scalar(treg, c)
            for g, e in mono:
                img = self.rule.get(g)
                if img is None:
                    raise UnknownGeneratorError(g)
                for _ in range(e):
                    term = term * img
                if term.is_zero():
                    break
            out = out + term
        return out

    def verify_chain(self, gids=None):
        """Check d_B(q(g)) = q(d(g)) on the given (default: all) generators."""
        for g in gids if gids is not None else self.source.gens:
            lhs = self.target.d(self.rule[g])
            rhs = self(self.source.d_gen(g))
            if not self.target.eq(lhs, rhs):
                raise ChainConditionError(
                    f"chain condition fails on {self.source.reg.name(g)}",
                    residual=lhs - rhs,
                )

    def then(self, other: "DGMorphism") -> "DGMorphism":
        """Composite other o self."""
        rule = {g: other(img) for g, img in self.rule.items()}
        return DGMorphism(self.source, other.target, rule, validate=False)

    @staticmethod
    def identity(alg: DGAlgebra) -> "DGMorphism":
        return DGMorphism(alg, alg, {g: alg.gen_poly(g) for g in alg.gens},
                          validate=False)

    def rule_eq(self, other: "DGMorphism") -> bool:
        return self.source is other.source and self.rule == other.rule


def inclusion(sub: DGAlgebra, sup: DGAlgebra) -> DGMorphism:
    """Canonical inclusion t -> t (x) 1; identity on generators, no copying."""
    if not sub.gen_set <= sup.gen_set:
        raise InvariantViolationError("not a subalgebra")
    return DGMorphism(sub, sup, {g: Poly.gen(sup.reg, g) for g in sub.gens},
                      validate=False)


def _well_sorted(reg: GenRegistry, gids):
    return tuple(sorted(gids, key=reg.well_order_key))


def extend_differential(T: DGAlgebra, new_gens, images, *, staged: bool = False,
                        kind: str = gca.TATE_GEN, stage: int = 0, base=None):
    """Adjoin free generators with prescribed differentials: T (x) S<new>.

    ``new_gens`` is a list of (name, hdeg); ``images[i]`` must be homogeneous
    of degree hdeg-1 and killed by the existing differential.  In the strict
    mode images may involve only T; with ``staged=True`` an image may also
    involve earlier entries of the new block (the lowering case) -- pass a
    callable image, it receives the gids adjoined so far.  d^2 = 0 is
    re-verified on all new generators.

    Returns the extended algebra; its base defaults to T.
    """
    if len(new_gens) != len(images):
        raise InvariantViolationError("one image per new generator required")
    reg = T.reg
    diff = dict(T.diff)
    added = []
    allowed = set(T.gen_set)
    for (name, hdeg), img in zip(new_gens, images):
        if callable(img):
            img = img(tuple(added))
        if img.reg is not reg:
            raise InvariantViolationError("image lives in the wrong registry")
        if not img.is_zero():
            if hdeg < 1 or not img.is_homogeneous(hdeg - 1):
                raise DegreeMismatchError(
                    f"image for {name} must be homogeneous of degree {hdeg - 1}"
                )
            if not img.support_gens() <= allowed:
                raise InvariantViolationError(
                    f"image for {name} leaves the allowed subalgebra"
                )
            residual = Derivation(reg, diff, -1)(img)
            if not residual.is_zero():
                raise NotACycleError(
                    f"condition (CondRSADiff) violated for {name}: image is not "
                    f"a cycle", residual=residual,
                )
        gid = reg.add(name, hdeg, kind, stage)
        diff[gid] = img
        added.append(gid)
        if staged:
            allowed.add(gid)
    gens = T.gens + _well_sorted(reg, added)
    ext = DGAlgebra(reg, gens, diff, base=base if base is not None else T, jet=T.jet)
    for g in added:
        r = ext.d(diff[g])
        if not r.is_zero():
            raise NotACycleError(f"d^2 != 0 on {reg.name(g)}", residual=r)
    return ext


def extend_morphism(ext: DGAlgebra, p: DGMorphism, gen_images: dict) -> DGMorphism:
    """Extend a morphism on T to T (x) SV by choosing generator images.

    Each image must have the generator's degree and satisfy the chain
    condition d_B(image) = p(d(g)); the extension to products is
    multiplicative.
    """
    rule = dict(p.rule)
    target = p.target
    for g in ext.gens:
        if g in rule:
            continue
        if g not in gen_images:
            raise InvariantViolationError(
                f"no image supplied for new generator {ext.reg.name(g)}"
            )
    partial = DGMorphism(ext, target, {**rule, **gen_images}, validate=True)
    for g, img in gen_images.items():
        lhs = target.d(img)
        rhs = partial(ext.d_gen(g))
        if not target.eq(lhs, rhs):
            raise ChainConditionError(
                f"d_B q(g) != p d(g) for {ext.reg.name(g)}",
                residual=lhs - rhs,
            )
    return partial


@dataclass
class Pushout:
    """Result of adjoining one cell: the extended algebra, the canonical
    inclusion, the new top generator and its prescribed boundary."""

    algebra: DGAlgebra
    inclusion: DGMorphism
    top: int
    kappa: Poly
    degree: int


def adjoin_pushout(T: DGAlgebra, n: int, kappa: Poly | None, name: str | None = None,
                   stage: int = 0) -> Pushout:
    """Adjoin a single degree-n generator a with d(a) = kappa.

    kappa must be a homogeneous degree n-1 cycle of T; for the degree-0
    border case kappa must be 0 (an even generator with zero differential).
    The inclusion t -> t (x) 1 is returned regardless of whether the class
    [kappa] was nontrivial.
    """
    reg = T.reg
    if kappa is None:
        kappa = Poly.zero(reg)
    if n == 0:
        if not kappa.is_zero():
            raise InvariantViolationError("degree-0 adjunction requires kappa = 0")
    else:
        if not kappa.is_zero():
            if not kappa.is_homogeneous(n - 1):
                raise DegreeMismatchError(
                    f"kappa must be homogeneous of degree {n - 1}"
                )
            if not T.contains(kappa):
                raise InvariantViolationError("kappa must lie in T")
            r = T.d(kappa)
            if not r.is_zero():
                raise NotACycleError("kappa is not a cycle", residual=r)
    if name is None:
        name = f"cell{len(reg)}d{n}"
    ext = extend_differential(T, [(name, n)], [kappa], stage=stage)
    top = next(g for g in ext.gens if g not in T.gen_set)
    return Pushout(ext, inclusion(T, ext), top, kappa, n)


def pushout_mediator(ext: Pushout, i_prime: DGMorphism, top_image: Poly) -> DGMorphism:
    """The unique mediator chi with chi o i = i' and chi(top) = top_image.

    Requires the cocone compatibility d_B(top_image) = i'(kappa); the chain
    property of chi is re-verified on the generators.
    """
    target = i_prime.target
    lhs = target.d(top_image)
    rhs = i_prime(ext.kappa)
    if not target.eq(lhs, rhs):
        raise ChainConditionError(
            "cocone incompatible: d_B(top image) != i'(kappa)",
            residual=lhs - rhs,
        )
    if not top_image.is_zero() and not top_image.is_homogeneous(ext.degree):
        raise DegreeMismatchError("top image has the wrong degree")
    chi = DGMorphism(ext.algebra, target, {**i_prime.rule, ext.top: top_image},
                     validate=False)
    chi.verify_chain()
    return chi


@dataclass(frozen=True)
class StructureReport:
    d_squared_zero: bool
    lowering: bool
    minimal: bool
    split: bool

    @property
    def all_ok(self):
        return self.d_squared_zero and self.lowering and self.minimal and self.split


def check_structure(A: DGAlgebra) -> StructureReport:
    """Pure report on the four Sullivan-type flags.

    d_squared_zero: d(d(g)) = 0 for every table generator.  The remaining
    flags quantify over the non-base block in table order: lowering means
    every differential references only base generators and strictly earlier
    table entries; minimal means the table order respects degree; split
    means no differential of a non-base generator touches the base.

    For lazily materialized generator families the table holds what has
    been materialized so far, so the verdict is per-materialized-generator,
    not a universal claim about the full (infinite) family.
    """
    reg = A.reg
    base_set = A.base.gen_set if A.base is not None else frozenset()
    d2 = True
    for g in A.gens:
        if not A.d(A.diff[g]).is_zero():
            d2 = False
            break
    block = [g for g in A.gens if g not in base_set]
    pos = {g: i for i, g in enumerate(block)}
    lowering = True
    split = True
    for g in block:
        for mono in A.diff[g].terms:
            for h, _e in mono:
                if h in base_set:
                    split = False
                elif pos.get(h, len(block)) >= pos[g]:
                    lowering = False
    minimal = all(
        reg.hdeg(block[i]) <= reg.hdeg(block[i + 1]) for i in range(len(block) - 1)
    )
    return StructureReport(d2, lowering, minimal, split)

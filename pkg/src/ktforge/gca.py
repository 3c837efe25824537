"""Exact arithmetic for free graded-commutative algebras.

Conventions used throughout the package:

* a monomial is a tuple of ``(gid, exp)`` pairs sorted by ascending gid;
  odd-degree generators carry exponent exactly 1 (odd squares vanish over
  characteristic 0);
* a polynomial is an exact-rational linear combination of monomials in
  canonical form (no zero coefficients, structural equality);
* reordering products follows the Koszul rule: swapping two odd factors
  flips the sign.

Generators live in an append-only :class:`GenRegistry`; polynomials hold a
reference to their registry.  All values are immutable after construction,
so sharing across threads after a freeze point is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ktforge import kernels
from ktforge.errors import (
    DegreeMismatchError,
    InvariantViolationError,
    UnknownGeneratorError,
)

BASE_COORD = "base_coord"
JET_VAR = "jet_var"
ANTIFIELD = "antifield"
TATE_GEN = "tate_gen"
DISC_TOP = "disc_top"
DISC_BOTTOM = "disc_bottom"
CYCLE_GEN = "cycle_gen"

KINDS = frozenset(
    {BASE_COORD, JET_VAR, ANTIFIELD, TATE_GEN, DISC_TOP, DISC_BOTTOM, CYCLE_GEN}
)


@dataclass(frozen=True)
class GeneratorInfo:
    gid: int
    name: str
    hdeg: int
    kind: str
    stage: int = 0


class GenRegistry:
    """Append-only table of generators.

    Generator ids are assigned in creation order; ``(hdeg, stage, gid)`` is
    the canonical well-order used by the structural checks.
    """

    __slots__ = ("_info", "_odd", "_names", "_frozen", "_display")

    def __init__(self):
        self._info: list[GeneratorInfo] = []
        self._odd = bytearray()
        self._names: set[str] = set()
        self._frozen = False
        self._display: dict[int, str] = {}

    def add(self, name: str, hdeg: int, kind: str = TATE_GEN, stage: int = 0) -> int:
        if self._frozen:
            raise InvariantViolationError("registry is frozen")
        if hdeg < 0:
            raise DegreeMismatchError(f"negative homological degree {hdeg}")
        if kind not in KINDS:
            raise InvariantViolationError(f"unknown generator kind {kind!r}")
        gid = len(self._info)
        if name in self._names:
            name = f"{name}~{gid}"
        self._names.add(name)
        self._info.append(GeneratorInfo(gid, name, hdeg, kind, stage))
        self._odd.append(hdeg & 1)
        return gid

    def freeze(self):
        self._frozen = True

    def __len__(self):
        return len(self._info)

    def __contains__(self, gid):
        return isinstance(gid, int) and 0 <= gid < len(self._info)

    def info(self, gid: int) -> GeneratorInfo:
        if gid not in self:
            raise UnknownGeneratorError(gid)
        return self._info[gid]

    def hdeg(self, gid: int) -> int:
        return self.info(gid).hdeg

    def name(self, gid: int) -> str:
        got = self._display.get(gid)
        return got if got is not None else self.info(gid).name

    def set_display_name(self, gid: int, name: str):
        """Override the display name (canonical name stays in GeneratorInfo)."""
        self.info(gid)
        self._display[gid] = name

    def is_odd(self, gid: int) -> bool:
        return bool(self._odd[self.info(gid).gid])

    @property
    def odd_mask(self):
        return self._odd

    def well_order_key(self, gid: int):
        info = self.info(gid)
        return (info.hdeg, info.stage, info.gid)


def monomial_hdeg(reg: GenRegistry, mono) -> int:
    return sum(e * reg.hdeg(g) for g, e in mono)


def monomial_degree(mono) -> int:
    """Total exponent count; every generator counts uniformly."""
    return sum(e for _g, e in mono)


def mono_key(mono):
    """Canonical order on monomials: graded by total exponent, then lex."""
    return (monomial_degree(mono), mono)


def normalize_monomial(reg: GenRegistry, gids):
    """Sort a raw generator word into canonical form.

    Returns ``(monomial, sign)`` where sign is the parity of the permutation
    restricted to odd-degree factors, or 0 when an odd generator repeats.
    """
    gids = tuple(gids)
    for g in gids:
        if g not in reg:
            raise UnknownGeneratorError(g)
    return kernels.mono_sort(gids, reg.odd_mask)


class Poly:
    """Canonical-form polynomial: map monomial -> nonzero Fraction."""

    __slots__ = ("reg", "terms")

    def __init__(self, reg: GenRegistry, terms: dict):
        self.reg = reg
        self.terms = terms

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, reg: GenRegistry) -> "Poly":
        return cls(reg, {})

    @classmethod
    def scalar(cls, reg: GenRegistry, c) -> "Poly":
        c = Fraction(c)
        return cls(reg, {(): c} if c else {})

    @classmethod
    def one(cls, reg: GenRegistry) -> "Poly":
        return cls.scalar(reg, 1)

    @classmethod
    def gen(cls, reg: GenRegistry, gid: int, c=1) -> "Poly":
        if gid not in reg:
            raise UnknownGeneratorError(gid)
        c = Fraction(c)
        return cls(reg, {((gid, 1),): c} if c else {})

    @classmethod
    def monomial(cls, reg: GenRegistry, mono, c=1) -> "Poly":
        c = Fraction(c)
        return cls(reg, {tuple(mono): c} if c else {})

    @classmethod
    def from_word(cls, reg: GenRegistry, gids, c=1) -> "Poly":
        mono, sign = normalize_monomial(reg, gids)
        c = Fraction(c) * sign
        return cls(reg, {mono: c} if c else {})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.reg is other.reg and self.terms == other.terms

    def __hash__(self):
        return hash(self.canonical_key())

    def canonical_key(self):
        """Hashable canonical form: terms sorted by the monomial order."""
        return tuple(sorted(self.terms.items(), key=lambda kv: mono_key(kv[0])))

    def order_key(self):
        """Graded comparison key (leading term first, degree before lex)."""
        return tuple((mono_key(m), c) for m, c in self.items())

    def items(self):
        """Terms in canonical order."""
        return sorted(self.terms.items(), key=lambda kv: mono_key(kv[0]))

    def support_gens(self):
        out = set()
        for mono in self.terms:
            for g, _e in mono:
                out.add(g)
        return out

    def hdeg(self):
        """Homological degree if homogeneous, else None.  Zero -> None."""
        degs = {monomial_hdeg(self.reg, m) for m in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def is_homogeneous(self, n=None) -> bool:
        if not self.terms:
            return True
        d = self.hdeg()
        if d is None:
            return False
        return n is None or d == n

    def max_poly_degree(self) -> int:
        return max((monomial_degree(m) for m in self.terms), default=0)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.scalar(self.reg, other)
        if not isinstance(other, Poly):
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            nc = terms.get(m, 0) + c
            if nc:
                terms[m] = nc
            else:
                terms.pop(m, None)
        return Poly(self.reg, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.reg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.scalar(self.reg, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return Poly.zero(self.reg)
            return Poly(self.reg, {m: c * v for m, v in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        odd = self.reg.odd_mask
        terms: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m, sign = kernels.mono_mul(ma, mb, odd)
                if not sign:
                    continue
                nc = terms.get(m, 0) + ca * cb * sign
                if nc:
                    terms[m] = nc
                else:
                    del terms[m]
        return Poly(self.reg, terms)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = Poly.one(self.reg)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # -- display -----------------------------------------------------------

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.items():
            factors = "*".join(
                self.reg.name(g) if e == 1 else f"{self.reg.name(g)}^{e}"
                for g, e in mono
            )
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = factors
            else:
                body = f"{mag}*{factors}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"Poly({self.format()})"


def mul(p: Poly, q: Poly) -> Poly:
    """Graded-commutative product (free-algebra realization of the paper-level
    products on tensor factors)."""
    return p * q


def _derive(reg: GenRegistry, lookup, parity: int, p: Poly) -> Poly:
    """Core graded-Leibniz engine.

    ``lookup(gid)`` returns the image polynomial (may be zero) or raises.
    For odd parity, applying the rule behind a prefix of homological degree
    d costs a sign (-1)^d; even-parity derivations are sign-free.
    """
    parity_odd = parity & 1
    acc = Poly.zero(reg)
    for mono, coeff in p.terms.items():
        prefix_deg = 0
        for idx, (g, e) in enumerate(mono):
            img = lookup(g)
            if img is not None and img.terms:
                left = Poly.monomial(reg, mono[:idx])
                rest = ((g, e - 1),) if e > 1 else ()
                right = Poly.monomial(reg, rest + mono[idx + 1 :])
                c = coeff * e
                if parity_odd and (prefix_deg & 1):
                    c = -c
                acc = acc + (left * img * right) * c
            prefix_deg += e * reg.hdeg(g)
    return acc


class Derivation:
    """Graded derivation determined by its values on generators.

    ``parity`` is the homological-degree shift (-1 for differentials).
    Generators missing from ``rules`` are killed (image 0) when
    ``on_missing='kill'`` and rejected when ``on_missing='error'``; the
    caller picks the mode explicitly.
    """

    __slots__ = ("reg", "rules", "parity", "on_missing")

    def __init__(self, reg: GenRegistry, rules: dict, parity: int, on_missing: str = "error"):
        if on_missing not in ("kill", "error"):
            raise ValueError("on_missing must be 'kill' or 'error'")
        for g, img in rules.items():
            if g not in reg:
                raise UnknownGeneratorError(g)
            if img is None or img.is_zero():
                continue
            want = reg.hdeg(g) + parity
            if want < 0 or not img.is_homogeneous(want):
                raise DegreeMismatchError(
                    f"rule image of {reg.name(g)} has degree "
                    f"{img.hdeg()}, expected {want}"
                )
        self.reg = reg
        self.rules = rules
        self.parity = parity
        self.on_missing = on_missing

    def _lookup(self, gid):
        img = self.rules.get(gid)
        if img is None:
            if self.on_missing == "error":
                raise UnknownGeneratorError(gid)
            return None
        return img

    def __call__(self, p: Poly) -> Poly:
        if p.reg is not self.reg:
            raise InvariantViolationError("polynomial from a different registry")
        return _derive(self.reg, self._lookup, self.parity, p)


def apply_derivation(rules: dict, parity: int, p: Poly, on_missing: str = "error") -> Poly:
    """One-shot derivation application; see :class:`Derivation`."""
    return Derivation(p.reg, rules, parity, on_missing)(p)

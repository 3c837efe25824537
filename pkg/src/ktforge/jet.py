"""Jet-algebra coordinates, total derivatives and prolongation.

A :class:`JetContext` owns the base coordinates x1..xp, the jet variables
u^j_alpha (alpha a multi-index of order at most ``jet_cap``) and, in extended
mode, antifield towers that the total derivatives treat exactly like jet
variables.  The order-0 fiber variables u^j are materialized eagerly (they
are the coordinates of the bundle); base coordinates and higher jets appear
lazily on first use, which keeps every run finitely generated.
"""

from __future__ import annotations

from ktforge import gca
from ktforge.errors import CapOverflowError, InvariantViolationError, KtforgeError
from ktforge.gca import GenRegistry, Poly

_DIR_LETTERS = "xyzw"


def multi_index_order(alpha) -> int:
    return sum(alpha)


def _suffix(alpha) -> str:
    """Display suffix for a multi-index: letters up to 4 dims, bracket form above."""
    if not any(alpha):
        return ""
    if len(alpha) <= len(_DIR_LETTERS):
        return "_" + "".join(_DIR_LETTERS[i] * a for i, a in enumerate(alpha))
    return "_[" + ",".join(str(a) for a in alpha) + "]"


class Tower:
    """An antifield family closed under total derivatives (extended mode)."""

    __slots__ = ("tid", "name", "hdeg")

    def __init__(self, tid, name, hdeg):
        self.tid = tid
        self.name = name
        self.hdeg = hdeg


class JetContext:
    def __init__(self, base_dim: int, fiber_rank: int, jet_cap: int,
                 reg: GenRegistry | None = None, extended: bool = False):
        if base_dim < 1 or fiber_rank < 1 or jet_cap < 0:
            raise InvariantViolationError("base_dim, fiber_rank >= 1 and jet_cap >= 0 required")
        self.base_dim = base_dim
        self.fiber_rank = fiber_rank
        self.jet_cap = jet_cap
        self.extended = extended
        self.reg = reg if reg is not None else GenRegistry()
        self._coords: dict[int, int] = {}
        self._jets: dict[tuple, int] = {}
        self._towers: list[Tower] = []
        self._tower_vars: dict[tuple, int] = {}
        self._kind_of: dict[int, tuple] = {}
        zero = (0,) * base_dim
        for j in range(1, fiber_rank + 1):
            self._materialize_jet(j, zero)

    # -- generators --------------------------------------------------------

    def coord(self, i: int) -> int:
        """Base coordinate x_i (1-based); even, degree 0, jet order 0."""
        if not 1 <= i <= self.base_dim:
            raise InvariantViolationError(f"direction {i} out of range 1..{self.base_dim}")
        gid = self._coords.get(i)
        if gid is None:
            gid = self.reg.add(f"x{i}", 0, gca.BASE_COORD)
            self._coords[i] = gid
            self._kind_of[gid] = ("coord", i)
        return gid

    def _materialize_jet(self, j, alpha):
        gid = self.reg.add(f"u{j}{_suffix(alpha)}", 0, gca.JET_VAR)
        self._jets[(j, alpha)] = gid
        self._kind_of[gid] = ("jet", j, alpha)
        return gid

    def jet(self, j: int, alpha) -> int:
        """Jet variable u^j_alpha; materialized on first use, cap enforced."""
        alpha = tuple(alpha)
        if not 1 <= j <= self.fiber_rank:
            raise InvariantViolationError(f"fiber index {j} out of range 1..{self.fiber_rank}")
        if len(alpha) != self.base_dim or any(a < 0 for a in alpha):
            raise InvariantViolationError(f"bad multi-index {alpha}")
        if multi_index_order(alpha) > self.jet_cap:
            raise CapOverflowError(
                f"jet order {multi_index_order(alpha)} exceeds cap {self.jet_cap}"
            )
        gid = self._jets.get((j, alpha))
        if gid is None:
            gid = self._materialize_jet(j, alpha)
        return gid

    def add_tower(self, name: str, hdeg: int) -> Tower:
        """Register an antifield tower (extended mode only)."""
        if not self.extended:
            raise InvariantViolationError("antifield towers need an extended-mode context")
        tower = Tower(len(self._towers), name, hdeg)
        self._towers.append(tower)
        return tower

    def tower_var(self, tower: Tower, alpha) -> int:
        alpha = tuple(alpha)
        if multi_index_order(alpha) > self.jet_cap:
            raise CapOverflowError(
                f"jet order {multi_index_order(alpha)} exceeds cap {self.jet_cap}"
            )
        key = (tower.tid, alpha)
        gid = self._tower_vars.get(key)
        if gid is None:
            gid = self.reg.add(f"{tower.name}{_suffix(alpha)}", tower.hdeg, gca.ANTIFIELD)
            self._tower_vars[key] = gid
            self._kind_of[gid] = ("tower", tower, alpha)
        return gid

    # -- queries -------------------------------------------------------------

    def gen_jet_order(self, gid: int) -> int:
        entry = self._kind_of.get(gid)
        if entry is None:
            return 0
        if entry[0] == "coord":
            return 0
        return multi_index_order(entry[-1])

    def gen_in_tower(self, gid: int) -> bool:
        entry = self._kind_of.get(gid)
        return entry is not None and entry[0] == "tower"

    def mono_jet_order(self, mono) -> int:
        return max((self.gen_jet_order(g) for g, _e in mono), default=0)

    def is_jet_poly(self, p: Poly, allow_antifields: bool | None = None) -> bool:
        """True when p only involves context generators (towers per mode)."""
        if allow_antifields is None:
            allow_antifields = self.extended
        for g in p.support_gens():
            entry = self._kind_of.get(g)
            if entry is None:
                return False
            if entry[0] == "tower" and not allow_antifields:
                return False
        return True

    def materialized_gens(self):
        """All context generators so far, ascending gid."""
        return sorted(self._kind_of)

    # -- total derivatives ---------------------------------------------------

    def _derivative_of_gen(self, gid: int, i: int) -> Poly:
        entry = self._kind_of.get(gid)
        if entry is None:
            raise InvariantViolationError(
                f"generator {self.reg.name(gid)} does not live in the jet algebra"
            )
        kind = entry[0]
        if kind == "coord":
            return Poly.one(self.reg) if entry[1] == i else Poly.zero(self.reg)
        if kind == "jet":
            _tag, j, alpha = entry
            raised = list(alpha)
            raised[i - 1] += 1
            return Poly.gen(self.reg, self.jet(j, raised))
        _tag, tower, alpha = entry
        raised = list(alpha)
        raised[i - 1] += 1
        return Poly.gen(self.reg, self.tower_var(tower, raised))

    def total_derivative(self, p: Poly, i: int) -> Poly:
        """Horizontal lift D_i = d/dx_i + sum u^j_{alpha+e_i} d/du^j_alpha
        (antifield analog included in extended mode).

        Degree-0, Leibniz, commuting; raises the jet order of each monomial
        by at most 1 and errors (never truncates) past the cap.
        """
        if not 1 <= i <= self.base_dim:
            raise InvariantViolationError(f"unknown direction {i}")
        if p.reg is not self.reg:
            raise InvariantViolationError("polynomial from a different registry")
        return gca._derive(self.reg, lambda g: self._derivative_of_gen(g, i), 0, p)

    def multi_derivative(self, p: Poly, alpha) -> Poly:
        out = p
        for i, a in enumerate(alpha, start=1):
            for _ in range(a):
                out = self.total_derivative(out, i)
        return out

    def prolong(self, P: Poly, ell: int):
        """All consequences D^alpha P, |alpha| <= ell, in graded-lex order.

        Returns a list of (alpha, Poly).  Total derivatives commute, so the
        factorization order does not matter.
        """
        if ell < 0:
            raise InvariantViolationError("prolongation order must be >= 0")
        if self.mono_max_order(P) + ell > self.jet_cap:
            raise CapOverflowError(
                f"prolongation to order {ell} would exceed jet cap {self.jet_cap}"
            )
        out = []
        for alpha in multi_indices(self.base_dim, ell):
            out.append((alpha, self.multi_derivative(P, alpha)))
        return out

    def mono_max_order(self, p: Poly) -> int:
        return max((self.mono_jet_order(m) for m in p.terms), default=0)

    # -- parsing help ---------------------------------------------------------

    def var_by_name(self, name: str) -> int | None:
        """Resolve x<i>, u<j> and u<j>_<letters> surface names."""
        if name.startswith("x") and name[1:].isdigit():
            i = int(name[1:])
            if 1 <= i <= self.base_dim:
                return self.coord(i)
            return None
        if not name.startswith("u"):
            return None
        body = name[1:]
        if "_" in body:
            head, _sep, tail = body.partition("_")
        else:
            head, tail = body, ""
        if not head.isdigit():
            return None
        j = int(head)
        if not 1 <= j <= self.fiber_rank:
            return None
        alpha = [0] * self.base_dim
        for ch in tail:
            pos = _DIR_LETTERS.find(ch)
            if pos < 0 or pos >= self.base_dim:
                raise KtforgeError(f"unknown direction {ch!r}")
            alpha[pos] += 1
        return self.jet(j, alpha)


def multi_indices(dim: int, max_order: int):
    """Multi-indices of order <= max_order in graded-lex order."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(tuple(prefix + [remaining]))
            return
        for a in range(remaining, -1, -1):
            rec(prefix + [a], remaining - a, slots - 1)

    for order in range(max_order + 1):
        rec([], order, dim)
    return out

"""Staged factorizations through lazily materialized generator families.

One :class:`Factorization` owns the whole generator bookkeeping for a
morphism phi: A -> B.  Generators are indexed by target-algebra elements
(structural equality of canonical payloads), so the functorial formulas
stay available while only the generators a computation touches are ever
created:

* disc pairs: d(I_b) = s^-1 I_b, both projecting onto b and d_B(b);
* cycle generators: d(I_beta) = 0, q(I_beta) = beta, one per cycle;
* Tate generators at stage k: d(I^k_{sigma,b}) = sigma, q(I^k_{sigma,b}) = b
  for critical pairs (sigma a cycle of stage k-1 whose image bounds b).

Scalar multiples of a payload index different generators; payloads are
stored in canonical polynomial form.

The windowed (non-functorial) pipeline materializes one generator per
homology class actually needed, processing candidates in canonical order
and skipping classes that earlier adjunctions already killed; the choice
is free in the non-functorial setting and this greedy selection keeps
windows closed and traces reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ktforge import gca, linalg
from ktforge.dga import DGAlgebra, DGMorphism, inclusion, trivial_algebra
from ktforge.errors import InvariantViolationError, NotACycleError
from ktforge.gca import Poly
from ktforge.homology import Window, WindowedComplex, target_adapter


def _payload_hash(*polys):
    text = repr(tuple(p.canonical_key() for p in polys))
    return hashlib.sha1(text.encode()).hexdigest()[:8]


@dataclass(frozen=True)
class LazyRec:
    kind: str
    stage: int
    hdeg: int
    payload: tuple  # payload polynomials, canonical


class Factorization:
    """Generator bookkeeping shared by the (i, p) and (j, q) factorizations."""

    def __init__(self, phi: DGMorphism):
        self.A = phi.source
        self.B = phi.target
        self.phi = phi
        self.reg = self.A.reg
        self._memo: dict = {}
        self._rec: dict[int, LazyRec] = {}
        self._diff: dict[int, Poly] = dict(self.A.diff)
        self._q: dict[int, Poly] = dict(phi.rule)
        self._order: list[int] = []
        self.max_stage = 0

    # -- internals -----------------------------------------------------------

    def _new_gen(self, key, name, kind, stage, hdeg, diff_img, q_img, payload):
        gid = self.reg.add(name, hdeg, kind, stage)
        self._memo[key] = gid
        self._rec[gid] = LazyRec(kind, stage, hdeg, payload)
        self._diff[gid] = diff_img
        self._q[gid] = q_img
        self._order.append(gid)
        return gid

    def _payload_degree(self, b: Poly, n, what: str) -> int:
        if n is None:
            n = b.hdeg()
            if n is None:
                raise InvariantViolationError(
                    f"{what}: explicit degree required for this payload"
                )
        elif not b.is_zero() and not b.is_homogeneous(n):
            raise InvariantViolationError(f"{what}: payload is not homogeneous of degree {n}")
        return n

    def apply_q(self, p: Poly) -> Poly:
        """The colimit morphism q on everything materialized so far."""
        treg = self.B.reg
        out = Poly.zero(treg)
        for mono, c in p.terms.items():
            term = Poly.scalar(treg, c)
            for g, e in mono:
                img = self._q.get(g)
                if img is None:
                    raise InvariantViolationError(
                        f"generator {self.reg.name(g)} has no q-rule"
                    )
                for _ in range(e):
                    term = term * img
                if term.is_zero():
                    break
            out = out + term
        return out

    def apply_d(self, p: Poly) -> Poly:
        return gca.apply_derivation(self._diff, -1, p, on_missing="error")

    # -- materialization -----------------------------------------------------

    def disc_bottom(self, b: Poly, n=None) -> int:
        """s^-1 I_b of degree n-1; requires hdeg(b) = n > 0."""
        n = self._payload_degree(b, n, "disc_bottom")
        if n <= 0:
            raise InvariantViolationError(
                "disc generators exist only over positive-degree elements"
            )
        key = (gca.DISC_BOTTOM, 0, n, b.canonical_key())
        gid = self._memo.get(key)
        if gid is None:
            gid = self._new_gen(
                key, f"sIb{n}@{_payload_hash(b)}", gca.DISC_BOTTOM, 0, n - 1,
                Poly.zero(self.reg), self.B.d(b), (b,),
            )
        return gid

    def disc_top(self, b: Poly, n=None) -> int:
        """I_b of degree n = hdeg(b) > 0 with d(I_b) = s^-1 I_b, q(I_b) = b."""
        n = self._payload_degree(b, n, "disc_top")
        if n <= 0:
            raise InvariantViolationError(
                "disc generators exist only over positive-degree elements"
            )
        key = (gca.DISC_TOP, 0, n, b.canonical_key())
        gid = self._memo.get(key)
        if gid is None:
            bottom = self.disc_bottom(b, n)
            gid = self._new_gen(
                key, f"Ib{n}@{_payload_hash(b)}", gca.DISC_TOP, 0, n,
                Poly.gen(self.reg, bottom), b, (b,),
            )
        return gid

    def cycle_gen(self, beta: Poly, n=None) -> int:
        """I_beta of degree n with d = 0, q = beta; beta must be a cycle."""
        n = self._payload_degree(beta, n, "cycle_gen")
        r = self.B.d(beta)
        if not self.B.eq(r, Poly.zero(self.B.reg)):
            raise NotACycleError("cycle generator over a non-cycle", residual=r)
        key = (gca.CYCLE_GEN, 0, n, beta.canonical_key())
        gid = self._memo.get(key)
        if gid is None:
            gid = self._new_gen(
                key, f"Ic{n}@{_payload_hash(beta)}", gca.CYCLE_GEN, 0, n,
                Poly.zero(self.reg), beta, (beta,),
            )
        return gid

    def tate_gen(self, k: int, sigma: Poly, b: Poly, n=None) -> int:
        """I^k_{sigma,b} of degree n+1: d = sigma, q = b.

        Requires stage k >= 1 active, sigma a cycle of stage k-1 and
        d_B(b) = q_{k-1}(sigma); violations carry the residual.
        """
        if not 1 <= k <= self.max_stage:
            raise InvariantViolationError(
                f"stage {k} is not active (max {self.max_stage})"
            )
        n = self._payload_degree(sigma, n, "tate_gen")
        allowed = self.A.gen_set
        for g in sigma.support_gens():
            if g in allowed:
                continue
            rec = self._rec.get(g)
            if rec is None or rec.stage > k - 1:
                raise InvariantViolationError(
                    f"sigma leaves stage {k - 1}: generator "
                    f"{self.reg.name(g)}"
                )
        r = self.apply_d(sigma)
        if not r.is_zero():
            raise NotACycleError("tate generator over a non-cycle", residual=r)
        lhs = self.B.d(b)
        rhs = self.apply_q(sigma)
        if not self.B.eq(lhs, rhs):
            raise InvariantViolationError(
                "critical pair violated: d_B(b) != q(sigma)",
                residual=lhs - rhs,
            )
        key = (gca.TATE_GEN, k, n, (sigma.canonical_key(), b.canonical_key()))
        gid = self._memo.get(key)
        if gid is None:
            gid = self._new_gen(
                key, f"I{k}d{n + 1}@{_payload_hash(sigma, b)}", gca.TATE_GEN,
                k, n + 1, sigma, b, (sigma, b),
            )
        return gid

    def record(self, gid: int) -> LazyRec:
        return self._rec[gid]

    # -- stage views ----------------------------------------------------------

    def _view_gens(self, k: int, kinds=None):
        sel = [
            g
            for g in self._order
            if self._rec[g].stage <= k
            and (kinds is None or self._rec[g].kind in kinds)
        ]
        return tuple(sorted(sel, key=self.reg.well_order_key))

    def stage(self, k: int) -> "FactorizationStage":
        if k > self.max_stage:
            raise InvariantViolationError(f"stage {k} not built yet")
        return FactorizationStage(self, k)

    def open_stage(self, k: int):
        if k != self.max_stage + 1:
            raise InvariantViolationError("stages are opened sequentially")
        self.max_stage = k


class FactorizationStage:
    """Immutable snapshot view R_k with its structure maps."""

    def __init__(self, fact: Factorization, k: int, kinds=None):
        self.fact = fact
        self.k = k
        self._kinds = kinds
        self.vgens = fact._view_gens(k, kinds)

    def algebra(self) -> DGAlgebra:
        fact = self.fact
        table = fact.A.gens + self.vgens
        diff = {g: fact._diff[g] for g in table}
        return DGAlgebra(fact.reg, table, diff, base=fact.A, jet=fact.A.jet)

    def q(self) -> DGMorphism:
        fact = self.fact
        alg = self.algebra()
        rule = {g: fact._q[g] for g in alg.gens}
        return DGMorphism(alg, fact.B, rule, validate=False)

    def j(self) -> DGMorphism:
        return inclusion(self.fact.A, self.algebra())


@dataclass
class TrivCofFib:
    """The (i, p) factorization A >-> A (x) SU ->> B through disc pairs."""

    fact: Factorization
    i: DGMorphism
    mid: DGAlgebra
    p: DGMorphism

    def refresh(self):
        """Re-snapshot after materializing more disc generators."""
        stage = FactorizationStage(self.fact, 0, kinds={gca.DISC_TOP, gca.DISC_BOTTOM})
        self.mid = stage.algebra()
        self.i = inclusion(self.fact.A, self.mid)
        rule = {g: self.fact._q[g] for g in self.mid.gens}
        self.p = DGMorphism(self.mid, self.fact.B, rule, validate=False)
        return self


def build_trivcof_fib(phi: DGMorphism) -> TrivCofFib:
    """Disc-generator factorization: p(I_b) = b, p(s^-1 I_b) = d_B(b);
    i is a split minimal extension on every materialized sub-stage."""
    fact = Factorization(phi)
    out = TrivCofFib(fact, None, None, None)
    return out.refresh()


def build_stage0(phi: DGMorphism) -> FactorizationStage:
    """Stage 0 of the (j, q) factorization: discs plus cycle generators
    (d kills I_beta, q projects it onto beta)."""
    fact = Factorization(phi)
    return fact.stage(0)


def tate_stage(prev: FactorizationStage, mode: str = "functorial_lazy",
               window: Window | None = None) -> FactorizationStage:
    """Open stage k = prev.k + 1.

    functorial_lazy: no materialization; generators appear on demand for any
    valid critical pair.  nonfunctorial_window: pick finitely many pairs out
    of the windowed kernel of H(q_{k-1}), one generator per class that is
    not already killed, in canonical order.
    """
    fact = prev.fact
    k = prev.k + 1
    fact.open_stage(k)
    if mode == "functorial_lazy":
        return fact.stage(k)
    if mode != "nonfunctorial_window":
        raise InvariantViolationError(f"unknown tate mode {mode!r}")
    if window is None:
        raise InvariantViolationError("nonfunctorial_window requires a window")
    _materialize_tate_stage(fact, k, window)
    return fact.stage(k)


def _materialize_tate_stage(fact: Factorization, k: int, w: Window):
    """Greedy windowed stage fill; returns the adjoined generator ids."""
    from ktforge.homology import relative_critical_cycles

    prev = fact.stage(k - 1)
    alg_prev = prev.algebra()
    q_prev = prev.q()
    added = []
    for n in range(w.hdeg_max + 1):
        pairs = relative_critical_cycles(alg_prev, q_prev, n, w)
        for sigma, b in pairs:
            cur = WindowedComplex(fact.stage(k).algebra(), w)
            if cur.is_boundary(sigma) is not None:
                continue
            added.append(fact.tate_gen(k, sigma, b, n))
    return added


# -- functoriality -------------------------------------------------------------


class Omega:
    """The comparison morphism omega_k: R_k -> R'_k over a commuting square.

    Disc and cycle generators map by pushing the payload through v; Tate
    generators map recursively: I^k_{sigma,b} -> I^k_{omega(sigma), v(b)}.
    Images materialize in the target factorization on demand.
    """

    def __init__(self, u: DGMorphism, v: DGMorphism, src: Factorization,
                 dst: Factorization, depth: int):
        for g in u.source.gens:
            lhs = v(src.phi.rule[g])
            rhs = dst.phi(u.rule[g])
            if not dst.B.eq(lhs, rhs):
                raise InvariantViolationError(
                    "input square does not commute",
                    residual=lhs - rhs,
                )
        self.u = u
        self.v = v
        self.src = src
        self.dst = dst
        self.depth = depth
        while dst.max_stage < depth:
            dst.open_stage(dst.max_stage + 1)
        self.rule: dict[int, Poly] = {}

    @property
    def source(self):
        return self.src.stage(self.depth).algebra()

    @property
    def target(self):
        return self.dst.stage(self.depth).algebra()

    def gen_image(self, gid: int) -> Poly:
        img = self.rule.get(gid)
        if img is not None:
            return img
        if gid in self.u.source.gen_set:
            img = self.u.rule[gid]
        else:
            rec = self.src.record(gid)
            if rec.kind == gca.DISC_BOTTOM:
                (b,) = rec.payload
                img = Poly.gen(self.dst.reg, self.dst.disc_bottom(self.v(b), rec.hdeg + 1))
            elif rec.kind == gca.DISC_TOP:
                (b,) = rec.payload
                img = Poly.gen(self.dst.reg, self.dst.disc_top(self.v(b), rec.hdeg))
            elif rec.kind == gca.CYCLE_GEN:
                (beta,) = rec.payload
                img = Poly.gen(self.dst.reg, self.dst.cycle_gen(self.v(beta), rec.hdeg))
            elif rec.kind == gca.TATE_GEN:
                sigma, b = rec.payload
                img = Poly.gen(
                    self.dst.reg,
                    self.dst.tate_gen(rec.stage, self(sigma), self.v(b), rec.hdeg - 1),
                )
            else:
                raise InvariantViolationError(f"unexpected kind {rec.kind}")
        self.rule[gid] = img
        return img

    def __call__(self, p: Poly) -> Poly:
        treg = self.dst.reg
        out = Poly.zero(treg)
        for mono, c in p.terms.items():
            term = Poly.scalar(treg, c)
            for g, e in mono:
                img = self.gen_image(g)
                for _ in range(e):
                    term = term * img
                if term.is_zero():
                    break
            out = out + term
        return out


def omega(u: DGMorphism, v: DGMorphism, src: Factorization, dst: Factorization,
          depth: int) -> Omega:
    """Functoriality morphism for the staged factorization; verifies the
    input square commutes and returns the lazily materializing omega_k."""
    return Omega(u, v, src, dst, depth)


def fibrant_replacement(A: DGAlgebra):
    """Identity replacement: every object is fibrant.

    Factoring A -> 0 through the disc construction adjoins one disc pair per
    nonzero positive-degree element of the zero algebra; there are none, so
    the middle term is A (x) S(0) = A and the replacement is the identity.
    """
    return A, DGMorphism.identity(A)


# -- windowed cofibrant replacement --------------------------------------------


@dataclass
class StageRecord:
    k: int
    gens_by_degree: dict
    hom_ranks: list
    adjoined: list = field(default_factory=list)  # (name, hdeg, sigma, b)


@dataclass
class ResolutionTrace:
    window: Window
    target_ranks: list
    stages: list
    status: str = "unresolved"
    final: FactorizationStage | None = None

    def to_text(self) -> str:
        w = self.window
        jet = w.jet_cap if w.jet_cap is not None else "-"
        lines = [
            "ktforge-trace/1",
            f"status {self.status}",
            f"window hdeg_max={w.hdeg_max} poly_deg_cap={w.poly_deg_cap} jet_cap={jet}",
            "target-ranks " + " ".join(str(r) for r in self.target_ranks),
        ]
        for st in self.stages:
            lines.append(f"stage {st.k}")
            if st.gens_by_degree:
                parts = " ".join(
                    f"{d}:{c}" for d, c in sorted(st.gens_by_degree.items())
                )
                lines.append(f"gens {parts}")
            else:
                lines.append("gens -")
            lines.append("ranks " + " ".join(str(r) for r in st.hom_ranks))
            for name, hdeg, sigma, b in st.adjoined:
                lines.append(
                    f"adjoin {name} deg={hdeg} sigma={sigma.format()} b={b.format()}"
                )
        lines.append("end")
        return "\n".join(lines) + "\n"


def _stage_census(fact: Factorization, k: int):
    counts: dict[int, int] = {}
    for g in fact._view_gens(k):
        d = fact.reg.hdeg(g)
        counts[d] = counts.get(d, 0) + 1
    return counts


def _hom_ranks(stage: FactorizationStage, w: Window):
    cx = WindowedComplex(stage.algebra(), w)
    return [cx.homology_rank(n) for n in range(w.hdeg_max + 1)]


def _is_window_iso(stage: FactorizationStage, w: Window, tgt) -> bool:
    alg = stage.algebra()
    q = stage.q()
    cx = WindowedComplex(alg, w)
    for n in range(w.hdeg_max + 1):
        reps = cx.representatives(n)
        hom_dim = tgt.hom_rank(n)
        rows = []
        for r in reps:
            c = tgt.class_coords(q(r), n)
            if c is None:
                return False
            rows.append(list(c))
        rk = linalg.rank(rows, hom_dim) if rows and hom_dim else 0
        if rk < hom_dim or rk < len(reps):
            return False
    return True


def _fill_stage0_surjectivity(fact: Factorization, w: Window, tgt):
    """Cycle generators for target classes outside the image of H(q_0),
    one at a time in canonical order, re-examining after each adjunction."""
    for n in range(w.hdeg_max + 1):
        reps_b = tgt.hom_basis(n)
        if not reps_b:
            continue
        hom_dim = len(reps_b)
        while True:
            stage = fact.stage(0)
            cx = WindowedComplex(stage.algebra(), w)
            q = stage.q()
            rows = []
            for r in cx.representatives(n):
                c = tgt.class_coords(q(r), n)
                if c is not None:
                    rows.append(list(c))
            have = linalg.rank(rows, hom_dim) if rows else 0
            missing = None
            for jdx in range(hom_dim):
                unit = [0] * hom_dim
                unit[jdx] = 1
                if linalg.rank(rows + [unit], hom_dim) > have:
                    missing = jdx
                    break
            if missing is None:
                break
            fact.cycle_gen(reps_b[missing], n)


def _adjoined_records(fact: Factorization, k: int):
    out = []
    for g in fact._order:
        rec = fact.record(g)
        if rec.stage != k:
            continue
        if rec.kind == gca.TATE_GEN:
            sigma, b = rec.payload
        elif rec.kind == gca.CYCLE_GEN:
            sigma, b = rec.payload[0], Poly.zero(fact.B.reg)
        else:
            continue  # disc pairs are padding, not adjunction data
        out.append((fact.reg.name(g), fact.reg.hdeg(g), sigma, b))
    return out


def resolve_weq(phi: DGMorphism, w: Window, max_stages: int,
                seed=None) -> ResolutionTrace:
    """Windowed (j, q) factorization driven until H(q) is a window iso.

    Stage 0 adjoins cycle generators for target classes outside the image of
    H(phi); stages k >= 1 adjoin Tate generators for the windowed kernel of
    H(q_{k-1}).  A ``seed`` callback may pre-open stages and materialize
    generators (antifield towers from a Koszul-Tate seed, say) before the
    loop; the greedy fill then only adds what homology still demands.  The
    trace certifies windowed ranks only, never anything beyond the window.
    """
    fact = Factorization(phi)
    tgt = target_adapter(phi.target, w)
    target_ranks = [tgt.hom_rank(n) for n in range(w.hdeg_max + 1)]
    trace = ResolutionTrace(w, target_ranks, [])

    if seed is not None:
        seed(fact)
    _fill_stage0_surjectivity(fact, w, tgt)

    stage = fact.stage(0)
    trace.stages.append(
        StageRecord(0, _stage_census(fact, 0), _hom_ranks(stage, w),
                    _adjoined_records(fact, 0))
    )
    trace.final = stage
    if fact.max_stage == 0 and _is_window_iso(stage, w, tgt):
        trace.status = "resolved"
        return trace

    top = max(max_stages, fact.max_stage)
    for k in range(1, top + 1):
        if k > fact.max_stage:
            fact.open_stage(k)
        _materialize_tate_stage(fact, k, w)
        stage = fact.stage(k)
        trace.stages.append(
            StageRecord(k, _stage_census(fact, k), _hom_ranks(stage, w),
                        _adjoined_records(fact, k))
        )
        trace.final = stage
        if _is_window_iso(stage, w, tgt):
            trace.status = "resolved"
            return trace
    trace.status = "unresolved in window"
    return trace


def cofibrant_replacement(B, w: Window, max_stages: int, base: DGAlgebra | None = None,
                          phi: DGMorphism | None = None) -> ResolutionTrace:
    """Cofibrant replacement of B driven inside the window.

    With no base the construction runs from the ground field (the initial
    object); the undercategory version passes the base algebra (then phi
    defaults to the identity-on-generators projection, which must make
    sense: B's elements live in the base registry).
    """
    if phi is None:
        if base is None:
            base = trivial_algebra()
            phi = DGMorphism(base, B, {})
        else:
            phi = DGMorphism(
                base, B, {g: Poly.gen(B.reg, g) for g in base.gens}, validate=False
            )
    return resolve_weq(phi, w, max_stages)

"""Configuration ingestion, run orchestration and reporting.

Config files are line-oriented ``key = value`` text (``#`` starts a
comment); ``equation`` and ``noether`` may repeat.  Polynomial surface
syntax: identifiers ``x1..xp``, ``u<j>`` with derivative suffixes
(``u1_xx``), integer or rational literals (``3``, ``1/2``) and the
operators ``+ - * ^`` with parentheses.  Noether operator expressions
combine coefficient polynomials with ``D<letters> F<i>`` factors, e.g.
``Dx F1 - F2``.

Exit codes: 0 resolved/ok, 2 unresolved in window, 3 configuration error,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from ktforge import gca
from ktforge.dga import check_structure
from ktforge.errors import ConfigError, KtforgeError
from ktforge.factorize import cofibrant_replacement
from ktforge.gca import GenRegistry, Poly
from ktforge.homology import Window, WindowedComplex, export_sparse_matrix
from ktforge.jet import JetContext
from ktforge.tate import (
    NoetherOperator,
    PDESystem,
    QuotientWindow,
    build_koszul,
    kt_complex,
    noether_identities,
    resolve_onshell,
)

PIPELINES = ("koszul", "noether", "kt", "resolve", "factorize-demo", "homology")

_INT_KEYS = (
    "base_dim",
    "fiber_rank",
    "jet_cap",
    "poly_deg_cap",
    "hdeg_max",
    "max_stages",
    "noether_order_cap",
    "noether_deg_cap",
)


@dataclass(frozen=True)
class RunConfig:
    pipeline: str
    base_dim: int = 1
    fiber_rank: int = 1
    jet_cap: int = 3
    poly_deg_cap: int = 2
    hdeg_max: int = 2
    max_stages: int = 6
    noether_order_cap: int = 1
    noether_deg_cap: int = 0
    equations: tuple = ()
    noether: tuple = ()
    format: str = "human"
    out: str | None = None

    def window(self) -> Window:
        return Window(self.hdeg_max, self.poly_deg_cap, self.jet_cap)


# -- polynomial expression parsing ----------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text, line=None):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ConfigError(f"unexpected character {rest[0]!r}", line, pos + 1)
        if m.lastgroup is not None:
            out.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup) + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _ExprParser:
    """Recursive-descent parser producing Poly values over a jet context."""

    def __init__(self, tokens, ctx: JetContext, line=None, resolve=None):
        self.toks = tokens
        self.i = 0
        self.ctx = ctx
        self.line = line
        self.resolve = resolve or self._resolve_var

    def _resolve_var(self, name, col):
        try:
            gid = self.ctx.var_by_name(name)
        except KtforgeError as exc:
            raise ConfigError(str(exc), self.line, col) from None
        if gid is None:
            raise ConfigError(f"unknown variable {name!r}", self.line, col)
        return Poly.gen(self.ctx.reg, gid)

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ConfigError(f"expected {kind}, got {tok[1]!r}", self.line, tok[2])
        if value is not None and tok[1] != value:
            raise ConfigError(f"expected {value!r}, got {tok[1]!r}", self.line, tok[2])
        self.i += 1
        return tok

    def parse(self) -> Poly:
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ConfigError(f"trailing input {tok[1]!r}", self.line, tok[2])
        return p

    def expr(self) -> Poly:
        if self.peek()[1] == "-":
            self.take()
            acc = -self.term()
        else:
            acc = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Poly:
        acc = self.factor()
        while self.peek()[1] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> Poly:
        if self.peek()[1] == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take("num")
            if "/" in tok[1]:
                raise ConfigError("exponent must be an integer", self.line, tok[2])
            return base ** int(tok[1])
        return base

    def atom(self) -> Poly:
        kind, value, col = self.peek()
        if kind == "num":
            self.take()
            return Poly.scalar(self.ctx.reg, Fraction(value))
        if kind == "ident":
            self.take()
            return self.resolve(value, col)
        if value == "(":
            self.take()
            p = self.expr()
            self.take(value=")")
            return p
        raise ConfigError(f"expected a value, got {value!r}", self.line, col)


def parse_poly(text: str, ctx: JetContext, line=None) -> Poly:
    return _ExprParser(_tokenize(text, line), ctx, line).parse()


_DTOK = re.compile(r"D([xyzw]+)$")
_FTOK = re.compile(r"F(\d+)$")


def parse_noether(text: str, ctx: JetContext, n_eqs: int, line=None) -> NoetherOperator:
    """Operator expressions: sum of terms ``[coeff *] [D<letters>] F<i>``."""
    toks = _tokenize(text, line)
    per_eq = [dict() for _ in range(n_eqs)]
    i = 0
    sign = 1
    first = True

    def flush(term_toks, sign, col):
        coeff_toks = []
        alpha = [0] * ctx.base_dim
        eq_index = None
        j = 0
        while j < len(term_toks):
            kind, value, tcol = term_toks[j]
            m_f = _FTOK.match(value) if kind == "ident" else None
            m_d = _DTOK.match(value) if kind == "ident" else None
            if m_f:
                if eq_index is not None:
                    raise ConfigError("two equation labels in one term", line, tcol)
                eq_index = int(m_f.group(1)) - 1
                if not 0 <= eq_index < n_eqs:
                    raise ConfigError(f"no equation {value}", line, tcol)
            elif m_d and j + 1 < len(term_toks) and _FTOK.match(term_toks[j + 1][1] or ""):
                for ch in m_d.group(1):
                    k = "xyzw".find(ch)
                    if k < 0 or k >= ctx.base_dim:
                        raise ConfigError(f"unknown direction {ch!r}", line, tcol)
                    alpha[k] += 1
            else:
                coeff_toks.append(term_toks[j])
            j += 1
        if eq_index is None:
            raise ConfigError("term without an equation label F<i>", line, col)
        if coeff_toks:
            coeff_toks = [t for t in coeff_toks if t[1] != "*"]
            rebuilt = []
            for idx, t in enumerate(coeff_toks):
                if idx:
                    rebuilt.append(("op", "*", t[2]))
                rebuilt.append(t)
            rebuilt.append(("end", "", col))
            coeff = _ExprParser(rebuilt, ctx, line).parse()
        else:
            coeff = Poly.one(ctx.reg)
        key = tuple(alpha)
        cur = per_eq[eq_index].get(key, Poly.zero(ctx.reg))
        per_eq[eq_index][key] = cur + coeff * sign

    term = []
    col0 = 1
    while i < len(toks):
        kind, value, col = toks[i]
        if kind == "end" or (kind == "op" and value in "+-" and (term or not first)):
            if term:
                flush(term, sign, col0)
                term = []
            if kind == "end":
                break
            sign = 1 if value == "+" else -1
            col0 = col
        elif kind == "op" and value == "-" and first:
            sign = -sign
        else:
            term.append(toks[i])
        first = False
        i += 1
    per_eq = [
        {a: p for a, p in table.items() if not p.is_zero()} for table in per_eq
    ]
    return NoetherOperator(tuple(per_eq))


# -- config ----------------------------------------------------------------------


def parse_config(text: str, pipeline: str | None = None) -> RunConfig:
    """Parse and validate a config; collects positioned errors."""
    values: dict = {}
    equations = []
    noether = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, 1)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            value = value[1:-1]
        if key == "equation":
            equations.append((lineno, value))
        elif key == "noether":
            noether.append((lineno, value))
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer", lineno, 1) from None
        elif key == "pipeline":
            values["pipeline"] = value
        elif key == "format":
            if value not in ("human", "machine"):
                raise ConfigError("format must be human or machine", lineno, 1)
            values["format"] = value
        elif key == "out":
            values["out"] = value
        else:
            raise ConfigError(f"unknown key {key!r}", lineno, 1)
    if pipeline is not None:
        values["pipeline"] = pipeline
    if "pipeline" not in values:
        raise ConfigError("no pipeline selected")
    if values["pipeline"] not in PIPELINES:
        raise ConfigError(f"unknown pipeline {values['pipeline']!r}")
    cfg = RunConfig(
        equations=tuple(v for _l, v in equations),
        noether=tuple(v for _l, v in noether),
        **values,
    )
    for k in _INT_KEYS:
        if getattr(cfg, k) < 0 or (k in ("base_dim", "fiber_rank") and getattr(cfg, k) < 1):
            raise ConfigError(f"{k} out of range")
    # semantic validation of the polynomial surface syntax
    ctx = JetContext(cfg.base_dim, cfg.fiber_rank, cfg.jet_cap)
    eq_polys = []
    for lineno, src in equations:
        p = parse_poly(src, ctx, lineno)
        if not p.is_homogeneous(0):
            raise ConfigError("equation is not of homological degree 0", lineno)
        eq_polys.append(p)
    for lineno, src in noether:
        parse_noether(src, ctx, len(eq_polys), lineno)
    return cfg


def format_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(format(cfg)) == cfg."""
    lines = [f"pipeline = {cfg.pipeline}"]
    for k in _INT_KEYS:
        lines.append(f"{k} = {getattr(cfg, k)}")
    for eq in cfg.equations:
        lines.append(f'equation = "{eq}"')
    for op in cfg.noether:
        lines.append(f'noether = "{op}"')
    lines.append(f"format = {cfg.format}")
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"


# -- pipelines ---------------------------------------------------------------------


@dataclass
class RunResult:
    text: str
    code: int = 0


def _build_system(cfg: RunConfig, extended: bool) -> PDESystem:
    ctx = JetContext(cfg.base_dim, cfg.fiber_rank, cfg.jet_cap, extended=extended)
    eqs = [parse_poly(src, ctx) for src in cfg.equations]
    return PDESystem(ctx, eqs)


def _noether_ops(cfg: RunConfig, sys_: PDESystem):
    if cfg.noether:
        return [
            parse_noether(src, sys_.ctx, len(sys_.equations)) for src in cfg.noether
        ]
    return noether_identities(sys_, cfg.noether_order_cap, cfg.noether_deg_cap)


def _homology_text(alg, w: Window, fmt: str, dump_dir=None) -> str:
    cx = WindowedComplex(alg, w)
    lines = []
    if fmt == "machine":
        jet = w.jet_cap if w.jet_cap is not None else "-"
        lines.append("ktforge-homology/1")
        lines.append(
            f"window hdeg_max={w.hdeg_max} poly_deg_cap={w.poly_deg_cap} jet_cap={jet}"
        )
        for n in range(w.hdeg_max + 1):
            lines.append(f"degree {n} rank {cx.homology_rank(n)}")
            for rep in cx.representatives(n):
                lines.append(f"rep {rep.format()}")
        lines.append("end")
    else:
        for n in range(w.hdeg_max + 1):
            lines.append(f"H_{n} rank {cx.homology_rank(n)}")
    if dump_dir is not None:
        dump = Path(dump_dir)
        dump.mkdir(parents=True, exist_ok=True)
        for n in range(w.hdeg_max + 2):
            mat = cx.matrix(n)
            (dump / f"boundary_{n}.txt").write_text(export_sparse_matrix(mat))
        lines.append(f"matrices dumped to {dump}")
    return "\n".join(lines) + "\n"


def _trace_text(trace, fmt: str) -> str:
    if fmt == "machine":
        return trace.to_text()
    lines = ["stage  gens(deg:count)  ranks  adjoined"]
    for st in trace.stages:
        gens = (
            " ".join(f"{d}:{c}" for d, c in sorted(st.gens_by_degree.items()))
            or "-"
        )
        ranks = " ".join(str(r) for r in st.hom_ranks)
        lines.append(f"{st.k}      {gens}  [{ranks}]  {len(st.adjoined)}")
    lines.append(f"target ranks: {' '.join(str(r) for r in trace.target_ranks)}")
    lines.append(f"status: {trace.status}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, dump_matrices=None) -> RunResult:
    """Execute the selected pipeline deterministically."""
    w = cfg.window()
    if cfg.pipeline == "koszul":
        alg = build_koszul(cfg.base_dim)
        return RunResult(_homology_text(alg, Window(cfg.hdeg_max, cfg.poly_deg_cap),
                                        cfg.format, dump_matrices))
    if cfg.pipeline == "noether":
        sys_ = _build_system(cfg, extended=False)
        ops = _noether_ops(cfg, sys_)
        lines = [f"identities {len(ops)}"]
        for op in ops:
            lines.append(op.format(sys_.ctx))
        return RunResult("\n".join(lines) + "\n")
    if cfg.pipeline in ("kt", "homology"):
        sys_ = _build_system(cfg, extended=True)
        ops = _noether_ops(cfg, sys_)
        alg = kt_complex(sys_, ops)
        header = f"kt generators {len(alg.gens)} noether {len(ops)}\n"
        body = _homology_text(alg, w, cfg.format, dump_matrices)
        if cfg.format == "machine":
            return RunResult(body)
        return RunResult(header + body)
    if cfg.pipeline == "resolve":
        extended = bool(cfg.noether)
        sys_ = _build_system(cfg, extended=extended)
        ops = _noether_ops(cfg, sys_) if cfg.noether else None
        trace = resolve_onshell(sys_, w, cfg.max_stages, noether=ops)
        code = 0 if trace.status == "resolved" else 2
        return RunResult(_trace_text(trace, cfg.format), code)
    if cfg.pipeline == "factorize-demo":
        return _factorize_demo(cfg)
    raise ConfigError(f"unknown pipeline {cfg.pipeline!r}")


def _factorize_demo(cfg: RunConfig) -> RunResult:
    """Deterministic walkthrough of the staged factorization on the line."""
    from ktforge.dga import DGAlgebra

    reg = GenRegistry()
    x = reg.add("x", 0, gca.BASE_COORD)
    A = DGAlgebra(reg, (x,), {x: Poly.zero(reg)})
    w = Window(max(cfg.hdeg_max, 2), max(cfg.poly_deg_cap, 3))
    B = QuotientWindow(A, [Poly.gen(reg, x)], w)
    trace = cofibrant_replacement(B, w, cfg.max_stages, base=A)
    stage = trace.final
    alg = stage.algebra()
    rep = check_structure(alg)
    q = stage.q()
    lines = [
        "factorization demo: resolving O(x = 0) over Q[x]",
        f"status {trace.status} after {len(trace.stages)} stages",
        f"check_structure: d2=0 {rep.d_squared_zero} lowering {rep.lowering} "
        f"minimal {rep.minimal} split {rep.split}",
    ]
    for g in alg.gens:
        if g in A.gen_set:
            continue
        lines.append(
            f"generator {reg.name(g)} deg {reg.hdeg(g)} "
            f"d -> {alg.d_gen(g).format()} q -> {q.rule[g].format()}"
        )
    ok = trace.status == "resolved" and rep.d_squared_zero
    return RunResult("\n".join(lines) + "\n", 0 if ok else 2)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ktforge",
        description="exact staged resolutions of on-shell function algebras",
    )
    parser.add_argument("pipeline", choices=PIPELINES)
    parser.add_argument("--config", required=True, help="path to the run config")
    parser.add_argument("--jet-cap", type=int, dest="jet_cap")
    parser.add_argument("--deg-cap", type=int, dest="poly_deg_cap")
    parser.add_argument("--hdeg-max", type=int, dest="hdeg_max")
    parser.add_argument("--max-stages", type=int, dest="max_stages")
    parser.add_argument("--format", choices=("human", "machine"))
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--dump-matrices", help="directory for sparse matrix export")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    try:
        cfg = parse_config(text, pipeline=args.pipeline)
        overrides = {
            k: getattr(args, k)
            for k in ("jet_cap", "poly_deg_cap", "hdeg_max", "max_stages", "format", "out")
            if getattr(args, k) is not None
        }
        if overrides:
            cfg = replace(cfg, **overrides)
        result = run(cfg, dump_matrices=args.dump_matrices)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except KtforgeError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    if cfg.out:
        Path(cfg.out).write_text(result.text, encoding="utf-8")
    else:
        sys.stdout.write(result.text)
    return result.code


if __name__ == "__main__":
    sys.exit(main())

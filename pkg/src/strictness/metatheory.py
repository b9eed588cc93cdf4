"""Random well-typed programs and executable checks of the metatheorems.

Generation is type directed. A goal type and a lower bound on the effect
are chosen first and terms are built backwards through the rules. Strict
requirements are met by touching the variable up front; exact vectors (thunk
annotations, lambda attributes, CBN argument effects) come from building a
term whose effect is at least the target and lowering it with a subsumption.
Every random construction is checked as it is built; when it misses its goal
the generator falls back to a minimal term of the goal type.
"""

from __future__ import annotations

import dataclasses
import random
import typing
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from strictness import cbn, cbpv
from strictness.attrs import (
    Attr,
    AttrVec,
    Mode,
    VarId,
    attr_leq,
    default_attr,
    legal_attrs,
    vec_downshift,
    vec_leq,
    vec_plus,
    vec_restrict,
)
from strictness.errors import CheckError, GenerationExhausted, ScopeMismatch, StrictnessError
from strictness.evaluation import (
    TLam,
    TRet,
    Success,
    apply_closure,
    drop_binding,
    env_variants,
    eq_mod_gamma,
    eval_comp,
    eval_value,
    semantic_fails,
)
from strictness.program import (
    Checked,
    build_env,
    check_program,
    lower,
    replace_at,
    sites,
    with_unused,
)
from strictness.syntax import Decl, Program, show_program
from strictness.translate import translate_type

FORMS = ("var", "intro", "let", "seq", "split", "case", "force", "app", "sub")

DEFAULT_WEIGHTS = {
    "var": 3.0,
    "intro": 3.0,
    "let": 2.0,
    "seq": 1.0,
    "split": 1.0,
    "case": 1.5,
    "force": 1.5,
    "app": 1.5,
    "sub": 1.0,
}


@dataclass
class GenConfig:
    seed: int = 0
    max_depth: int = 6
    max_scope: int = 3
    mode: Mode = Mode.BASE
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    returner: bool = False  # main gets a returner type (a non-arrow type in CBN)
    type_depth: int = 2
    decl_depth: int = 3

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.max_scope < 0:
            raise ValueError("max_scope must be nonnegative")
        if any(w < 0 for w in self.weights.values()) or not any(self.weights.values()):
            raise ValueError("weights must be nonnegative and not all zero")
        unknown = set(self.weights) - set(FORMS)
        if unknown:
            raise ValueError(f"unknown syntax forms in weights: {sorted(unknown)}")


class _Fail(Exception):
    """A random construction missed its goal; the caller falls back."""


RECOVERABLE = (_Fail, CheckError, ScopeMismatch)


def _bottom(scope) -> AttrVec:
    return AttrVec(tuple(scope), (Attr.Q,) * len(scope))


def _extend(g: AttrVec, x: VarId, a: Attr = Attr.Q) -> AttrVec:
    return AttrVec(g.scope + (x,), g.attrs + (a,))


def _exact(term, have: AttrVec, want: AttrVec, sub):
    return term if have == want else sub(want, term)


def _support(g: AttrVec) -> set:
    return {x for x, a in g.items() if a is not Attr.U}


class _Gen:
    """Shared randomness helpers."""

    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.mode = cfg.mode
        self.ext = cfg.mode is Mode.EXTENDED
        self.n = 0

    def fresh(self, prefix: str) -> VarId:
        self.n += 1
        return VarId(f"{prefix}{self.n}")

    def pick(self, forms):
        ws = [(f, self.cfg.weights.get(f, 0.0)) for f in forms]
        ws = [(f, w) for f, w in ws if w > 0]
        if not ws:
            return None
        r = self.rng.random() * sum(w for _, w in ws)
        for f, w in ws:
            r -= w
            if r < 0:
                return f
        return ws[-1][0]

    def chance(self, form: str, p: float) -> bool:
        return self.cfg.weights.get(form, 0.0) > 0 and self.rng.random() < p

    def rattr(self, non_u: bool = False) -> Attr:
        attrs = [a for a in legal_attrs(self.mode) if not (non_u and a is Attr.U)]
        return self.rng.choice(attrs)

    def rvec(self, scope, must=(), avoid_u=()) -> AttrVec:
        """A random vector; variables in `must` (extended mode) are never U."""
        d = default_attr(self.mode)
        attrs = []
        for x in scope:
            a = d if self.rng.random() < 0.5 else self.rattr()
            if self.ext and a is Attr.U and (x in must or x in avoid_u):
                a = self.rattr(non_u=True)
            attrs.append(a)
        return AttrVec(tuple(scope), tuple(attrs))

    def between(self, lo: AttrVec, hi: AttrVec) -> AttrVec:
        attrs = []
        for x in lo.scope:
            opts = [a for a in legal_attrs(self.mode) if attr_leq(lo[x], a, self.mode) and attr_leq(a, hi[x], self.mode)]
            attrs.append(self.rng.choice(opts))
        return AttrVec(lo.scope, tuple(attrs))

    def meet(self, g1: AttrVec, g2: AttrVec) -> AttrVec:
        """Pointwise greatest lower bound."""
        mode = self.mode
        attrs = []
        for a, b in zip(g1.attrs, g2.attrs):
            lower = [c for c in legal_attrs(mode) if attr_leq(c, a, mode) and attr_leq(c, b, mode)]
            top = [c for c in lower if all(attr_leq(o, c, mode) for o in lower)]
            attrs.append(top[0])
        return AttrVec(g1.scope, tuple(attrs))

    def main_req(self, scope, mentioned: set) -> AttrVec:
        attrs = []
        for x in scope:
            r = self.rng.random()
            if r < 0.4:
                attrs.append(Attr.S)
            elif r < 0.55:
                attrs.append(Attr.L)
            elif self.ext and r < 0.65 and x not in mentioned:
                attrs.append(Attr.U)
            else:
                attrs.append(Attr.Q)
        return AttrVec(tuple(scope), tuple(attrs))


# ====================================================================== CBPV


def _cbpv_mentions(t) -> set:
    out = set()
    for g in cbpv.type_vectors(t):
        out |= _support(g)
    return out


class CbpvGen(_Gen):
    def __init__(self, cfg: GenConfig, rng: random.Random):
        super().__init__(cfg, rng)
        self.chk = cbpv.MemoChecker(cfg.mode)

    # -- types

    def vtype(self, scope, d):
        C = cbpv
        r = self.rng.random()
        if d <= 0 or r < 0.3:
            return C.TUnit()
        if r < 0.45:
            return C.TSum(C.TUnit(), C.TUnit())
        if r < 0.6:
            return C.TProd(self.vtype(scope, d - 1), self.vtype(scope, d - 1))
        if r < 0.75:
            return C.TSum(self.vtype(scope, d - 1), self.vtype(scope, d - 1))
        b = self.ctype(scope, d - 1)
        return C.TU(self.rvec(scope, avoid_u=_cbpv_mentions(b)), b)

    def ctype(self, scope, d):
        if d <= 0 or self.rng.random() < 0.65:
            return cbpv.TF(self.vtype(scope, d - 1))
        return cbpv.TArrow(self.vtype(scope, d - 1), self.rattr(), self.ctype(scope, d - 1))

    def rescope(self, t, scope):
        return cbpv.type_rescope(t, scope, self.mode)

    # -- checking helpers

    def ok(self, j, ty, req) -> bool:
        return cbpv.type_equal(j.ty, ty) and vec_leq(req, j.effect, self.mode)

    def lookup(self, ctx, x):
        return ctx.lookup(x, self.mode)

    # -- computations

    def comp(self, ctx, B, req, d):
        strict = [x for x in ctx.scope if req[x] is Attr.S]
        if strict:
            x = strict[self.rng.randrange(len(strict))]
            return self.touch(ctx, B, req, x, lambda c, b, r: self.comp(c, b, r, d))
        if d > 1:
            forms = ["intro", "let", "seq", "split", "case", "force", "app", "sub"]
            form = self.pick(forms)
            if form is not None:
                try:
                    m = getattr(self, "c_" + form)(ctx, B, req, d - 1)
                    j = self.chk.comp(ctx, m)
                    if self.ok(j, B, req):
                        return m, j
                except RECOVERABLE:
                    pass
        return self.core_comp(ctx, B, req)

    def touch(self, ctx, B, req, x, k):
        C = cbpv
        req2 = req.set(x, Attr.Q)
        a = self.lookup(ctx, x)
        if isinstance(a, C.TUnit) and self.rng.random() < 0.5:
            m, _ = k(ctx, B, req2)
            m = C.Seq(C.Var(x), m)
        else:
            t = self.fresh("t")
            c2 = ctx.extend(t, a)
            m, _ = k(c2, self.rescope(B, c2.scope), _extend(req2, t))
            m = C.Let(t, C.Ret(C.Var(x)), m)
        j = self.chk.comp(ctx, m)
        if not self.ok(j, B, req):
            raise _Fail()
        return m, j

    def lam(self, ctx, B, req, body):
        x = self.fresh("a")
        c2 = ctx.extend(x, B.a)
        m, jb = body(c2, self.rescope(B.b, c2.scope), _extend(req, x, B.attr))
        if jb.effect[x] is not B.attr:
            m = cbpv.Sub(jb.effect.set(x, B.attr), m)
        return cbpv.Lam(x, B.a, m)

    def c_intro(self, ctx, B, req, d):
        if isinstance(B, cbpv.TF):
            v, _ = self.value(ctx, B.a, req, d)
            return cbpv.Ret(v)
        return self.lam(ctx, B, req, lambda c, b, r: self.comp(c, b, r, d))

    def c_let(self, ctx, B, req, d):
        a1 = self.vtype(ctx.scope, self.cfg.type_depth)
        m1, _ = self.comp(ctx, cbpv.TF(a1), _bottom(ctx.scope), d)
        x = self.fresh("a")
        c2 = ctx.extend(x, a1)
        m2, _ = self.comp(c2, self.rescope(B, c2.scope), _extend(req, x), d)
        return cbpv.Let(x, m1, m2)

    def c_seq(self, ctx, B, req, d):
        v, _ = self.value(ctx, cbpv.TUnit(), _bottom(ctx.scope), d)
        m, _ = self.comp(ctx, B, req, d)
        return cbpv.Seq(v, m)

    def scrutinee(self, ctx, kind, d):
        C = cbpv
        cands = [x for x in ctx.scope if isinstance(self.lookup(ctx, x), kind)]
        if cands and self.rng.random() < 0.6:
            x = self.rng.choice(cands)
            return C.Var(x), self.lookup(ctx, x)
        a = kind(self.vtype(ctx.scope, self.cfg.type_depth - 1), self.vtype(ctx.scope, self.cfg.type_depth - 1))
        v, _ = self.value(ctx, a, _bottom(ctx.scope), d)
        return v, a

    def c_split(self, ctx, B, req, d):
        v, p = self.scrutinee(ctx, cbpv.TProd, d)
        x1, x2 = self.fresh("a"), self.fresh("a")
        c1 = ctx.extend(x1, p.a1)
        c2 = c1.extend(x2, self.rescope(p.a2, c1.scope))
        m, _ = self.comp(c2, self.rescope(B, c2.scope), _extend(_extend(req, x1), x2), d)
        return cbpv.Split(x1, x2, v, m)

    def c_case(self, ctx, B, req, d):
        C = cbpv
        v, s = self.scrutinee(ctx, C.TSum, d)
        x1, x2 = self.fresh("a"), self.fresh("a")
        c1, c2 = ctx.extend(x1, s.a1), ctx.extend(x2, s.a2)
        m1, j1 = self.comp(c1, self.rescope(B, c1.scope), _extend(req, x1), d)
        m2, j2 = self.comp(c2, self.rescope(B, c2.scope), _extend(req, x2), d)
        g1, g2 = vec_downshift(j1.effect, x1), vec_downshift(j2.effect, x2)
        if g1 != g2:
            t = self.meet(g1, g2)
            m1 = _exact(m1, j1.effect, _extend(t, x1, j1.effect[x1]), C.Sub)
            m2 = _exact(m2, j2.effect, _extend(t, x2, j2.effect[x2]), C.Sub)
        return C.Case(v, x1, m1, x2, m2)

    def c_force(self, ctx, B, req, d):
        C = cbpv
        cands = []
        for x in ctx.scope:
            a = self.lookup(ctx, x)
            if isinstance(a, C.TU) and C.type_equal(a.b, B):
                cands.append(x)
        if cands and self.rng.random() < 0.7:
            return C.Force(C.Var(self.rng.choice(cands)))
        g = self.rvec(ctx.scope, avoid_u=_cbpv_mentions(B))
        v, _ = self.value(ctx, C.TU(g, B), _bottom(ctx.scope), d)
        return C.Force(v)

    def c_app(self, ctx, B, req, d):
        C = cbpv
        bottom = _bottom(ctx.scope)
        cands = []
        for x in ctx.scope:
            a = self.lookup(ctx, x)
            if isinstance(a, C.TU) and isinstance(a.b, C.TArrow) and C.type_equal(a.b.b, B):
                cands.append((x, a.b))
        if cands and self.rng.random() < 0.6:
            x, arrow = self.rng.choice(cands)
            v, _ = self.value(ctx, arrow.a, bottom, d)
            return C.App(C.Force(C.Var(x)), v)
        a = self.vtype(ctx.scope, self.cfg.type_depth)
        f, _ = self.comp(ctx, C.TArrow(a, self.rattr(), B), bottom, d)
        v, _ = self.value(ctx, a, bottom, d)
        return C.App(f, v)

    def c_sub(self, ctx, B, req, d):
        m, j = self.comp(ctx, B, req, d)
        return cbpv.Sub(self.between(req, j.effect), m)

    def core_comp(self, ctx, B, req):
        """A minimal computation of type B whose effect is at least req."""
        C = cbpv
        strict = [x for x in ctx.scope if req[x] is Attr.S]
        if strict:
            return self.touch(ctx, B, req, strict[0], self.core_comp)
        if isinstance(B, C.TF):
            v, _ = self.core_value(ctx, B.a, req)
            m = C.Ret(v)
        else:
            m = self.lam(ctx, B, req, self.core_comp)
        j = self.chk.comp(ctx, m)
        if not self.ok(j, B, req):
            raise _Fail()
        return m, j

    # -- values

    def value(self, ctx, A, req, d):
        C = cbpv
        cands = [x for x in ctx.scope if C.type_equal(self.lookup(ctx, x), A)]
        if cands and self.chance("var", 0.5):
            v = C.Var(self.rng.choice(cands))
            j = self.chk.value(ctx, v)
            if self.ok(j, A, req):
                return v, j
        if d > 1:
            try:
                v = self.v_intro(ctx, A, req, d - 1)
                j = self.chk.value(ctx, v)
                if self.ok(j, A, req):
                    return v, j
            except RECOVERABLE:
                pass
        return self.core_value(ctx, A, req)

    def v_intro(self, ctx, A, req, d):
        C = cbpv
        if isinstance(A, C.TUnit):
            return C.Unit()
        if isinstance(A, C.TProd):
            return C.Pair(self.value(ctx, A.a1, req, d)[0], self.value(ctx, A.a2, req, d)[0])
        if isinstance(A, C.TSum):
            if self.rng.random() < 0.5:
                return C.Inl(self.value(ctx, A.a1, req, d)[0], A)
            return C.Inr(self.value(ctx, A.a2, req, d)[0], A)
        m, j = self.comp(ctx, A.b, A.g, d)
        return C.Thunk(_exact(m, j.effect, A.g, C.Sub))

    def core_value(self, ctx, A, req):
        C = cbpv
        if isinstance(A, C.TUnit):
            v = C.Unit()
        elif isinstance(A, C.TProd):
            v = C.Pair(self.core_value(ctx, A.a1, req)[0], self.core_value(ctx, A.a2, req)[0])
        elif isinstance(A, C.TSum):
            v = C.Inl(self.core_value(ctx, A.a1, req)[0], A)
        else:
            m, j = self.core_comp(ctx, A.b, A.g)
            v = C.Thunk(_exact(m, j.effect, A.g, C.Sub))
        j = self.chk.value(ctx, v)
        if not self.ok(j, A, req):
            raise _Fail()
        return v, j

    def leaf(self, ctx, t):
        """A minimal term with the type of `t`, or None."""
        bottom = _bottom(ctx.scope)
        try:
            if cbpv.is_value(t):
                return self.core_value(ctx, cbpv.cbpv_synth_value(ctx, t, self.mode).ty, bottom)[0]
            return self.core_comp(ctx, cbpv.cbpv_synth_comp(ctx, t, self.mode).ty, bottom)[0]
        except (_Fail, StrictnessError):
            return None

    # -- programs

    def program(self, goal=None) -> Program:
        cfg = self.cfg
        ctx = cbpv.CbpvCtx()
        decls = []
        for _ in range(self.rng.randint(0, cfg.max_scope)):
            x = self.fresh("x")
            a = self.vtype(ctx.scope, cfg.type_depth)
            v, _ = self.value(ctx, a, _bottom(ctx.scope), min(cfg.decl_depth, cfg.max_depth))
            decls.append(Decl(x, a, None, v))
            ctx = ctx.extend(x, a)
        if goal is not None:
            b = self.rescope(goal, ctx.scope)
        elif cfg.returner or self.rng.random() < 0.7:
            b = cbpv.TF(self.vtype(ctx.scope, cfg.type_depth))
        else:
            b = self.ctype(ctx.scope, cfg.type_depth)
        req = self.main_req(ctx.scope, _cbpv_mentions(b))
        m, _ = self.comp(ctx, b, req, cfg.max_depth)
        return Program("cbpv", self.mode, decls, m)


# ======================================================================= CBN


class CbnGen(_Gen):
    def __init__(self, cfg: GenConfig, rng: random.Random):
        super().__init__(cfg, rng)
        self.chk = cbn.MemoChecker(cfg.mode)

    # -- types (well formed by construction in extended mode)

    def effects(self, t, scope) -> set:
        return _support(cbn.effects_of(t, scope, self.mode)) if self.ext else set()

    def rtype(self, scope, d, arrows: bool = True):
        r = self.rng.random()
        if d <= 0 or r < 0.3:
            return cbn.TUnit()
        if r < 0.42:
            return cbn.bool_type(scope, self.mode)
        if r < 0.6 or (not arrows and r >= 0.75):
            return self.rdata(cbn.TProd, scope, d)
        if r < 0.75:
            return self.rdata(cbn.TSum, scope, d)
        return self.rarrow(scope, d)

    def rdata(self, ctor, scope, d):
        t1, t2 = self.rtype(scope, d - 1), self.rtype(scope, d - 1)
        g1 = self.rvec(scope, must=self.effects(t1, scope))
        g2 = self.rvec(scope, must=self.effects(t2, scope))
        if self.ext and ctor is cbn.TSum:
            supp = _support(g1) | _support(g2)
            g1, g2 = self.widen(g1, supp), self.widen(g2, supp)
        return ctor(t1, g1, t2, g2)

    def widen(self, g, supp):
        for x in supp:
            if g[x] is Attr.U:
                g = g.set(x, self.rattr(non_u=True))
        return g

    def rarrow(self, scope, d, ret=None):
        """A random arrow; `ret`, if given, is the return type over `scope`."""
        x = self.fresh("y")
        s2 = tuple(scope) + (x,)
        t2 = self.rtype(s2, d - 1) if ret is None else cbn.type_rescope(ret, s2, self.mode)
        t1 = self.rtype(scope, d - 1)
        alpha = self.rattr()
        if not self.ext:
            return cbn.TArrow(x, alpha, t1, self.rvec(scope), self.rvec(scope), t2)
        e2 = cbn.effects_of(t2, s2, self.mode)
        reach = _support(vec_downshift(e2, x))
        if not self.effects(t1, scope) <= reach:
            t1 = cbn.TUnit()
        e1 = self.effects(t1, scope)
        g1, latent = [], []
        for v in scope:
            if v in e1:
                g1.append(self.rattr(non_u=True))
            elif v in reach:
                g1.append(self.rattr())
            else:
                g1.append(Attr.U)
            latent.append(self.rattr(non_u=True) if v in reach else self.rattr())
        if e2[x] is not Attr.U and alpha is Attr.U:
            alpha = self.rattr(non_u=True)
        sc = tuple(scope)
        return cbn.TArrow(x, alpha, t1, AttrVec(sc, tuple(g1)), AttrVec(sc, tuple(latent)), t2)

    def rescope(self, t, scope):
        return cbn.type_rescope(t, scope, self.mode)

    def ok(self, j, ty, req) -> bool:
        return cbn.type_equal(j.ty, ty) and vec_leq(req, j.effect, self.mode)

    def lookup(self, ctx, x):
        return ctx.lookup(x, self.mode)

    # -- terms

    def expr(self, ctx, t, req, d):
        strict = [x for x in ctx.scope if req[x] is Attr.S]
        if strict:
            x = strict[self.rng.randrange(len(strict))]
            return self.touch(ctx, t, req, x, lambda c, ty, r: self.expr(c, ty, r, d))
        if d > 1:
            form = self.pick(["var", "intro", "let", "seq", "split", "case", "app", "sub"])
            if form is not None:
                try:
                    e = getattr(self, "e_" + form)(ctx, t, req, d - 1)
                    j = self.chk.synth(ctx, e)
                    if self.ok(j, t, req):
                        return e, j
                except RECOVERABLE:
                    pass
        return self.core(ctx, t, req)

    def exact(self, ctx, t, g, d):
        e, j = self.expr(ctx, t, g, d)
        return _exact(e, j.effect, g, cbn.Sub)

    def exact_core(self, ctx, t, g):
        e, j = self.core(ctx, t, g)
        return _exact(e, j.effect, g, cbn.Sub)

    def consume(self, ctx, e, ty):
        """A unit-typed term that scrutinises `e`."""
        C = cbn
        if isinstance(ty, C.TUnit):
            return e
        if isinstance(ty, C.TProd):
            return C.Split(self.fresh("a"), self.fresh("a"), e, C.Unit())
        if isinstance(ty, C.TSum):
            return C.Case(e, self.fresh("a"), C.Unit(), self.fresh("a"), C.Unit())
        arg = self.exact_core(ctx, ty.t1, ty.g1)
        return self.consume(ctx, C.App(e, arg), C.type_downshift(ty.t2, ty.x))

    def touch(self, ctx, t, req, x, k):
        ty, _ = self.lookup(ctx, x)
        c = self.consume(ctx, cbn.Var(x), ty)
        e2, _ = k(ctx, t, req.set(x, Attr.Q))
        e = cbn.Seq(c, e2)
        j = self.chk.synth(ctx, e)
        if not self.ok(j, t, req):
            raise _Fail()
        return e, j

    def e_var(self, ctx, t, req, d):
        cands = [x for x in ctx.scope if cbn.type_equal(self.lookup(ctx, x)[0], t)]
        if not cands:
            raise _Fail()
        return cbn.Var(self.rng.choice(cands))

    def intro(self, ctx, t, req, child, body):
        C = cbn
        if isinstance(t, C.TUnit):
            return C.Unit()
        if isinstance(t, C.TProd):
            return C.Pair(child(ctx, t.t1, t.g1), child(ctx, t.t2, t.g2))
        if isinstance(t, C.TSum):
            if self.rng.random() < 0.5:
                return C.Inl(child(ctx, t.t1, t.g1), t)
            return C.Inr(child(ctx, t.t2, t.g2), t)
        x = self.fresh("a")
        c2 = ctx.extend(x, t.t1, t.g1)
        t2 = t.t2 if t.x == x else cbn.rename_in_type(t.t2, t.x, x)
        want = _extend(t.latent, x, t.attr)
        e, j = body(c2, t2, want)
        return C.Lam(x, t.t1, t.g1, _exact(e, j.effect, want, C.Sub))

    def e_intro(self, ctx, t, req, d):
        return self.intro(
            ctx, t, req, lambda c, ty, g: self.exact(c, ty, g, d), lambda c, ty, g: self.expr(c, ty, g, d)
        )

    def e_let(self, ctx, t, req, d):
        t1 = self.rtype(ctx.scope, self.cfg.type_depth)
        e1, j1 = self.expr(ctx, t1, _bottom(ctx.scope), d)
        x = self.fresh("a")
        c2 = ctx.extend(x, j1.ty, j1.effect)
        e2, _ = self.expr(c2, self.rescope(t, c2.scope), _extend(req, x), d)
        return cbn.Let(x, e1, e2)

    def e_seq(self, ctx, t, req, d):
        e1, _ = self.expr(ctx, cbn.TUnit(), _bottom(ctx.scope), d)
        e2, _ = self.expr(ctx, t, req, d)
        return cbn.Seq(e1, e2)

    def scrutinee(self, ctx, kind, d):
        cands = [x for x in ctx.scope if isinstance(self.lookup(ctx, x)[0], kind)]
        if cands and self.rng.random() < 0.6:
            x = self.rng.choice(cands)
            return cbn.Var(x), self.lookup(ctx, x)[0]
        s = self.rdata(kind, ctx.scope, self.cfg.type_depth)
        e, j = self.expr(ctx, s, _bottom(ctx.scope), d)
        return e, j.ty

    def e_split(self, ctx, t, req, d):
        e1, p = self.scrutinee(ctx, cbn.TProd, d)
        x1, x2 = self.fresh("a"), self.fresh("a")
        c1 = ctx.extend(x1, p.t1, p.g1)
        c2 = c1.extend(x2, self.rescope(p.t2, c1.scope), vec_restrict(p.g2, c1.scope, self.mode))
        e2, _ = self.expr(c2, self.rescope(t, c2.scope), _extend(_extend(req, x1), x2), d)
        return cbn.Split(x1, x2, e1, e2)

    def e_case(self, ctx, t, req, d):
        C = cbn
        e1, s = self.scrutinee(ctx, C.TSum, d)
        x1, x2 = self.fresh("a"), self.fresh("a")
        c1, c2 = ctx.extend(x1, s.t1, s.g1), ctx.extend(x2, s.t2, s.g2)
        b1, j1 = self.expr(c1, self.rescope(t, c1.scope), _extend(req, x1), d)
        b2, j2 = self.expr(c2, self.rescope(t, c2.scope), _extend(req, x2), d)
        g1, g2 = vec_downshift(j1.effect, x1), vec_downshift(j2.effect, x2)
        if g1 != g2:
            m = self.meet(g1, g2)
            b1 = _exact(b1, j1.effect, _extend(m, x1, j1.effect[x1]), C.Sub)
            b2 = _exact(b2, j2.effect, _extend(m, x2, j2.effect[x2]), C.Sub)
        return C.Case(e1, x1, b1, x2, b2)

    def e_app(self, ctx, t, req, d):
        C = cbn
        cands = []
        for x in ctx.scope:
            ty = self.lookup(ctx, x)[0]
            if isinstance(ty, C.TArrow) and C.type_equal(C.type_downshift(ty.t2, ty.x), t):
                cands.append((x, ty))
        if cands and self.rng.random() < 0.6:
            x, arrow = self.rng.choice(cands)
            return C.App(C.Var(x), self.exact(ctx, arrow.t1, arrow.g1, d))
        arrow = self.rarrow(ctx.scope, self.cfg.type_depth, ret=t)
        f, _ = self.expr(ctx, arrow, _bottom(ctx.scope), d)
        return C.App(f, self.exact(ctx, arrow.t1, arrow.g1, d))

    def e_sub(self, ctx, t, req, d):
        e, j = self.expr(ctx, t, req, d)
        return cbn.Sub(self.between(req, j.effect), e)

    def core(self, ctx, t, req):
        strict = [x for x in ctx.scope if req[x] is Attr.S]
        if strict:
            return self.touch(ctx, t, req, strict[0], self.core)
        e = self.intro(ctx, t, req, self.exact_core, self.core)
        j = self.chk.synth(ctx, e)
        if not self.ok(j, t, req):
            raise _Fail()
        return e, j

    def leaf(self, ctx, e):
        try:
            return self.core(ctx, cbn.cbn_synth(ctx, e, self.mode).ty, _bottom(ctx.scope))[0]
        except (_Fail, StrictnessError):
            return None

    def program(self, goal=None) -> Program:
        cfg = self.cfg
        ctx = cbn.CbnCtx()
        decls = []
        for _ in range(self.rng.randint(0, cfg.max_scope)):
            x = self.fresh("x")
            t = self.rtype(ctx.scope, cfg.type_depth)
            e, j = self.expr(ctx, t, _bottom(ctx.scope), min(cfg.decl_depth, cfg.max_depth))
            decls.append(Decl(x, t, None, e))
            ctx = ctx.extend(x, j.ty, j.effect)
        if goal is not None:
            t = self.rescope(goal, ctx.scope)
        else:
            t = self.rtype(ctx.scope, cfg.type_depth, arrows=not cfg.returner)
        mentioned = self.effects(t, ctx.scope)
        req = self.main_req(ctx.scope, mentioned)
        e, _ = self.expr(ctx, t, req, cfg.max_depth)
        return Program("cbn", self.mode, decls, e)


# ---------------------------------------------------------------- drivers

GEN_RETRIES = 50

_CHECKED: dict = {}


def checked(p: Program) -> Checked:
    """check_program, remembered for the most recent programs (by identity)."""
    hit = _CHECKED.get(id(p))
    if hit is not None and hit[0] is p:
        return hit[1]
    c = check_program(p)
    if len(_CHECKED) >= 64:
        _CHECKED.clear()
    _CHECKED[id(p)] = (p, c)
    return c


def _generate(lang: str, cfg: GenConfig, rng: random.Random, goal=None) -> Program:
    cls = CbnGen if lang == "cbn" else CbpvGen
    for _ in range(GEN_RETRIES):
        try:
            p = cls(cfg, rng).program(goal)
        except _Fail:
            continue
        try:
            checked(p)
        except StrictnessError as exc:
            raise AssertionError(f"generated program does not typecheck: {exc}\n{show_program(p)}") from exc
        return p
    raise GenerationExhausted(f"no {lang} program after {GEN_RETRIES} attempts")


def gen_cbpv(cfg: GenConfig, rng: Optional[random.Random] = None, goal=None) -> Program:
    """A random well-typed CBPV program; its context comes from the declarations.

    `goal`, a closed computation type, fixes the type of main.
    """
    return _generate("cbpv", cfg, rng or random.Random(cfg.seed), goal)


def gen_cbn(cfg: GenConfig, rng: Optional[random.Random] = None, goal=None) -> Program:
    return _generate("cbn", cfg, rng or random.Random(cfg.seed), goal)


def programs(lang: str, cfg: GenConfig, n: int):
    """`n` programs from one seeded stream; equal configs give equal streams."""
    rng = random.Random(cfg.seed)
    for _ in range(n):
        yield _generate(lang, cfg, rng)


def close_program(p: Program, rng: Optional[random.Random] = None, depth: int = 3) -> Program:
    """Give every abstract declaration a generated definition of its type.

    CBN definitions get exactly the declared latent effect, so the checked
    context, and hence main's judgment, do not change.
    """
    if all(d.term is not None for d in p.decls):
        return p
    rng = rng or random.Random(0)
    cfg = GenConfig(mode=p.mode)
    mode = p.mode
    decls = []
    ctx = cbn.CbnCtx() if p.lang == "cbn" else cbpv.CbpvCtx()
    for d in p.decls:
        if d.term is None:
            d = replace(d, term=_definition(p.lang, cfg, rng, ctx, d, depth))
        decls.append(d)
        if p.lang == "cbn":
            latent = d.latent if d.latent is not None else cbn.cbn_synth(ctx, d.term, mode).effect
            ctx = ctx.extend(d.name, d.ty or cbn.cbn_synth(ctx, d.term, mode).ty, latent)
        else:
            ctx = ctx.extend(d.name, d.ty or cbpv.cbpv_synth_value(ctx, d.term, mode).ty)
    return replace(p, decls=decls)


def _definition(lang: str, cfg: GenConfig, rng: random.Random, ctx, d: Decl, depth: int):
    for _ in range(GEN_RETRIES):
        try:
            if lang == "cbn":
                latent = d.latent if d.latent is not None else AttrVec.default(ctx.scope, cfg.mode)
                return CbnGen(cfg, rng).exact(ctx, d.ty, latent, depth)
            return CbpvGen(cfg, rng).value(ctx, d.ty, _bottom(ctx.scope), depth)[0]
        except RECOVERABLE:
            continue
    raise GenerationExhausted(f"no definition for {d.name} after {GEN_RETRIES} attempts")


# ================================================================== checks


@dataclass
class TheoremReport:
    theorem: str
    trials: int = 0
    failures: int = 0
    counterexample: Optional[str] = None
    obligations: int = 0  # individual facts checked (dropped variables, applications, ...)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, problem: Optional[str], program: Optional[Program] = None, obligations: int = 0):
        self.trials += 1
        self.obligations += obligations
        if problem is not None:
            self.failures += 1
            if self.counterexample is None:
                text = show_program(program) if program is not None else ""
                self.counterexample = f"{text}-- {problem}"

    def merge(self, other: "TheoremReport") -> "TheoremReport":
        return TheoremReport(
            self.theorem,
            self.trials + other.trials,
            self.failures + other.failures,
            self.counterexample if self.counterexample is not None else other.counterexample,
            self.obligations + other.obligations,
        )

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "trials": self.trials,
            "failures": self.failures,
            "obligations": self.obligations,
            "counterexample": self.counterexample,
        }


CBN_TERMS = typing.get_args(cbn.CbnTerm)
CBPV_TERMS = typing.get_args(cbpv.Value) + typing.get_args(cbpv.Comp)


def _is_term(t) -> bool:
    return isinstance(t, CBN_TERMS + CBPV_TERMS)


def _depth(t) -> int:
    kids = cbn.subterms(t) if isinstance(t, CBN_TERMS) else cbpv.children(t)
    return 1 + max((_depth(k) for k in kids), default=0)


def _size(t) -> int:
    return cbn.term_size(t) if isinstance(t, CBN_TERMS) else cbpv.term_size(t)


def fuel_bound(low) -> int:
    """Program size times 2 to the nesting depth; evaluation never needs more."""
    terms = [v for _, v in low.decls if v is not None] + [low.main]
    size = sum(_size(t) for t in terms)
    depth = max(_depth(t) for t in terms)
    return size * 2 ** min(depth, 40)


def _eval(env, term, mode, **kw):
    return eval_value(env, term, mode, **kw) if cbpv.is_value(term) else eval_comp(env, term, mode, **kw)


def _prepare(p: Program):
    c = checked(p)
    return c, lower(c)


def _soundness_problem(p: Program, rng: random.Random, tally: _Tally) -> Optional[str]:
    c, low = _prepare(p)
    mode = p.mode
    fuel = fuel_bound(low)
    env = build_env(low, fuel=fuel)
    unbound = [x for x in env.scope if x not in env.bindings]
    if unbound:
        return f"declarations failed to evaluate: {unbound}"
    out = _eval(env, low.main, mode, fuel=fuel)
    tally()
    if not isinstance(out, Success):
        return f"evaluation failed: {out}"
    if out.effect != low.judgment.effect:
        return (
            f"effect mismatch: evaluation {out.effect.render(mode)}, "
            f"typing {low.judgment.effect.render(mode)}"
        )
    problem = _application_problem(low, env, out.terminal, rng, fuel, tally)
    if problem is not None:
        return problem
    if mode is Mode.EXTENDED:
        tally()
        return _validity_problem(c)
    return None


def _application_problem(low, env, t, rng: random.Random, fuel: int, tally: _Tally, levels: int = 4) -> Optional[str]:
    """Apply a function-typed result to generated arguments, level by level.

    While a closure's environment is exactly the tracked context, arguments
    are generated there against the closure's own argument type and the body
    effect is checked. A closure that captured local bindings is given an
    argument built outside them; such an argument is not related to the
    closure's own argument type, so only success is required.
    """
    mode = low.mode
    gen = CbpvGen(GenConfig(mode=mode), rng)
    ctx, ty, exact = low.ctx, low.judgment.ty, True
    for level in range(levels):
        if not isinstance(ty, cbpv.TArrow):
            return None
        if not isinstance(t, TLam):
            return "function-typed program did not produce a closure"
        exact = exact and len(t.env.scope) == len(ctx.scope)
        if exact:
            env = t.env  # `env` always matches `ctx`
        v, j = gen.value(ctx, ty.a, _bottom(ctx.scope), 3)
        w = eval_value(env, j.term, mode, fuel=fuel)
        if not isinstance(w, Success):
            return f"generated argument failed to evaluate: {w}"
        res = apply_closure(t, w.terminal, mode, track=exact, fuel=fuel)
        tally()
        if not isinstance(res, Success):
            return f"applying the closure failed: {res}"
        if exact:
            inner = ctx.extend(t.x, ty.a)
            ty = cbpv.cbpv_synth_comp(inner, t.body, mode).ty
            ctx = inner
            env = env.extend(t.x, w.terminal, f"{t.x}@arg{level}")
        else:
            ty = ty.b
        t = res.terminal
    return None


def _validity_problem(c: Checked) -> Optional[str]:
    """Extended-mode judgments are well formed and never-mentioned variables are U."""
    mode = c.mode
    j = c.judgment
    if c.lang == "cbn" and not cbn.wf_type(j.effect, j.ty, c.ctx.scope, mode):
        return "judgment is not well formed"
    ctx, main = with_unused(c.lang, c.ctx, c.program.main, mode)
    if c.lang == "cbn":
        j2 = cbn.cbn_synth(ctx, main, mode)
    else:
        j2 = cbpv.cbpv_synth(ctx, main, mode)
    if j2.effect[VarId("_unused")] is not Attr.U:
        return "a never-mentioned variable is not U"
    return None


def check_soundness(p: Program, rng: Optional[random.Random] = None) -> TheoremReport:
    """Closed evaluation succeeds with the typed effect; closures accept arguments."""
    return _run("soundness", p, lambda t: _soundness_problem(p, rng or random.Random(0), t))


class _Tally:
    def __init__(self):
        self.n = 0

    def __call__(self, k: int = 1):
        self.n += k


def _run(name: str, p: Program, fn) -> TheoremReport:
    """Run one check; internal assertions (such as fuel) count as failures."""
    tally = _Tally()
    try:
        problem = fn(tally)
    except AssertionError as exc:
        problem = f"internal assertion: {exc}"
    r = TheoremReport(name)
    r.record(problem, p, tally.n)
    return r


def _lazy_problem(p: Program, tally: _Tally) -> Optional[str]:
    c, low = _prepare(p)
    mode = p.mode
    fuel = fuel_bound(low)
    env = build_env(low, fuel=fuel)
    full = _eval(env, low.main, mode, fuel=fuel)
    if not isinstance(full, Success):
        return f"fully bound evaluation failed: {full}"
    for x, a in low.judgment.effect.items():
        if a not in (Attr.L, Attr.U):
            continue
        out = _eval(drop_binding(env, x), low.main, mode, fuel=fuel)
        tally()
        if not isinstance(out, Success):
            return f"dropping lazy {x} made evaluation fail: {out}"
        if not eq_mod_gamma(out.terminal, full.terminal, ignore={x}):
            return f"dropping lazy {x} changed the result"
    return None


def check_lazy_soundness(p: Program, rng=None) -> TheoremReport:
    """Lazy (and unused) top-level variables can be left unbound."""
    return _run("lazy_soundness", p, lambda t: _lazy_problem(p, t))


def is_returner(p: Program) -> bool:
    c = checked(p)
    if p.lang == "cbn":
        return not isinstance(c.judgment.ty, cbn.TArrow)
    return isinstance(c.judgment.ty, cbpv.TF)


def _strict_problem(p: Program, validate: bool, max_choices: int, tally: _Tally) -> Optional[str]:
    c, low = _prepare(p)
    mode = p.mode
    fuel = fuel_bound(low)
    goals = []  # (prefix of declarations, term, judgment effect)
    if p.lang == "cbpv":
        # declarations are value judgments over the declarations before them
        for k, (_, j) in enumerate(zip(low.decls, c.decl_judgments)):
            if j is not None:
                goals.append((low.decls[:k], j.term, j.effect))
    if isinstance(low.judgment.ty, cbpv.TF):
        goals.append((low.decls, low.main, low.judgment.effect))
    for decls, term, effect in goals:
        for x, a in effect.items():
            if a is not Attr.S:
                continue
            env = build_env(replace(low, decls=decls), missing={x}, fuel=fuel)
            tally()
            if not semantic_fails(env, term, mode, validate=validate, max_choices=max_choices, fuel=fuel):
                return f"strict {x} left unbound, yet evaluation succeeded"
    return None


def check_strict_failure(p: Program, rng=None, validate: bool = True, max_choices: int = 3) -> TheoremReport:
    """Leaving a strict top-level variable unbound makes a returner fail.

    CBPV declarations are value judgments and are checked the same way.
    """
    return _run("strict_failure", p, lambda t: _strict_problem(p, validate, max_choices, t))


def _translation_problem(p: Program, tally: _Tally) -> Optional[str]:
    if p.lang != "cbn":
        return "translation applies to CBN programs only"
    mode = p.mode
    c = checked(p)
    try:
        low = lower(c)
    except StrictnessError as exc:
        return f"translation does not typecheck: {exc}"
    tally()
    j = c.judgment
    tr = translate_type(j.ty, c.ctx.scope, mode)
    if not cbpv.type_equal(low.judgment.ty, tr.target):
        return "translated term does not have the translated type"
    want = vec_plus(j.effect, tr.residual, mode)
    got = low.judgment.effect
    if got != want:
        return f"translated effect {got.render(mode)}, expected {want.render(mode)}"
    if isinstance(tr.target, cbpv.TF) and got != j.effect:
        return f"translated effect {got.render(mode)} differs from {j.effect.render(mode)} at a returner type"
    fuel = fuel_bound(low)
    env = build_env(low, fuel=fuel)
    out = eval_comp(env, low.main, mode, fuel=fuel)
    if not isinstance(out, Success):
        return f"translated program failed to evaluate: {out}"
    if isinstance(tr.target, cbpv.TF) and not isinstance(out.terminal, TRet):
        return "translated returner did not return"
    return None


def check_translation(p: Program, rng=None) -> TheoremReport:
    """Translations typecheck at γ plus the residual and evaluate to a return."""
    return _run("translation", p, lambda t: _translation_problem(p, t))


def _perturb(term, rng: random.Random, mode: Mode):
    """Lower some subsumption targets at random (a possibly legal re-elaboration)."""

    def lower_vec(g):
        attrs = [rng.choice([b for b in legal_attrs(mode) if attr_leq(b, a, mode)]) for a in g.attrs]
        return AttrVec(g.scope, tuple(attrs))

    def go(t):
        if not dataclasses.is_dataclass(t) or not _is_term(t):
            return t
        changes = {f.name: go(getattr(t, f.name)) for f in dataclasses.fields(t) if _is_term(getattr(t, f.name))}
        if isinstance(t, (cbpv.Sub, cbn.Sub)) and rng.random() < 0.5:
            changes["target"] = lower_vec(t.target)
            if isinstance(t, cbpv.Sub):
                changes["inferred"] = None
        return dataclasses.replace(t, **changes)

    return go(term)


def _determinism_problem(p: Program, rng: random.Random, k: int, tally: _Tally) -> Optional[str]:
    c, low = _prepare(p)
    mode = p.mode
    fuel = fuel_bound(low)
    env = build_env(low, fuel=fuel)
    base = _eval(env, low.main, mode, fuel=fuel)
    if not isinstance(base, Success):
        return f"evaluation failed: {base}"
    mains = [low.main]
    for _ in range(k):
        q = replace(p, main=_perturb(p.main, rng, mode))
        try:
            mains.append(lower(check_program(q)).main)
        except StrictnessError:
            continue  # not a legal derivation
    tally(len(mains) - 1)
    for m in mains:
        for variant in env_variants(env, mode):
            out = _eval(variant, m, mode, check=False, fuel=fuel)
            if isinstance(out, Success) and not eq_mod_gamma(out.terminal, base.terminal):
                return "two derivations produced inequivalent terminals"
        out = _eval(env, m, mode, fuel=fuel)
        if isinstance(out, Success) and not eq_mod_gamma(out.terminal, base.terminal):
            return "a re-elaborated program produced an inequivalent terminal"
    return None


def check_determinism(p: Program, rng: Optional[random.Random] = None, k: int = 5) -> TheoremReport:
    """All derivations of one program agree modulo vectors."""
    return _run("determinism", p, lambda t: _determinism_problem(p, rng or random.Random(0), k, t))


THEOREMS = {
    "soundness": check_soundness,
    "lazy_soundness": check_lazy_soundness,
    "strict_failure": check_strict_failure,
    "translation": check_translation,
    "determinism": check_determinism,
}


# ---------------------------------------------------------------- shrinking


def shrink(p: Program, still_fails: Callable[[Program], bool], max_steps: int = 200) -> Program:
    """Greedily replace subterms of main by minimal terms of the same type."""
    rng = random.Random(0)
    for _ in range(max_steps):
        c = check_program(p)
        gen = (CbnGen if p.lang == "cbn" else CbpvGen)(GenConfig(mode=p.mode), rng)
        improved = False
        for path, ctx, t in sites(p.lang, c.ctx, p.main, p.mode):
            leaf = gen.leaf(ctx, t)
            if leaf is None or _size(leaf) >= _size(t):
                continue
            q = replace(p, main=replace_at(p.main, path, leaf))
            try:
                check_program(q)
            except StrictnessError:
                continue
            if still_fails(q):
                p, improved = q, True
                break
        if not improved:
            return p
    return p


# ---------------------------------------------------------------- campaigns


def trial_rng(seed: int, i: int) -> random.Random:
    return random.Random(seed * 1_000_003 + i)


def run_campaign(theorem: str, lang: str, cfg: GenConfig, n: int, do_shrink: bool = True) -> TheoremReport:
    """Check one theorem on `n` generated programs."""
    check = THEOREMS[theorem]
    if theorem == "strict_failure" and not cfg.returner:
        cfg = replace(cfg, returner=True)
    report = TheoremReport(theorem)
    for i, p in enumerate(programs(lang, cfg, n)):
        r = check(p, trial_rng(cfg.seed, i))
        if not r.passed and do_shrink and report.counterexample is None:
            small = shrink(p, lambda q: not check(q, trial_rng(cfg.seed, i)).passed)
            r = check(small, trial_rng(cfg.seed, i))
        report = report.merge(r)
    return report

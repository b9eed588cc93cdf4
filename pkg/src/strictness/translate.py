"""Strictness-preserving translation from call-by-name into CBPV.

A CBN type translates to a CBPV computation type together with a residual
vector: the usage that forcing the translated computation adds on top of the
CBN effect. Residuals are trivial except under arrows (and, in extended mode,
hold the lazified latent effects of data types).
"""

from __future__ import annotations

from dataclasses import dataclass

from strictness import cbn, cbpv
from strictness.attrs import (
    AttrVec,
    Mode,
    VarId,
    attr_plus,
    vec_downshift,
    vec_lazify,
    vec_plus,
    vec_restrict,
    vec_sum,
)


@dataclass(frozen=True)
class TypeTranslation:
    target: object  # cbpv.CompType
    residual: AttrVec


def translate_type(t: cbn.CbnType, scope: tuple, mode: Mode) -> TypeTranslation:
    """Translate a CBN type whose vectors are scoped over `scope`."""
    if isinstance(t, cbn.TUnit):
        return TypeTranslation(cbpv.TF(cbpv.TUnit()), AttrVec.default(scope, mode))
    if isinstance(t, (cbn.TProd, cbn.TSum)):
        r1 = translate_type(t.t1, scope, mode)
        r2 = translate_type(t.t2, scope, mode)
        a1 = cbpv.TU(vec_plus(t.g1, r1.residual, mode), r1.target)
        a2 = cbpv.TU(vec_plus(t.g2, r2.residual, mode), r2.target)
        ctor = cbpv.TProd if isinstance(t, cbn.TProd) else cbpv.TSum
        if mode is Mode.EXTENDED:
            residual = vec_lazify(vec_sum([t.g1, r1.residual, t.g2, r2.residual], mode), mode)
        else:
            residual = AttrVec.default(scope, mode)
        return TypeTranslation(cbpv.TF(ctor(a1, a2)), residual)
    # Arrow: the argument attribute also absorbs what the return type's
    # residual says about the argument.
    r1 = translate_type(t.t1, scope, mode)
    r2 = translate_type(t.t2, scope + (t.x,), mode)
    arg = cbpv.TU(vec_plus(t.g1, r1.residual, mode), r1.target)
    alpha = attr_plus(t.attr, r2.residual[t.x], mode)
    target = cbpv.TArrow(arg, alpha, cbpv.type_downshift(r2.target, t.x))
    return TypeTranslation(target, vec_plus(t.latent, vec_downshift(r2.residual, t.x), mode))


def translate_entry(t: cbn.CbnType, latent: AttrVec, scope: tuple, mode: Mode) -> cbpv.TU:
    r = translate_type(t, scope, mode)
    return cbpv.TU(vec_plus(latent, r.residual, mode), r.target)


def translate_ctx(ctx: cbn.CbnCtx, mode: Mode) -> cbpv.CbpvCtx:
    out = cbpv.CbpvCtx()
    for e in ctx.entries:
        out = out.extend(e.x, translate_entry(e.ty, e.latent, out.scope, mode))
    return out


class _Fresh:
    def __init__(self, avoid):
        self.avoid = set(avoid)
        self.n = 0

    def __call__(self) -> VarId:
        while True:
            self.n += 1
            name = VarId(f"_t{self.n}")
            if name not in self.avoid:
                self.avoid.add(name)
                return name


def _names(e) -> set:
    out = set()
    stack = [e]
    while stack:
        t = stack.pop()
        for attr in ("x", "x1", "x2"):
            if hasattr(t, attr):
                out.add(getattr(t, attr))
        stack.extend(cbn.subterms(t))
    return out


def translate_term(ctx: cbn.CbnCtx, e: cbn.CbnTerm, mode: Mode):
    """Translate a checkable CBN term under `ctx` into a CBPV computation."""
    fresh = _Fresh(set(ctx.scope) | _names(e))
    return _Translator(mode, fresh).term(ctx, ctx.scope, e)


class _Translator:
    def __init__(self, mode: Mode, fresh: _Fresh):
        self.mode = mode
        self.fresh = fresh
        self.checker = cbn.MemoChecker(mode)

    def ttype(self, t, scope) -> TypeTranslation:
        return translate_type(cbn.type_rescope(t, scope, self.mode), scope, self.mode)

    def thunked(self, t, g, scope) -> cbpv.TU:
        r = self.ttype(t, scope)
        return cbpv.TU(vec_plus(vec_restrict(g, scope, self.mode), r.residual, self.mode), r.target)

    def synth(self, ctx, e) -> cbn.CbnJudgment:
        return self.checker.synth(ctx, e)

    def term(self, ctx: cbn.CbnCtx, scope: tuple, e):
        """`scope` is the CBPV scope: ctx.scope plus translation binders."""
        mode = self.mode
        if isinstance(e, cbn.Unit):
            return cbpv.Ret(cbpv.Unit())
        if isinstance(e, cbn.Var):
            return cbpv.Force(cbpv.Var(e.x))
        if isinstance(e, cbn.Lam):
            arg = self.thunked(e.arg_type, e.arg_latent, scope)
            body = self.term(ctx.extend(e.x, e.arg_type, e.arg_latent), scope + (e.x,), e.body)
            return cbpv.Lam(e.x, arg, body, loc=e.loc)
        if isinstance(e, cbn.App):
            return cbpv.App(self.term(ctx, scope, e.e1), cbpv.Thunk(self.term(ctx, scope, e.e2)))
        if isinstance(e, cbn.Let):
            j1 = self.synth(ctx, e.e1)
            m1 = cbpv.Ret(cbpv.Thunk(self.term(ctx, scope, e.e1)))
            m2 = self.term(ctx.extend(e.x, j1.ty, j1.effect), scope + (e.x,), e.e2)
            return cbpv.Let(e.x, m1, m2)
        if isinstance(e, cbn.Seq):
            y = self.fresh()
            m1 = self.term(ctx, scope, e.e1)
            m2 = self.term(ctx, scope + (y,), e.e2)
            return cbpv.Let(y, m1, cbpv.Seq(cbpv.Var(y), m2))
        if isinstance(e, cbn.Pair):
            v1 = cbpv.Thunk(self.term(ctx, scope, e.e1))
            v2 = cbpv.Thunk(self.term(ctx, scope, e.e2))
            return cbpv.Ret(cbpv.Pair(v1, v2))
        if isinstance(e, cbn.Sub):
            j = self.synth(ctx, e.e)
            residual = self.ttype(j.ty, scope).residual
            target = vec_plus(vec_restrict(e.target, scope, mode), residual, mode)
            return cbpv.Sub(target, self.term(ctx, scope, e.e))
        if isinstance(e, (cbn.Inl, cbn.Inr)):
            s = e.annot
            annot = cbpv.TSum(self.thunked(s.t1, s.g1, scope), self.thunked(s.t2, s.g2, scope))
            ctor = cbpv.Inl if isinstance(e, cbn.Inl) else cbpv.Inr
            return cbpv.Ret(ctor(cbpv.Thunk(self.term(ctx, scope, e.e)), annot))
        if isinstance(e, cbn.Split):
            j1 = self.synth(ctx, e.e1)
            p = j1.ty
            y = self.fresh()
            c1 = ctx.extend(e.x1, p.t1, p.g1)
            c2 = c1.extend(e.x2, cbn.type_rescope(p.t2, c1.scope, mode), vec_restrict(p.g2, c1.scope, mode))
            body = self.term(c2, scope + (y, e.x1, e.x2), e.e2)
            return cbpv.Let(y, self.term(ctx, scope, e.e1), cbpv.Split(e.x1, e.x2, cbpv.Var(y), body))
        if isinstance(e, cbn.Case):
            j1 = self.synth(ctx, e.e1)
            s = j1.ty
            y = self.fresh()
            m1 = self.term(ctx.extend(e.x1, s.t1, s.g1), scope + (y, e.x1), e.e2)
            m2 = self.term(ctx.extend(e.x2, s.t2, s.g2), scope + (y, e.x2), e.e3)
            return cbpv.Let(y, self.term(ctx, scope, e.e1), cbpv.Case(cbpv.Var(y), e.x1, m1, e.x2, m2))
        raise TypeError(f"not a CBN term: {e!r}")


"""Call-by-name types, terms and the strictness type-and-effect checker.

Every vector stored in a type is scoped over the context the type lives in;
the return type of a dependent arrow additionally sees the arrow's binder.
"""

from __future__ import annotations

import functools

from dataclasses import dataclass, field
from typing import Optional, Union

from strictness.attrs import (
    Attr,
    AttrVec,
    Mode,
    VarId,
    check_legal,
    vec_downshift,
    vec_lazify,
    vec_leq,
    vec_plus,
    vec_restrict,
    vec_singleton,
    vec_sum,
)
from strictness.errors import (
    IllFormedType,
    NotAFunction,
    ScopeEscape,
    ScopeMismatch,
    SubsumptionNotBelow,
    TypeMismatch,
    UnboundVariable,
)

# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TUnit:
    pass


@dataclass(frozen=True)
class TProd:
    t1: "CbnType"
    g1: AttrVec
    t2: "CbnType"
    g2: AttrVec


@dataclass(frozen=True)
class TSum:
    t1: "CbnType"
    g1: AttrVec
    t2: "CbnType"
    g2: AttrVec


@dataclass(frozen=True)
class TArrow:
    """(x :attr t1^g1) -[latent]-> t2, where t2 may mention x."""

    x: VarId
    attr: Attr
    t1: "CbnType"
    g1: AttrVec
    latent: AttrVec
    t2: "CbnType"


CbnType = Union[TUnit, TProd, TSum, TArrow]


def bool_type(scope, mode: Mode) -> TSum:
    d = AttrVec.default(scope, mode)
    return TSum(TUnit(), d, TUnit(), d)


def is_bool(t: CbnType, mode: Mode) -> bool:
    return (
        isinstance(t, TSum)
        and isinstance(t.t1, TUnit)
        and isinstance(t.t2, TUnit)
        and t.g1 == t.g2 == AttrVec.default(t.g1.scope, mode)
    )


def _fresh_binder(x: VarId, avoid) -> VarId:
    y = x
    while y in avoid:
        y = VarId(y + "'")
    return y


def rename_in_type(t: CbnType, old: VarId, new: VarId) -> CbnType:
    """Rename a free variable in every vector of `t`."""

    def rv(g: AttrVec) -> AttrVec:
        if old not in g:
            return g
        return AttrVec(tuple(new if y == old else y for y in g.scope), g.attrs)

    if isinstance(t, TUnit):
        return t
    if isinstance(t, (TProd, TSum)):
        return type(t)(rename_in_type(t.t1, old, new), rv(t.g1), rename_in_type(t.t2, old, new), rv(t.g2))
    t2 = t.t2 if t.x == old else rename_in_type(t.t2, old, new)
    return TArrow(t.x, t.attr, rename_in_type(t.t1, old, new), rv(t.g1), rv(t.latent), t2)


def type_rescope(t: CbnType, scope: tuple, mode: Mode) -> CbnType:
    """Restrict every vector in `t` to `scope`; new variables get the default."""
    if isinstance(t, TUnit):
        return t
    if isinstance(t, (TProd, TSum)):
        return type(t)(
            type_rescope(t.t1, scope, mode),
            vec_restrict(t.g1, scope, mode),
            type_rescope(t.t2, scope, mode),
            vec_restrict(t.g2, scope, mode),
        )
    x, t2 = t.x, t.t2
    if x in scope:
        y = _fresh_binder(x, set(scope))
        t2, x = rename_in_type(t2, x, y), y
    return TArrow(
        x,
        t.attr,
        type_rescope(t.t1, scope, mode),
        vec_restrict(t.g1, scope, mode),
        vec_restrict(t.latent, scope, mode),
        type_rescope(t2, scope + (x,), mode),
    )


def type_downshift(t: CbnType, x: VarId) -> CbnType:
    if isinstance(t, TUnit):
        return t
    if isinstance(t, (TProd, TSum)):
        return type(t)(type_downshift(t.t1, x), vec_downshift(t.g1, x), type_downshift(t.t2, x), vec_downshift(t.g2, x))
    t2 = t.t2 if t.x == x else type_downshift(t.t2, x)
    return TArrow(t.x, t.attr, type_downshift(t.t1, x), vec_downshift(t.g1, x), vec_downshift(t.latent, x), t2)


def type_equal(a: CbnType, b: CbnType) -> bool:
    """Structural equality, up to renaming of arrow binders."""
    if isinstance(a, TUnit) or isinstance(b, TUnit):
        return isinstance(a, TUnit) and isinstance(b, TUnit)
    if type(a) is not type(b):
        return False
    if isinstance(a, (TProd, TSum)):
        return a.g1 == b.g1 and a.g2 == b.g2 and type_equal(a.t1, b.t1) and type_equal(a.t2, b.t2)
    b2 = b.t2 if a.x == b.x else rename_in_type(b.t2, b.x, a.x)
    return (
        a.attr is b.attr
        and a.g1 == b.g1
        and a.latent == b.latent
        and type_equal(a.t1, b.t1)
        and type_equal(a.t2, b2)
    )


def type_scoped(t: CbnType, scope: tuple) -> bool:
    if isinstance(t, TUnit):
        return True
    if isinstance(t, (TProd, TSum)):
        return t.g1.scope == scope == t.g2.scope and type_scoped(t.t1, scope) and type_scoped(t.t2, scope)
    return (
        t.g1.scope == scope
        and t.latent.scope == scope
        and type_scoped(t.t1, scope)
        and type_scoped(t.t2, scope + (t.x,))
    )


def type_attrs(t: CbnType):
    """Every attribute stored anywhere in `t` (used for mode legality)."""
    if isinstance(t, TUnit):
        return
    if isinstance(t, (TProd, TSum)):
        yield from t.g1.attrs
        yield from t.g2.attrs
        yield from type_attrs(t.t1)
        yield from type_attrs(t.t2)
        return
    yield t.attr
    yield from t.g1.attrs
    yield from t.latent.attrs
    yield from type_attrs(t.t1)
    yield from type_attrs(t.t2)


# ------------------------------------------------------- well-formedness


def effects_of(t: CbnType, scope: tuple, mode: Mode) -> AttrVec:
    """Sum of the latent effects in positive positions of `t`."""
    if isinstance(t, TUnit):
        return AttrVec.default(scope, mode)
    if isinstance(t, (TProd, TSum)):
        return vec_sum([t.g1, t.g2, effects_of(t.t1, scope, mode), effects_of(t.t2, scope, mode)], mode)
    inner = vec_downshift(effects_of(t.t2, scope + (t.x,), mode), t.x)
    return vec_sum([t.latent, effects_of(t.t1, scope, mode), inner], mode)


def wf_struct(t: CbnType, scope: tuple, mode: Mode) -> bool:
    if isinstance(t, TUnit):
        return True
    if isinstance(t, (TProd, TSum)):
        return wf_type(t.g1, t.t1, scope, mode) and wf_type(t.g2, t.t2, scope, mode)
    # γ2 ⊢WF ⤓x τ2: the binder's entries are dropped from the return type.
    return wf_type(t.g1, t.t1, scope, mode) and wf_type(t.latent, type_downshift(t.t2, t.x), scope, mode)


def wf_type(g: AttrVec, t: CbnType, scope: tuple, mode: Mode) -> bool:
    """g ⊢WF t: the type claims no usage the derivation did not make."""
    if mode is Mode.BASE:
        return True
    if not wf_struct(t, scope, mode):
        return False
    return vec_lazify(g, mode) == vec_lazify(vec_plus(g, effects_of(t, scope, mode), mode), mode)


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class Var:
    x: VarId


@dataclass(frozen=True)
class Inl:
    e: "CbnTerm"
    annot: TSum


@dataclass(frozen=True)
class Inr:
    e: "CbnTerm"
    annot: TSum


@dataclass(frozen=True)
class Pair:
    e1: "CbnTerm"
    e2: "CbnTerm"


@dataclass(frozen=True)
class Lam:
    x: VarId
    arg_type: CbnType
    arg_latent: AttrVec
    body: "CbnTerm"
    loc: Optional[tuple] = field(default=None, compare=False)


@dataclass(frozen=True)
class App:
    e1: "CbnTerm"
    e2: "CbnTerm"


@dataclass(frozen=True)
class Let:
    x: VarId
    e1: "CbnTerm"
    e2: "CbnTerm"


@dataclass(frozen=True)
class Sub:
    target: AttrVec
    e: "CbnTerm"


@dataclass(frozen=True)
class Seq:
    e1: "CbnTerm"
    e2: "CbnTerm"


@dataclass(frozen=True)
class Split:
    x1: VarId
    x2: VarId
    e1: "CbnTerm"
    e2: "CbnTerm"


@dataclass(frozen=True)
class Case:
    e1: "CbnTerm"
    x1: VarId
    e2: "CbnTerm"
    x2: VarId
    e3: "CbnTerm"


CbnTerm = Union[Unit, Var, Inl, Inr, Pair, Lam, App, Let, Sub, Seq, Split, Case]


def true_term(scope, mode: Mode) -> Inl:
    return Inl(Unit(), bool_type(scope, mode))


def false_term(scope, mode: Mode) -> Inr:
    return Inr(Unit(), bool_type(scope, mode))


def subterms(e: CbnTerm):
    """Immediate subterms, in evaluation-agnostic left-to-right order."""
    if isinstance(e, (Unit, Var)):
        return ()
    if isinstance(e, (Inl, Inr, Sub)):
        return (e.e,)
    if isinstance(e, Lam):
        return (e.body,)
    if isinstance(e, Case):
        return (e.e1, e.e2, e.e3)
    return (e.e1, e.e2)


def term_size(e: CbnTerm) -> int:
    return 1 + sum(term_size(s) for s in subterms(e))


# -------------------------------------------------------------- contexts


@dataclass(frozen=True)
class CbnEntry:
    x: VarId
    ty: CbnType
    latent: AttrVec


@dataclass(frozen=True)
class CbnCtx:
    entries: tuple[CbnEntry, ...] = ()

    @functools.cached_property
    def scope(self) -> tuple[VarId, ...]:
        return tuple(e.x for e in self.entries)

    def extend(self, x: VarId, ty: CbnType, latent: AttrVec) -> "CbnCtx":
        if x in self.scope:
            raise ScopeMismatch(f"variable {x} bound twice")
        return CbnCtx(self.entries + (CbnEntry(x, ty, latent),))

    def lookup(self, x: VarId, mode: Mode) -> tuple[CbnType, AttrVec]:
        """The entry for `x`, weakened to the full context scope."""
        for e in self.entries:
            if e.x == x:
                scope = self.scope
                return type_rescope(e.ty, scope, mode), vec_restrict(e.latent, scope, mode)
        raise UnboundVariable(f"unbound variable {x}")


def ctx_wf(ctx: CbnCtx, mode: Mode) -> bool:
    scope: tuple = ()
    for e in ctx.entries:
        if not wf_type(e.latent, e.ty, scope, mode):
            return False
        scope += (e.x,)
    return True


@dataclass(frozen=True)
class CbnJudgment:
    effect: AttrVec
    ty: CbnType


# ---------------------------------------------------------------- checker


def cbn_synth(ctx: CbnCtx, e: CbnTerm, mode: Mode) -> CbnJudgment:
    """Synthesize the effect and type of `e` under `ctx`."""
    if mode is Mode.EXTENDED and not ctx_wf(ctx, mode):
        raise IllFormedType("context is not well formed")
    return _Checker(mode).synth(ctx, e)


class _Checker:
    def __init__(self, mode: Mode):
        self.mode = mode
        self.ext = mode is Mode.EXTENDED

    def plus(self, *gs):
        return vec_sum(gs, self.mode)

    def lazify(self, g):
        return vec_lazify(g, self.mode) if self.ext else AttrVec.default(g.scope, self.mode)

    def require_scoped(self, t: CbnType, scope, what: str):
        if not type_scoped(t, scope):
            raise ScopeMismatch(f"{what} annotation is not scoped over {list(scope)}")
        for a in type_attrs(t):
            check_legal(a, self.mode)

    def require_wf(self, g, t, scope, what: str):
        if not wf_type(g, t, scope, self.mode):
            raise IllFormedType(f"{what}: type claims usage its derivation does not make")

    def synth(self, ctx: CbnCtx, e: CbnTerm) -> CbnJudgment:
        j = self._synth(ctx, e)
        scope = ctx.scope
        if j.effect.scope != scope or not type_scoped(j.ty, scope):
            raise ScopeEscape(f"judgment for {type(e).__name__} escapes scope {list(scope)}")
        return j

    def _synth(self, ctx: CbnCtx, e: CbnTerm) -> CbnJudgment:
        mode = self.mode
        scope = ctx.scope
        default = AttrVec.default(scope, mode)

        if isinstance(e, Unit):
            return CbnJudgment(default, TUnit())

        if isinstance(e, Var):
            ty, latent = ctx.lookup(e.x, mode)
            return CbnJudgment(vec_plus(latent, vec_singleton(scope, e.x, Attr.S, mode), mode), ty)

        if isinstance(e, (Inl, Inr)):
            annot = e.annot
            if not isinstance(annot, TSum):
                raise TypeMismatch("injection annotation must be a sum type")
            self.require_scoped(annot, scope, "injection")
            left = isinstance(e, Inl)
            want_t, want_g = (annot.t1, annot.g1) if left else (annot.t2, annot.g2)
            other_t, other_g = (annot.t2, annot.g2) if left else (annot.t1, annot.g1)
            j = self.synth(ctx, e.e)
            if not type_equal(j.ty, want_t):
                raise TypeMismatch("injected term does not have the annotated component type")
            if j.effect != want_g:
                raise TypeMismatch(
                    f"injected term has effect {j.effect.render(mode)}, annotation says {want_g.render(mode)}"
                )
            if not self.ext:
                return CbnJudgment(default, annot)
            if self.lazify(annot.g1) != self.lazify(annot.g2):
                raise IllFormedType("sum components must use the same variables")
            self.require_wf(other_g, other_t, scope, "injection")
            eff = self.lazify(self.plus(annot.g1, annot.g2, effects_of(other_t, scope, mode)))
            return CbnJudgment(eff, annot)

        if isinstance(e, Pair):
            j1 = self.synth(ctx, e.e1)
            j2 = self.synth(ctx, e.e2)
            eff = self.lazify(self.plus(j1.effect, j2.effect))
            return CbnJudgment(eff, TProd(j1.ty, j1.effect, j2.ty, j2.effect))

        if isinstance(e, Lam):
            self.require_scoped(e.arg_type, scope, "argument type")
            if e.arg_latent.scope != scope:
                raise ScopeMismatch("argument latent effect is not scoped over the context")
            for a in e.arg_latent.attrs:
                check_legal(a, mode)
            if self.ext:
                self.require_wf(e.arg_latent, e.arg_type, scope, "lambda argument")
            inner = ctx.extend(e.x, e.arg_type, e.arg_latent)
            jb = self.synth(inner, e.body)
            alpha = jb.effect[e.x]
            latent = vec_downshift(jb.effect, e.x)
            ty = TArrow(e.x, alpha, e.arg_type, e.arg_latent, latent, jb.ty)
            if not self.ext:
                return CbnJudgment(default, ty)
            ret_eff = vec_downshift(effects_of(jb.ty, scope + (e.x,), mode), e.x)
            if self.lazify(ret_eff) != self.lazify(self.plus(e.arg_latent, ret_eff)):
                raise IllFormedType("lambda return type mentions variables its argument uses")
            return CbnJudgment(self.lazify(self.plus(e.arg_latent, latent)), ty)

        if isinstance(e, App):
            jf = self.synth(ctx, e.e1)
            if not isinstance(jf.ty, TArrow):
                raise NotAFunction("applying a term that is not a function")
            arrow = jf.ty
            ja = self.synth(ctx, e.e2)
            if not type_equal(ja.ty, arrow.t1):
                raise TypeMismatch("argument type does not match the function's domain")
            if ja.effect != arrow.g1:
                raise TypeMismatch(
                    f"argument has effect {ja.effect.render(mode)}, function expects {arrow.g1.render(mode)}"
                )
            ty = type_downshift(arrow.t2, arrow.x)
            if self.ext:
                return CbnJudgment(self.plus(jf.effect, arrow.latent, self.lazify(ja.effect)), ty)
            return CbnJudgment(self.plus(arrow.latent, jf.effect), ty)

        if isinstance(e, Let):
            j1 = self.synth(ctx, e.e1)
            j2 = self.synth(ctx.extend(e.x, j1.ty, j1.effect), e.e2)
            eff = vec_downshift(j2.effect, e.x)
            if self.ext:
                eff = self.plus(self.lazify(j1.effect), eff)
            return CbnJudgment(eff, type_downshift(j2.ty, e.x))

        if isinstance(e, Sub):
            if e.target.scope != scope:
                raise ScopeMismatch("subsumption target is not scoped over the context")
            for a in e.target.attrs:
                check_legal(a, mode)
            j = self.synth(ctx, e.e)
            if not vec_leq(e.target, j.effect, mode):
                raise SubsumptionNotBelow(
                    f"target {e.target.render(mode)} is not below {j.effect.render(mode)}"
                )
            return CbnJudgment(e.target, j.ty)

        if isinstance(e, Seq):
            j1 = self.synth(ctx, e.e1)
            if not isinstance(j1.ty, TUnit):
                raise TypeMismatch("left side of a sequence must have type unit")
            j2 = self.synth(ctx, e.e2)
            return CbnJudgment(self.plus(j1.effect, j2.effect), j2.ty)

        if isinstance(e, Split):
            j1 = self.synth(ctx, e.e1)
            if not isinstance(j1.ty, TProd):
                raise TypeMismatch("splitting a term that is not a pair")
            p = j1.ty
            c1 = ctx.extend(e.x1, p.t1, p.g1)
            c2 = c1.extend(e.x2, type_rescope(p.t2, c1.scope, mode), vec_restrict(p.g2, c1.scope, mode))
            j2 = self.synth(c2, e.e2)
            eff = vec_downshift(vec_downshift(j2.effect, e.x2), e.x1)
            ty = type_downshift(type_downshift(j2.ty, e.x2), e.x1)
            return CbnJudgment(self.plus(j1.effect, eff), ty)

        if isinstance(e, Case):
            j1 = self.synth(ctx, e.e1)
            if not isinstance(j1.ty, TSum):
                raise TypeMismatch("case on a term that is not a sum")
            s = j1.ty
            jl = self.synth(ctx.extend(e.x1, s.t1, s.g1), e.e2)
            jr = self.synth(ctx.extend(e.x2, s.t2, s.g2), e.e3)
            gl = vec_downshift(jl.effect, e.x1)
            gr = vec_downshift(jr.effect, e.x2)
            if gl != gr:
                raise TypeMismatch(
                    f"case branches have different effects {gl.render(mode)} and {gr.render(mode)}"
                )
            tl = type_downshift(jl.ty, e.x1)
            tr = type_downshift(jr.ty, e.x2)
            if not type_equal(tl, tr):
                raise TypeMismatch("case branches have different types")
            return CbnJudgment(self.plus(j1.effect, gl), tl)

        raise TypeError(f"not a CBN term: {e!r}")


class MemoChecker(_Checker):
    """A checker that remembers judgments by term identity and scope.

    Use one instance per batch of work over terms that are not mutated;
    a term object checked twice under the same scope is synthesized once.
    """

    def __init__(self, mode: Mode):
        super().__init__(mode)
        self.memo = {}

    def synth(self, ctx: CbnCtx, e: CbnTerm) -> CbnJudgment:
        hit = self.memo.get(id(e))
        if hit is not None and hit[0] is e and hit[1] == ctx.scope:
            return hit[2]
        j = super().synth(ctx, e)
        self.memo[id(e)] = (e, ctx.scope, j)
        return j

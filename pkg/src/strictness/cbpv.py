"""Call-by-push-value types, terms and the strictness checker.

Checking doubles as elaboration: the returned term carries the vectors the
checker chose on thunks, lambdas and subsumptions, which the instrumented
evaluator replays. Those stamps are excluded from term equality.
"""

from __future__ import annotations

import functools

from dataclasses import dataclass, field, replace
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
)
from strictness.errors import (
    BranchTypeMismatch,
    NotAFunction,
    NotAReturner,
    NotAThunk,
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
class TU:
    """U_g B: a suspended computation whose forcing releases effect g."""

    g: AttrVec
    b: "CompType"


@dataclass(frozen=True)
class TProd:
    a1: "ValType"
    a2: "ValType"


@dataclass(frozen=True)
class TSum:
    a1: "ValType"
    a2: "ValType"


@dataclass(frozen=True)
class TArrow:
    a: "ValType"
    attr: Attr
    b: "CompType"


@dataclass(frozen=True)
class TF:
    a: "ValType"


ValType = Union[TUnit, TU, TProd, TSum]
CompType = Union[TArrow, TF]


def type_map_vectors(t, f):
    if isinstance(t, TUnit):
        return t
    if isinstance(t, TU):
        return TU(f(t.g), type_map_vectors(t.b, f))
    if isinstance(t, (TProd, TSum)):
        return type(t)(type_map_vectors(t.a1, f), type_map_vectors(t.a2, f))
    if isinstance(t, TArrow):
        return TArrow(type_map_vectors(t.a, f), t.attr, type_map_vectors(t.b, f))
    return TF(type_map_vectors(t.a, f))


def type_rescope(t, scope: tuple, mode: Mode):
    return type_map_vectors(t, lambda g: vec_restrict(g, scope, mode))


def type_downshift(t, x: VarId):
    return type_map_vectors(t, lambda g: vec_downshift(g, x))


def type_vectors(t):
    if isinstance(t, TU):
        yield t.g
        yield from type_vectors(t.b)
    elif isinstance(t, (TProd, TSum)):
        yield from type_vectors(t.a1)
        yield from type_vectors(t.a2)
    elif isinstance(t, TArrow):
        yield from type_vectors(t.a)
        yield from type_vectors(t.b)
    elif isinstance(t, TF):
        yield from type_vectors(t.a)


def type_scoped(t, scope: tuple) -> bool:
    return all(g.scope == scope for g in type_vectors(t))


def type_equal(t1, t2) -> bool:
    """Structural equality; vectors compare by their defaulted lookups."""
    return t1 == t2


def is_value_type(t) -> bool:
    return isinstance(t, (TUnit, TU, TProd, TSum))


# ---------------------------------------------------------------- terms
# Values


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class Var:
    x: VarId


@dataclass(frozen=True)
class Thunk:
    m: "Comp"
    gamma: Optional[AttrVec] = field(default=None, compare=False)


@dataclass(frozen=True)
class Inl:
    v: "Value"
    annot: TSum


@dataclass(frozen=True)
class Inr:
    v: "Value"
    annot: TSum


@dataclass(frozen=True)
class Pair:
    v1: "Value"
    v2: "Value"


# Computations


@dataclass(frozen=True)
class Lam:
    x: VarId
    arg_type: ValType
    m: "Comp"
    gamma: Optional[AttrVec] = field(default=None, compare=False)
    alpha: Optional[Attr] = field(default=None, compare=False)
    loc: Optional[tuple] = field(default=None, compare=False)


@dataclass(frozen=True)
class App:
    m: "Comp"
    v: "Value"


@dataclass(frozen=True)
class Force:
    v: "Value"


@dataclass(frozen=True)
class Let:
    x: VarId
    m1: "Comp"
    m2: "Comp"


@dataclass(frozen=True)
class Split:
    x1: VarId
    x2: VarId
    v: "Value"
    m: "Comp"


@dataclass(frozen=True)
class Sub:
    target: AttrVec
    m: "Comp"
    inferred: Optional[AttrVec] = field(default=None, compare=False)


@dataclass(frozen=True)
class Ret:
    v: "Value"


@dataclass(frozen=True)
class Seq:
    v: "Value"
    m: "Comp"


@dataclass(frozen=True)
class Case:
    v: "Value"
    x1: VarId
    m1: "Comp"
    x2: VarId
    m2: "Comp"


Value = Union[Unit, Var, Thunk, Inl, Inr, Pair]
Comp = Union[Lam, App, Force, Let, Split, Sub, Ret, Seq, Case]

VALUE_NODES = (Unit, Var, Thunk, Inl, Inr, Pair)


def is_value(t) -> bool:
    return isinstance(t, VALUE_NODES)


def children(t):
    """Immediate subterms (values and computations)."""
    if isinstance(t, (Unit, Var)):
        return ()
    if isinstance(t, Thunk):
        return (t.m,)
    if isinstance(t, (Inl, Inr)):
        return (t.v,)
    if isinstance(t, Pair):
        return (t.v1, t.v2)
    if isinstance(t, Lam):
        return (t.m,)
    if isinstance(t, App):
        return (t.m, t.v)
    if isinstance(t, (Force, Ret)):
        return (t.v,)
    if isinstance(t, Let):
        return (t.m1, t.m2)
    if isinstance(t, Split):
        return (t.v, t.m)
    if isinstance(t, Sub):
        return (t.m,)
    if isinstance(t, Seq):
        return (t.v, t.m)
    if isinstance(t, Case):
        return (t.v, t.m1, t.m2)
    raise TypeError(f"not a CBPV term: {t!r}")


def term_size(t) -> int:
    return 1 + sum(term_size(c) for c in children(t))


def free_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.x])
    if isinstance(t, Lam):
        return free_vars(t.m) - {t.x}
    if isinstance(t, Let):
        return free_vars(t.m1) | (free_vars(t.m2) - {t.x})
    if isinstance(t, Split):
        return free_vars(t.v) | (free_vars(t.m) - {t.x1, t.x2})
    if isinstance(t, Case):
        return free_vars(t.v) | (free_vars(t.m1) - {t.x1}) | (free_vars(t.m2) - {t.x2})
    return frozenset().union(*(free_vars(c) for c in children(t)))


# -------------------------------------------------------------- contexts


@dataclass(frozen=True)
class CbpvCtx:
    entries: tuple[tuple[VarId, ValType], ...] = ()

    @functools.cached_property
    def scope(self) -> tuple[VarId, ...]:
        return tuple(x for x, _ in self.entries)

    def extend(self, x: VarId, a: ValType) -> "CbpvCtx":
        if x in self.scope:
            raise ScopeMismatch(f"variable {x} bound twice")
        return CbpvCtx(self.entries + ((x, a),))

    def lookup(self, x: VarId, mode: Mode) -> ValType:
        for y, a in self.entries:
            if y == x:
                return type_rescope(a, self.scope, mode)
        raise UnboundVariable(f"unbound variable {x}")


@dataclass(frozen=True)
class CbpvJudgment:
    effect: AttrVec
    ty: object
    term: object


# ---------------------------------------------------------------- checker


def cbpv_synth_value(ctx: CbpvCtx, v, mode: Mode) -> CbpvJudgment:
    return _Checker(mode).value(ctx, v)


def cbpv_synth_comp(ctx: CbpvCtx, m, mode: Mode) -> CbpvJudgment:
    return _Checker(mode).comp(ctx, m)


def cbpv_synth(ctx: CbpvCtx, t, mode: Mode) -> CbpvJudgment:
    return cbpv_synth_value(ctx, t, mode) if is_value(t) else cbpv_synth_comp(ctx, t, mode)


class _Checker:
    def __init__(self, mode: Mode):
        self.mode = mode
        self.ext = mode is Mode.EXTENDED

    def plus(self, g1, g2):
        return vec_plus(g1, g2, self.mode)

    def require_scoped(self, t, scope, what):
        if not type_scoped(t, scope):
            raise ScopeMismatch(f"{what} annotation is not scoped over {list(scope)}")
        for g in type_vectors(t):
            for a in g.attrs:
                check_legal(a, self.mode)
        for a in _arrow_attrs(t):
            check_legal(a, self.mode)

    def _check(self, j: CbpvJudgment, scope) -> CbpvJudgment:
        if j.effect.scope != scope or not type_scoped(j.ty, scope):
            raise ScopeEscape(f"judgment for {type(j.term).__name__} escapes scope {list(scope)}")
        return j

    def value(self, ctx: CbpvCtx, v) -> CbpvJudgment:
        return self._check(self._value(ctx, v), ctx.scope)

    def comp(self, ctx: CbpvCtx, m) -> CbpvJudgment:
        return self._check(self._comp(ctx, m), ctx.scope)

    def _value(self, ctx: CbpvCtx, v) -> CbpvJudgment:
        mode, scope = self.mode, ctx.scope
        default = AttrVec.default(scope, mode)
        if isinstance(v, Unit):
            return CbpvJudgment(default, TUnit(), v)
        if isinstance(v, Var):
            a = ctx.lookup(v.x, mode)
            return CbpvJudgment(vec_singleton(scope, v.x, Attr.S, mode), a, v)
        if isinstance(v, Thunk):
            if not _is_comp(v.m):
                raise TypeMismatch("thunk body must be a computation")
            j = self.comp(ctx, v.m)
            eff = vec_lazify(j.effect, mode) if self.ext else default
            return CbpvJudgment(eff, TU(j.effect, j.ty), Thunk(j.term, gamma=j.effect))
        if isinstance(v, (Inl, Inr)):
            if not isinstance(v.annot, TSum):
                raise TypeMismatch("injection annotation must be a sum type")
            self.require_scoped(v.annot, scope, "injection")
            j = self.value(ctx, v.v)
            want = v.annot.a1 if isinstance(v, Inl) else v.annot.a2
            if not type_equal(j.ty, want):
                raise TypeMismatch("injected value does not have the annotated component type")
            return CbpvJudgment(j.effect, v.annot, type(v)(j.term, v.annot))
        if isinstance(v, Pair):
            j1 = self.value(ctx, v.v1)
            j2 = self.value(ctx, v.v2)
            return CbpvJudgment(self.plus(j1.effect, j2.effect), TProd(j1.ty, j2.ty), Pair(j1.term, j2.term))
        raise TypeMismatch(f"expected a value, found {type(v).__name__}")

    def _comp(self, ctx: CbpvCtx, m) -> CbpvJudgment:
        mode, scope = self.mode, ctx.scope
        if isinstance(m, Lam):
            self.require_scoped(m.arg_type, scope, "argument type")
            if not is_value_type(m.arg_type):
                raise TypeMismatch("lambda argument must have a value type")
            j = self.comp(ctx.extend(m.x, m.arg_type), m.m)
            alpha = j.effect[m.x]
            eff = vec_downshift(j.effect, m.x)
            ty = TArrow(m.arg_type, alpha, type_downshift(j.ty, m.x))
            return CbpvJudgment(eff, ty, replace(m, m=j.term, gamma=eff, alpha=alpha))
        if isinstance(m, App):
            jf = self.comp(ctx, m.m)
            if not isinstance(jf.ty, TArrow):
                raise NotAFunction("applying a computation that is not a function")
            ja = self.value(ctx, m.v)
            if not type_equal(ja.ty, jf.ty.a):
                raise TypeMismatch("argument type does not match the function's domain")
            return CbpvJudgment(self.plus(jf.effect, ja.effect), jf.ty.b, App(jf.term, ja.term))
        if isinstance(m, Force):
            j = self.value(ctx, m.v)
            if not isinstance(j.ty, TU):
                raise NotAThunk("forcing a value that is not a thunk")
            return CbpvJudgment(self.plus(j.effect, j.ty.g), j.ty.b, Force(j.term))
        if isinstance(m, Let):
            j1 = self.comp(ctx, m.m1)
            if not isinstance(j1.ty, TF):
                raise NotAReturner("let-bound computation must have a returner type")
            j2 = self.comp(ctx.extend(m.x, j1.ty.a), m.m2)
            eff = self.plus(j1.effect, vec_downshift(j2.effect, m.x))
            return CbpvJudgment(eff, type_downshift(j2.ty, m.x), Let(m.x, j1.term, j2.term))
        if isinstance(m, Split):
            j1 = self.value(ctx, m.v)
            if not isinstance(j1.ty, TProd):
                raise TypeMismatch("splitting a value that is not a pair")
            c1 = ctx.extend(m.x1, j1.ty.a1)
            c2 = c1.extend(m.x2, type_rescope(j1.ty.a2, c1.scope, mode))
            j2 = self.comp(c2, m.m)
            eff = vec_downshift(vec_downshift(j2.effect, m.x2), m.x1)
            ty = type_downshift(type_downshift(j2.ty, m.x2), m.x1)
            return CbpvJudgment(self.plus(j1.effect, eff), ty, Split(m.x1, m.x2, j1.term, j2.term))
        if isinstance(m, Sub):
            if m.target.scope != scope:
                raise ScopeMismatch("subsumption target is not scoped over the context")
            for a in m.target.attrs:
                check_legal(a, mode)
            j = self.comp(ctx, m.m)
            if not vec_leq(m.target, j.effect, mode):
                raise SubsumptionNotBelow(
                    f"target {m.target.render(mode)} is not below {j.effect.render(mode)}"
                )
            return CbpvJudgment(m.target, j.ty, Sub(m.target, j.term, inferred=j.effect))
        if isinstance(m, Ret):
            j = self.value(ctx, m.v)
            return CbpvJudgment(j.effect, TF(j.ty), Ret(j.term))
        if isinstance(m, Seq):
            j1 = self.value(ctx, m.v)
            if not isinstance(j1.ty, TUnit):
                raise TypeMismatch("sequencing a value that is not unit")
            j2 = self.comp(ctx, m.m)
            return CbpvJudgment(self.plus(j1.effect, j2.effect), j2.ty, Seq(j1.term, j2.term))
        if isinstance(m, Case):
            j1 = self.value(ctx, m.v)
            if not isinstance(j1.ty, TSum):
                raise TypeMismatch("case on a value that is not a sum")
            jl = self.comp(ctx.extend(m.x1, j1.ty.a1), m.m1)
            jr = self.comp(ctx.extend(m.x2, j1.ty.a2), m.m2)
            gl, gr = vec_downshift(jl.effect, m.x1), vec_downshift(jr.effect, m.x2)
            if gl != gr:
                raise BranchTypeMismatch(
                    f"case branches have different effects {gl.render(mode)} and {gr.render(mode)}"
                )
            bl, br = type_downshift(jl.ty, m.x1), type_downshift(jr.ty, m.x2)
            if not type_equal(bl, br):
                raise BranchTypeMismatch("case branches have different types")
            term = Case(j1.term, m.x1, jl.term, m.x2, jr.term)
            return CbpvJudgment(self.plus(j1.effect, gl), bl, term)
        raise TypeMismatch(f"expected a computation, found {type(m).__name__}")


def _is_comp(t) -> bool:
    return isinstance(t, (Lam, App, Force, Let, Split, Sub, Ret, Seq, Case))


def _arrow_attrs(t):
    if isinstance(t, TArrow):
        yield t.attr
        yield from _arrow_attrs(t.a)
        yield from _arrow_attrs(t.b)
    elif isinstance(t, TU):
        yield from _arrow_attrs(t.b)
    elif isinstance(t, (TProd, TSum)):
        yield from _arrow_attrs(t.a1)
        yield from _arrow_attrs(t.a2)
    elif isinstance(t, TF):
        yield from _arrow_attrs(t.a)


class MemoChecker(_Checker):
    """A checker that remembers judgments by term identity and scope."""

    def __init__(self, mode: Mode):
        super().__init__(mode)
        self.memo = {}

    def _cached(self, ctx, t, synth):
        hit = self.memo.get(id(t))
        if hit is not None and hit[0] is t and hit[1] == ctx.scope:
            return hit[2]
        j = synth(ctx, t)
        self.memo[id(t)] = (t, ctx.scope, j)
        return j

    def value(self, ctx, v):
        return self._cached(ctx, v, super().value)

    def comp(self, ctx, m):
        return self._cached(ctx, m, super().comp)

"""Whole programs: checking, lowering to CBPV, environments, subterm sites.

A program is a list of top-level declarations followed by `main`. CBN
programs are run through their CBPV translation: a CBN declaration becomes a
thunk of its translated body, evaluated in the preceding environment.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from strictness import cbn, cbpv
from strictness.attrs import Attr, AttrVec, Mode, VarId, vec_leq, vec_restrict
from strictness.errors import SubsumptionNotBelow, TypeMismatch
from strictness.evaluation import Env, Success, eval_value
from strictness.syntax import Decl, Program
from strictness.translate import translate_ctx, translate_entry, translate_term

# ---------------------------------------------------------------- checking


@dataclass
class Checked:
    """A checked program: its context and the judgment for main."""

    program: Program
    ctx: object  # CbnCtx or CbpvCtx
    decl_judgments: list  # per declaration, None for abstract ones
    judgment: object  # CbnJudgment or CbpvJudgment

    @property
    def mode(self) -> Mode:
        return self.program.mode

    @property
    def lang(self) -> str:
        return self.program.lang


def check_program(p: Program) -> Checked:
    if p.lang == "cbn":
        return _check_cbn(p)
    ctx = cbpv.CbpvCtx()
    js = []
    for d in p.decls:
        ty = d.ty
        j = None
        if d.term is not None:
            j = cbpv.cbpv_synth_value(ctx, d.term, p.mode)
            if ty is not None and not cbpv.type_equal(j.ty, ty):
                raise TypeMismatch(f"declaration {d.name}: value does not have the declared type")
            ty = j.ty
        js.append(j)
        ctx = ctx.extend(d.name, ty)
    return Checked(p, ctx, js, cbpv.cbpv_synth(ctx, p.main, p.mode))


def _check_cbn(p: Program) -> Checked:
    mode = p.mode
    ctx = cbn.CbnCtx()
    js = []
    for d in p.decls:
        ty, latent = d.ty, d.latent
        j = None
        if d.term is not None:
            j = cbn.cbn_synth(ctx, d.term, mode)
            if ty is not None and not cbn.type_equal(j.ty, ty):
                raise TypeMismatch(f"declaration {d.name}: term does not have the declared type")
            if latent is not None and not vec_leq(latent, j.effect, mode):
                raise SubsumptionNotBelow(f"declaration {d.name}: declared effect is not below the inferred one")
            ty = j.ty
            latent = j.effect if latent is None else latent
        if latent is None:
            latent = AttrVec.default(ctx.scope, mode)
        js.append(j)
        ctx = ctx.extend(d.name, ty, latent)
    return Checked(p, ctx, js, cbn.cbn_synth(ctx, p.main, mode))


# ---------------------------------------------------------------- lowering


@dataclass
class Lowered:
    """A checked program in CBPV form, with every term elaborated."""

    mode: Mode
    ctx: cbpv.CbpvCtx
    decls: list  # (name, elaborated value or None)
    main: object
    judgment: cbpv.CbpvJudgment


def lower(c: Checked) -> Lowered:
    """CBPV view of a checked program; CBN programs are translated."""
    mode = c.mode
    if c.lang == "cbpv":
        decls = [(d.name, None if j is None else j.term) for d, j in zip(c.program.decls, c.decl_judgments)]
        return Lowered(mode, c.ctx, decls, c.judgment.term, c.judgment)
    tctx = translate_ctx(c.ctx, mode)
    decls = []
    prefix = cbn.CbnCtx()
    for d, entry in zip(c.program.decls, c.ctx.entries):
        v = None
        if d.term is not None:
            body = translate_term(prefix, _with_latent(d, entry, prefix, mode), mode)
            tprefix = cbpv.CbpvCtx(tctx.entries[: len(prefix.entries)])
            j = cbpv.cbpv_synth_value(tprefix, cbpv.Thunk(body), mode)
            want = translate_entry(entry.ty, entry.latent, prefix.scope, mode)
            if not cbpv.type_equal(j.ty, want):
                raise TypeMismatch(f"declaration {d.name}: translation does not have the translated type")
            v = j.term
        decls.append((d.name, v))
        prefix = prefix.extend(entry.x, entry.ty, entry.latent)
    main = translate_term(c.ctx, c.program.main, mode)
    j = cbpv.cbpv_synth_comp(tctx, main, mode)
    return Lowered(mode, tctx, decls, j.term, j)


def _with_latent(d: Decl, entry, prefix, mode):
    """A declaration body, lowered to its declared latent effect if any."""
    if d.latent is None:
        return d.term
    j = cbn.cbn_synth(prefix, d.term, mode)
    return d.term if j.effect == entry.latent else cbn.Sub(entry.latent, d.term)


# ------------------------------------------------------------ environments


def _extend_missing(env: Env, x: VarId) -> Env:
    names = dict(env.names)
    names[x] = x
    return Env(env.scope + (x,), names, dict(env.bindings))


def build_env(low: Lowered, missing=(), fuel: Optional[int] = None) -> Env:
    """Evaluate the declarations in order.

    Names in `missing`, abstract declarations, and declarations whose own
    evaluation fails are left unbound.
    """
    env = Env()
    kw = {} if fuel is None else {"fuel": fuel}
    for x, v in low.decls:
        if v is None or x in missing:
            env = _extend_missing(env, x)
            continue
        out = eval_value(env, v, low.mode, **kw)
        env = env.extend(x, out.terminal, x) if isinstance(out, Success) else _extend_missing(env, x)
    return env


# ------------------------------------------------------------------- sites


def _cbpv_children(ctx: cbpv.CbpvCtx, t, mode):
    """(field, context) pairs for the term-valued fields of a CBPV node."""
    C = cbpv
    if isinstance(t, (C.Unit, C.Var)):
        return []
    if isinstance(t, C.Thunk):
        return [("m", ctx)]
    if isinstance(t, (C.Inl, C.Inr, C.Ret, C.Force)):
        return [("v", ctx)]
    if isinstance(t, C.Pair):
        return [("v1", ctx), ("v2", ctx)]
    if isinstance(t, C.Lam):
        return [("m", ctx.extend(t.x, t.arg_type))]
    if isinstance(t, C.App):
        return [("m", ctx), ("v", ctx)]
    if isinstance(t, C.Sub):
        return [("m", ctx)]
    if isinstance(t, C.Seq):
        return [("v", ctx), ("m", ctx)]
    if isinstance(t, C.Let):
        a = C.cbpv_synth_comp(ctx, t.m1, mode).ty.a
        return [("m1", ctx), ("m2", ctx.extend(t.x, a))]
    if isinstance(t, C.Split):
        p = C.cbpv_synth_value(ctx, t.v, mode).ty
        c1 = ctx.extend(t.x1, p.a1)
        return [("v", ctx), ("m", c1.extend(t.x2, C.type_rescope(p.a2, c1.scope, mode)))]
    if isinstance(t, C.Case):
        s = C.cbpv_synth_value(ctx, t.v, mode).ty
        return [("v", ctx), ("m1", ctx.extend(t.x1, s.a1)), ("m2", ctx.extend(t.x2, s.a2))]
    raise TypeError(f"not a CBPV term: {t!r}")


def _cbn_children(ctx: cbn.CbnCtx, e, mode):
    C = cbn
    if isinstance(e, (C.Unit, C.Var)):
        return []
    if isinstance(e, (C.Inl, C.Inr, C.Sub)):
        return [("e", ctx)]
    if isinstance(e, C.Lam):
        return [("body", ctx.extend(e.x, e.arg_type, e.arg_latent))]
    if isinstance(e, (C.Pair, C.App, C.Seq)):
        return [("e1", ctx), ("e2", ctx)]
    if isinstance(e, C.Let):
        j = C._Checker(mode).synth(ctx, e.e1)
        return [("e1", ctx), ("e2", ctx.extend(e.x, j.ty, j.effect))]
    if isinstance(e, C.Split):
        p = C._Checker(mode).synth(ctx, e.e1).ty
        c1 = ctx.extend(e.x1, p.t1, p.g1)
        c2 = c1.extend(e.x2, C.type_rescope(p.t2, c1.scope, mode), vec_restrict(p.g2, c1.scope, mode))
        return [("e1", ctx), ("e2", c2)]
    if isinstance(e, C.Case):
        s = C._Checker(mode).synth(ctx, e.e1).ty
        return [("e1", ctx), ("e2", ctx.extend(e.x1, s.t1, s.g1)), ("e3", ctx.extend(e.x2, s.t2, s.g2))]
    raise TypeError(f"not a CBN term: {e!r}")


def sites(lang: str, ctx, term, mode: Mode):
    """Every subterm with its path (tuple of field names) and context, pre-order."""
    children = _cbn_children if lang == "cbn" else _cbpv_children
    stack = [((), ctx, term)]
    while stack:
        path, c, t = stack.pop()
        yield path, c, t
        kids = children(c, t, mode)
        for name, c2 in reversed(kids):
            stack.append((path + (name,), c2, getattr(t, name)))


def replace_at(term, path: tuple, new):
    if not path:
        return new
    head, rest = path[0], path[1:]
    return dataclasses.replace(term, **{head: replace_at(getattr(term, head), rest, new)})


# --------------------------------------------------------------- weakening


def weaken_front(obj, u: VarId, mode: Mode):
    """Add `u` at the front of the scope of every vector inside `obj`.

    Works on terms, types and contexts of either calculus, because every
    vector in them is scoped over the enclosing context plus local binders.
    """
    if isinstance(obj, AttrVec):
        return vec_restrict(obj, (u,) + obj.scope, mode)
    if isinstance(obj, tuple):
        return tuple(weaken_front(o, u, mode) for o in obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        changes = {}
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            w = weaken_front(v, u, mode)
            if w is not v:
                changes[f.name] = w
        return dataclasses.replace(obj, **changes) if changes else obj
    return obj


def with_unused(lang: str, ctx, term, mode: Mode, u: VarId = VarId("_unused")):
    """Context and term with a fresh, never-mentioned variable at the front."""
    term = weaken_front(term, u, mode)
    if lang == "cbn":
        rest = tuple(weaken_front(e, u, mode) for e in ctx.entries)
        head = cbn.CbnEntry(u, cbn.TUnit(), AttrVec.default((), mode))
        return cbn.CbnCtx((head,) + rest), term
    rest = tuple((x, weaken_front(a, u, mode)) for x, a in ctx.entries)
    return cbpv.CbpvCtx(((u, cbpv.TUnit()),) + rest), term


# ------------------------------------------------------------------ report

CLASSES = {Attr.S: "strict", Attr.L: "lazy", Attr.Q: "indeterminate", Attr.U: "unused"}


def classify(a: Attr) -> str:
    return CLASSES[a]


def lambda_attrs(c: Checked) -> list:
    """(location, binder, attribute) for every lambda in main, in source order."""
    out = []
    for _, ctx, t in sites(c.lang, c.ctx, c.program.main, c.mode):
        if c.lang == "cbn" and isinstance(t, cbn.Lam):
            ty = cbn.cbn_synth(ctx, t, c.mode).ty
            out.append((t.loc, t.x, ty.attr))
        elif c.lang == "cbpv" and isinstance(t, cbpv.Lam):
            ty = cbpv.cbpv_synth_comp(ctx, t, c.mode).ty
            out.append((t.loc, t.x, ty.attr))
    return out

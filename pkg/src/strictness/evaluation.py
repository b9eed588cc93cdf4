"""Big-step evaluation of CBPV terms over partial environments.

One evaluator serves two purposes. Instrumented, it replays the vectors the
checker stamped on the term and computes the effect of every derivation.
Erased, it skips all vector bookkeeping and only decides whether evaluation
succeeds, which is the oracle for semantic failure.

Every runtime binding gets its own instance id. A closure's vector is kept
over instance ids, so forcing it inside a later activation of the same binder
cannot confuse the two bindings when the vector is restricted.
"""

from __future__ import annotations

import dataclasses

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from strictness import cbpv
from strictness.attrs import (
    Attr,
    AttrVec,
    Mode,
    VarId,
    default_attr,
    legal_attrs,
    vec_downshift,
    vec_lazify,
    vec_leq,
    vec_plus,
    vec_singleton,
)
from strictness.errors import UnknownVariable

# ------------------------------------------------------------- terminals


@dataclass(frozen=True)
class WUnit:
    pass


@dataclass(frozen=True)
class WPair:
    w1: "TerminalValue"
    w2: "TerminalValue"


@dataclass(frozen=True)
class WInl:
    w: "TerminalValue"


@dataclass(frozen=True)
class WInr:
    w: "TerminalValue"


@dataclass(frozen=True, eq=False)
class WThunk:
    """{γ, ρ, M}: a suspended computation and the environment it captured.

    `outer` gives attributes for instances outside the captured scope. They
    come from the argument type of a closure the thunk was passed into, which
    may mention that closure's own variables.
    """

    gamma: Optional[AttrVec]
    env: "Env"
    body: object
    outer: tuple = ()


@dataclass(frozen=True)
class TRet:
    w: "TerminalValue"


@dataclass(frozen=True, eq=False)
class TLam:
    gamma: Optional[AttrVec]
    env: "Env"
    x: VarId
    body: object
    arg_type: object = None


TerminalValue = Union[WUnit, WPair, WInl, WInr, WThunk]
TerminalComp = Union[TRet, TLam]


@dataclass(frozen=True, eq=False)
class Env:
    """A partial environment.

    `scope` lists instance ids in binding order; `names` maps each source
    name to its current instance; instances without a binding are missing.
    """

    scope: tuple = ()
    names: dict = field(default_factory=dict)
    bindings: dict = field(default_factory=dict)

    @classmethod
    def top(cls, scope, bindings: dict) -> "Env":
        scope = tuple(scope)
        extra = set(bindings) - set(scope)
        if extra:
            raise UnknownVariable(f"bindings for variables outside the scope: {sorted(extra)}")
        return cls(scope, {x: x for x in scope}, dict(bindings))

    def instance(self, x: VarId):
        return self.names.get(x)

    def lookup(self, x: VarId):
        inst = self.names.get(x)
        return None if inst is None else self.bindings.get(inst)

    def is_missing(self, x: VarId) -> bool:
        inst = self.names.get(x)
        return inst is not None and inst not in self.bindings

    def extend(self, x: VarId, w, inst) -> "Env":
        names = dict(self.names)
        names[x] = inst
        bindings = dict(self.bindings)
        bindings[inst] = w
        return Env(self.scope + (inst,), names, bindings)

    def bound_names(self):
        return [x for x, inst in self.names.items() if inst in self.bindings]

    def name_of(self, inst):
        for x, i in self.names.items():
            if i == inst:
                return x
        return inst


def drop_binding(env: Env, x: VarId) -> Env:
    """Remove the binding of `x`; it stays in scope as a missing variable."""
    inst = env.instance(x)
    if inst is None:
        raise UnknownVariable(f"{x} is not in the environment's scope")
    bindings = {i: w for i, w in env.bindings.items() if i != inst}
    return Env(env.scope, dict(env.names), bindings)


# --------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Success:
    terminal: object
    effect: Optional[AttrVec] = None


@dataclass(frozen=True)
class FailMissing:
    x: VarId


@dataclass(frozen=True)
class FailStuck:
    reason: str


Outcome = Union[Success, FailMissing, FailStuck]


class _Missing(Exception):
    def __init__(self, x):
        self.x = x


class _Stuck(Exception):
    pass


class FuelExhausted(AssertionError):
    """The calculus has no recursion, so running out of fuel is a bug."""


DEFAULT_FUEL = 2_000_000

# Instance ids are unique per process so that closures built by one run can
# be forced safely inside another.
_INSTANCES = itertools.count(1)


class _Machine:
    def __init__(self, mode: Mode, track: bool, check: bool, fuel: int):
        self.mode = mode
        self.track = track
        self.check = check and track
        self.fuel = fuel
        # optional node -> vector override, consulted whenever a vector is read
        self.choose = None

    # -- vector helpers (instrumented mode only)

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("evaluation ran out of fuel")

    def default(self, env):
        return AttrVec.default(env.scope, self.mode)

    def to_instances(self, g: Optional[AttrVec], env: Env, what: str) -> AttrVec:
        if g is None:
            raise _Stuck(f"{what} carries no vector; elaborate the term first")
        try:
            scope = tuple(env.names[x] for x in g.scope)
        except KeyError as exc:
            raise _Stuck(f"{what} mentions {exc.args[0]}, which is not in scope") from None
        if scope != env.scope:
            raise _Stuck(f"{what} vector is not scoped over the environment")
        return AttrVec(scope, g.attrs)

    def vec_of(self, node, stored):
        return stored if self.choose is None else self.choose(node, stored)

    def adjust(self, w, a, env: Env):
        """Carry the attributes an argument type gives to variables that `w` never saw.

        `a` is a closure's argument type, scoped over the closure's `env`.
        """
        if not self.track or a is None:
            return w
        if isinstance(w, WThunk) and isinstance(a, cbpv.TU) and w.gamma is not None:
            outer = dict(w.outer)
            for x, attr in a.g.items():
                inst = env.names.get(x)
                if inst is not None and inst not in w.gamma:
                    outer.setdefault(inst, attr)
            return WThunk(w.gamma, w.env, w.body, tuple(outer.items()))
        if isinstance(w, WPair) and isinstance(a, cbpv.TProd):
            return WPair(self.adjust(w.w1, a.a1, env), self.adjust(w.w2, a.a2, env))
        if isinstance(w, WInl) and isinstance(a, cbpv.TSum):
            return WInl(self.adjust(w.w, a.a1, env))
        if isinstance(w, WInr) and isinstance(a, cbpv.TSum):
            return WInr(self.adjust(w.w, a.a2, env))
        return w

    def released(self, w: WThunk, scope: tuple) -> AttrVec:
        """A forced thunk's vector seen from `scope` (the restriction γ|dom)."""
        outer = dict(w.outer)
        d = default_attr(self.mode)
        return AttrVec(scope, tuple(w.gamma[i] if i in w.gamma else outer.get(i, d) for i in scope))

    def fresh(self, x: VarId):
        return f"{x}@{next(_INSTANCES)}"

    # -- values

    def value(self, env: Env, v):
        self.tick()
        track = self.track
        if isinstance(v, cbpv.Unit):
            return WUnit(), self.default(env) if track else None
        if isinstance(v, cbpv.Var):
            inst = env.instance(v.x)
            if inst is None:
                raise _Stuck(f"variable {v.x} is not in scope")
            if inst not in env.bindings:
                raise _Missing(v.x)
            eff = vec_singleton(env.scope, inst, Attr.S, self.mode) if track else None
            return env.bindings[inst], eff
        if isinstance(v, cbpv.Thunk):
            if not track:
                return WThunk(None, env, v.m), None
            g = self.to_instances(self.vec_of(v, v.gamma), env, "thunk")
            eff = vec_lazify(g, self.mode) if self.mode is Mode.EXTENDED else self.default(env)
            return WThunk(g, env, v.m), eff
        if isinstance(v, (cbpv.Inl, cbpv.Inr)):
            w, eff = self.value(env, v.v)
            return (WInl(w) if isinstance(v, cbpv.Inl) else WInr(w)), eff
        if isinstance(v, cbpv.Pair):
            w1, g1 = self.value(env, v.v1)
            w2, g2 = self.value(env, v.v2)
            return WPair(w1, w2), vec_plus(g1, g2, self.mode) if track else None
        raise _Stuck(f"not a value: {type(v).__name__}")

    # -- computations

    def plus(self, g1, g2):
        return vec_plus(g1, g2, self.mode) if self.track else None

    def comp(self, env: Env, m):
        self.tick()
        track, mode = self.track, self.mode
        if isinstance(m, cbpv.Ret):
            w, g = self.value(env, m.v)
            return TRet(w), g
        if isinstance(m, cbpv.Lam):
            if not track:
                return TLam(None, env, m.x, m.m, m.arg_type), None
            g = self.to_instances(self.vec_of(m, m.gamma), env, "lambda")
            return TLam(g, env, m.x, m.m, m.arg_type), g
        if isinstance(m, cbpv.App):
            t1, g1 = self.comp(env, m.m)
            if not isinstance(t1, TLam):
                raise _Stuck("applying something that is not a lambda")
            w, g2 = self.value(env, m.v)
            w = self.adjust(w, t1.arg_type, t1.env)
            inst = self.fresh(t1.x)
            t, gb = self.comp(t1.env.extend(t1.x, w, inst), t1.body)
            if self.check and vec_downshift(gb, inst) != t1.gamma:
                raise _Stuck("lambda body effect differs from the closure's vector")
            return t, self.plus(g1, g2)
        if isinstance(m, cbpv.Force):
            w, g1 = self.value(env, m.v)
            if not isinstance(w, WThunk):
                raise _Stuck("forcing something that is not a thunk")
            t, gb = self.comp(w.env, w.body)
            if not track:
                return t, None
            if self.check and gb != w.gamma:
                raise _Stuck("thunk body effect differs from the closure's vector")
            return t, vec_plus(g1, self.released(w, env.scope), mode)
        if isinstance(m, cbpv.Let):
            t1, g1 = self.comp(env, m.m1)
            if not isinstance(t1, TRet):
                raise _Stuck("let-binding something that does not return")
            inst = self.fresh(m.x)
            t, g2 = self.comp(env.extend(m.x, t1.w, inst), m.m2)
            return t, self.plus(g1, vec_downshift(g2, inst) if track else None)
        if isinstance(m, cbpv.Split):
            w, g1 = self.value(env, m.v)
            if not isinstance(w, WPair):
                raise _Stuck("splitting something that is not a pair")
            i1, i2 = self.fresh(m.x1), self.fresh(m.x2)
            t, g2 = self.comp(env.extend(m.x1, w.w1, i1).extend(m.x2, w.w2, i2), m.m)
            if not track:
                return t, None
            return t, vec_plus(g1, vec_downshift(vec_downshift(g2, i2), i1), mode)
        if isinstance(m, cbpv.Sub):
            t, g = self.comp(env, m.m)
            if not track:
                return t, None
            target = self.to_instances(self.vec_of(m, m.target), env, "subsumption")
            if self.check and not vec_leq(target, g, mode):
                raise _Stuck("subsumption target is not below the inferred effect")
            return t, target
        if isinstance(m, cbpv.Seq):
            w, g1 = self.value(env, m.v)
            if not isinstance(w, WUnit):
                raise _Stuck("sequencing something that is not unit")
            t, g2 = self.comp(env, m.m)
            return t, self.plus(g1, g2)
        if isinstance(m, cbpv.Case):
            w, g1 = self.value(env, m.v)
            if isinstance(w, WInl):
                x, body = m.x1, m.m1
            elif isinstance(w, WInr):
                x, body = m.x2, m.m2
            else:
                raise _Stuck("case on something that is not an injection")
            inst = self.fresh(x)
            t, g2 = self.comp(env.extend(x, w.w, inst), body)
            return t, self.plus(g1, vec_downshift(g2, inst) if track else None)
        raise _Stuck(f"not a computation: {type(m).__name__}")

    def run(self, env: Env, term) -> Outcome:
        try:
            if cbpv.is_value(term):
                t, g = self.value(env, term)
            else:
                t, g = self.comp(env, term)
        except _Missing as exc:
            return FailMissing(exc.x)
        except _Stuck as exc:
            return FailStuck(str(exc))
        if g is not None:
            g = AttrVec(tuple(env.name_of(i) for i in g.scope), g.attrs)
        return Success(t, g)


def eval_value(env: Env, v, mode: Mode, check: bool = True, fuel: int = DEFAULT_FUEL) -> Outcome:
    return _Machine(mode, True, check, fuel).run(env, v)


def eval_comp(env: Env, m, mode: Mode, check: bool = True, fuel: int = DEFAULT_FUEL) -> Outcome:
    return _Machine(mode, True, check, fuel).run(env, m)


def eval_erased(env: Env, term, fuel: int = DEFAULT_FUEL) -> Outcome:
    """Evaluate ignoring every vector; only success and failure matter."""
    return _Machine(Mode.BASE, False, False, fuel).run(env, term)


def apply_closure(t: TLam, w, mode: Mode, track: bool = True, fuel: int = DEFAULT_FUEL) -> Outcome:
    """Evaluate a lambda closure's body with its argument bound to `w`."""
    machine = _Machine(mode, track, track, fuel)
    inst = machine.fresh(t.x)
    env = t.env.extend(t.x, machine.adjust(w, t.arg_type, t.env), inst)
    try:
        res, g = machine.comp(env, t.body)
    except _Missing as exc:
        return FailMissing(exc.x)
    except _Stuck as exc:
        return FailStuck(str(exc))
    if track and vec_downshift(g, inst) != t.gamma:
        return FailStuck("lambda body effect differs from the closure's vector")
    return Success(res, None if g is None else vec_downshift(g, inst))


# ----------------------------------------------------- equivalence modulo γ


def eq_mod_gamma(a, b, ignore=()) -> bool:
    """Structural equality that ignores every stored vector.

    Names in `ignore` are skipped when closure environments are compared;
    lazy soundness uses this for the one binding it removed.
    """
    return _Equiv(ignore).eq(a, b)


def erase_vectors(obj):
    """`obj` with every attribute vector replaced by None."""
    if isinstance(obj, AttrVec):
        return None
    if isinstance(obj, tuple):
        return tuple(erase_vectors(o) for o in obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        changes = {f.name: erase_vectors(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        return dataclasses.replace(obj, **changes)
    return obj


class _Equiv:
    def __init__(self, ignore=()):
        self.seen: set = set()
        self.ignore = frozenset(ignore)

    def eq(self, a, b) -> bool:
        if isinstance(a, Env) or isinstance(b, Env):
            return isinstance(a, Env) and isinstance(b, Env) and self.env(a, b)
        if type(a) is not type(b):
            return False
        if isinstance(a, WUnit):
            return True
        if isinstance(a, WPair):
            return self.eq(a.w1, b.w1) and self.eq(a.w2, b.w2)
        if isinstance(a, (WInl, WInr, TRet)):
            return self.eq(a.w, b.w)
        if isinstance(a, WThunk):
            return self.same_code(a.body, b.body) and self.env(a.env, b.env)
        if isinstance(a, TLam):
            return a.x == b.x and self.same_code(a.body, b.body) and self.env(a.env, b.env)
        raise TypeError(f"not a terminal: {a!r}")

    def same_code(self, t1, t2) -> bool:
        return t1 is t2 or t1 == t2 or erase_vectors(t1) == erase_vectors(t2)

    def env(self, r1: Env, r2: Env) -> bool:
        key = (id(r1), id(r2))
        if r1 is r2 or key in self.seen:
            return True
        self.seen.add(key)
        if set(r1.names) != set(r2.names):
            return False
        for x in r1.names:
            if x in self.ignore:
                continue
            w1, w2 = r1.lookup(x), r2.lookup(x)
            if (w1 is None) != (w2 is None):
                return False
            if w1 is not None and not self.eq(w1, w2):
                return False
        return True


# -------------------------------------------------------- semantic failure


def choice_nodes(term) -> list:
    """Pre-order list of nodes whose vector the semantics may choose freely."""
    out = []

    def walk(t):
        if isinstance(t, (cbpv.Thunk, cbpv.Lam, cbpv.Sub)):
            out.append(t)
        for c in cbpv.children(t):
            walk(c)

    walk(term)
    return out


def restamp(term, vectors: list):
    """Replace the vectors of the choice nodes (pre-order) with `vectors`."""
    it = iter(vectors)

    def go(t):
        if isinstance(t, (cbpv.Unit, cbpv.Var)):
            return t
        if isinstance(t, cbpv.Thunk):
            g = next(it)
            return cbpv.Thunk(go(t.m), gamma=g)
        if isinstance(t, cbpv.Lam):
            g = next(it)
            return replace(t, gamma=g, m=go(t.m))
        if isinstance(t, cbpv.Sub):
            g = next(it)
            return cbpv.Sub(g, go(t.m), inferred=t.inferred)
        if isinstance(t, (cbpv.Inl, cbpv.Inr)):
            return type(t)(go(t.v), t.annot)
        if isinstance(t, cbpv.Pair):
            return cbpv.Pair(go(t.v1), go(t.v2))
        if isinstance(t, cbpv.App):
            return cbpv.App(go(t.m), go(t.v))
        if isinstance(t, cbpv.Force):
            return cbpv.Force(go(t.v))
        if isinstance(t, cbpv.Ret):
            return cbpv.Ret(go(t.v))
        if isinstance(t, cbpv.Let):
            return cbpv.Let(t.x, go(t.m1), go(t.m2))
        if isinstance(t, cbpv.Split):
            return cbpv.Split(t.x1, t.x2, go(t.v), go(t.m))
        if isinstance(t, cbpv.Seq):
            return cbpv.Seq(go(t.v), go(t.m))
        if isinstance(t, cbpv.Case):
            return cbpv.Case(go(t.v), t.x1, go(t.m1), t.x2, go(t.m2))
        raise TypeError(f"not a CBPV term: {t!r}")

    return go(term)


def node_vector(t):
    if isinstance(t, (cbpv.Thunk, cbpv.Lam)):
        return t.gamma
    return t.target


def candidate_vectors(t, mode: Mode) -> list:
    """All vectors a choice node could carry, varying its free variables.

    Variables the node's body never mentions keep their stamped attribute;
    they cannot change which variables evaluation reads.
    """
    g = node_vector(t)
    free = cbpv.free_vars(t)
    vary = tuple(x for x in g.scope if x in free)
    out = []
    for attrs in itertools.product(legal_attrs(mode), repeat=len(vary)):
        h = g
        for x, a in zip(vary, attrs):
            h = h.set(x, a)
        out.append(h)
    return out


def env_variants(env: Env, mode: Mode) -> list:
    """≡-variants of `env`: the same closures with other vectors."""

    def regamma(w, pick):
        if isinstance(w, WThunk):
            return WThunk(pick(w.gamma), w.env, w.body, w.outer)
        return w

    picks = [
        lambda g: g,
        lambda g: None if g is None else AttrVec.default(g.scope, mode),
        lambda g: None if g is None else AttrVec(g.scope, (Attr.S,) * len(g.scope)),
        lambda g: None if g is None else AttrVec(g.scope, (Attr.Q,) * len(g.scope)),
    ]
    out = []
    for pick in picks:
        bindings = {i: regamma(w, pick) for i, w in env.bindings.items()}
        out.append(Env(env.scope, dict(env.names), bindings))
    return out


class _Need(Exception):
    """The run reached a choice node that has no vector yet."""

    def __init__(self, i: int):
        self.i = i


def _any_choice_succeeds(env: Env, m, mode: Mode, nodes: list, pools: list, fuel: int) -> bool:
    """Exhaustive search over vectors for the choice nodes, built lazily.

    A run only consults the nodes it reaches, so the search branches on a
    node the first time a run asks for it. Every full assignment is covered,
    since assignments that differ only on unconsulted nodes run identically.
    """
    index = {id(t): i for i, t in enumerate(nodes)}
    stack = [{}]
    while stack:
        assign = stack.pop()

        def choose(node, stored, assign=assign):
            # nodes in environment bodies are outside the search
            i = index.get(id(node))
            if i is None:
                return stored
            if i not in assign:
                raise _Need(i)
            return assign[i]

        machine = _Machine(mode, True, True, fuel)
        machine.choose = choose
        try:
            out = machine.run(env, m)
        except _Need as need:
            stack.extend({**assign, need.i: g} for g in pools[need.i])
            continue
        if isinstance(out, Success):
            return True
    return False


def semantic_fails(env: Env, m, mode: Mode = Mode.BASE, validate: bool = False, max_choices: int = 3, fuel: int = DEFAULT_FUEL) -> bool:
    """Does `m` fail to evaluate in `env`?

    The answer comes from erased evaluation. With `validate`, and when the
    term has at most `max_choices` choice nodes, every assignment of vectors
    to those nodes is also run through the instrumented evaluator against
    ≡-variants of the environment; a successful run there raises.
    """
    failed = not isinstance(eval_erased(env, m, fuel), Success)
    if validate and failed:
        nodes = choice_nodes(m)
        if len(nodes) <= max_choices and all(node_vector(t) is not None for t in nodes):
            pools = [candidate_vectors(t, mode) for t in nodes]
            for variant in env_variants(env, mode):
                if _any_choice_succeeds(variant, m, mode, nodes, pools, fuel):
                    raise AssertionError("an attribute choice made a failing term succeed")
    return failed


__all__ = [
    "Env",
    "WUnit",
    "WPair",
    "WInl",
    "WInr",
    "WThunk",
    "TRet",
    "TLam",
    "Success",
    "FailMissing",
    "FailStuck",
    "drop_binding",
    "eval_value",
    "eval_comp",
    "eval_erased",
    "apply_closure",
    "eq_mod_gamma",
    "semantic_fails",
]

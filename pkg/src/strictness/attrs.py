"""Strictness attributes and scoped attribute vectors.

An attribute says how a term uses a variable: S (strictly on every path),
L (never strictly), ? (depends on the path) and, in extended mode, U (not at
all). Vectors map every variable of an explicit, ordered scope to an
attribute; variables that are not listed read as the mode default.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NewType

from strictness.errors import IllegalAttribute, ScopeMismatch

VarId = NewType("VarId", str)


class Mode(enum.Enum):
    BASE = "base"
    EXTENDED = "extended"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown mode {text!r} (expected base or extended)") from None


class Attr(enum.Enum):
    S = "S"
    L = "L"
    Q = "?"
    U = "U"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Attr":
        return cls(text)


BASE_ATTRS = (Attr.S, Attr.L, Attr.Q)
EXTENDED_ATTRS = (Attr.S, Attr.L, Attr.Q, Attr.U)


def legal_attrs(mode: Mode) -> tuple[Attr, ...]:
    return BASE_ATTRS if mode is Mode.BASE else EXTENDED_ATTRS


def default_attr(mode: Mode) -> Attr:
    return Attr.L if mode is Mode.BASE else Attr.U


def check_legal(a: Attr, mode: Mode) -> Attr:
    if a is Attr.U and mode is Mode.BASE:
        raise IllegalAttribute("the U attribute is only available in extended mode")
    return a


# Addition among S, L and ? is the same in both modes; U is the identity.
_PLUS = {
    (Attr.S, Attr.S): Attr.S,
    (Attr.S, Attr.L): Attr.S,
    (Attr.S, Attr.Q): Attr.S,
    (Attr.L, Attr.L): Attr.L,
    (Attr.L, Attr.Q): Attr.Q,
    (Attr.Q, Attr.Q): Attr.Q,
}

# Strict order "a is below b" (less information), transitively closed.
_BELOW = {
    (Attr.Q, Attr.S),
    (Attr.Q, Attr.L),
    (Attr.L, Attr.U),
    (Attr.Q, Attr.U),
}


def _plus(a: Attr, b: Attr) -> Attr:
    if a is Attr.U:
        return b
    if b is Attr.U:
        return a
    return _PLUS.get((a, b)) or _PLUS[(b, a)]


# Per-mode tables over legal attributes only; a miss means an illegal input.
_PLUS_TABLE = {m: {(a, b): _plus(a, b) for a in legal_attrs(m) for b in legal_attrs(m)} for m in Mode}
_LEQ_TABLE = {m: {(a, b): a is b or (a, b) in _BELOW for a in legal_attrs(m) for b in legal_attrs(m)} for m in Mode}
_LAZIFY_TABLE = {m: {a: Attr.U if a is Attr.U else Attr.L for a in legal_attrs(m)} for m in Mode}


def _illegal(mode: Mode, *attrs: Attr):
    for a in attrs:
        check_legal(a, mode)
    raise TypeError(f"not attributes: {attrs}")


def attr_plus(a: Attr, b: Attr, mode: Mode) -> Attr:
    r = _PLUS_TABLE[mode].get((a, b))
    return _illegal(mode, a, b) if r is None else r


def attr_leq(a: Attr, b: Attr, mode: Mode) -> bool:
    r = _LEQ_TABLE[mode].get((a, b))
    return _illegal(mode, a, b) if r is None else r


def attr_lazify(a: Attr, mode: Mode) -> Attr:
    r = _LAZIFY_TABLE[mode].get(a)
    return _illegal(mode, a) if r is None else r


@functools.lru_cache(maxsize=1 << 16)
def _scope_index(scope: tuple) -> dict:
    # shared between vectors over the same scope; never mutated
    index = {x: i for i, x in enumerate(scope)}
    if len(index) != len(scope):
        raise ValueError(f"duplicate variable in scope {scope}")
    return index


@dataclass(frozen=True)
class AttrVec:
    """A total map from `scope` to attributes, stored positionally."""

    scope: tuple[VarId, ...]
    attrs: tuple[Attr, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(self.scope) != len(self.attrs):
            raise ValueError("scope and attrs differ in length")
        object.__setattr__(self, "_index", _scope_index(self.scope))

    @classmethod
    def default(cls, scope: Iterable[VarId], mode: Mode) -> "AttrVec":
        scope = tuple(scope)
        return cls(scope, (default_attr(mode),) * len(scope))

    @classmethod
    def of(cls, scope: Iterable[VarId], entries: Mapping[VarId, Attr], mode: Mode) -> "AttrVec":
        scope = tuple(scope)
        unknown = set(entries) - set(scope)
        if unknown:
            raise ScopeMismatch(f"variables {sorted(unknown)} are not in scope {list(scope)}")
        d = default_attr(mode)
        return cls(scope, tuple(check_legal(entries.get(x, d), mode) for x in scope))

    def __getitem__(self, x: VarId) -> Attr:
        return self.attrs[self._index[x]]

    def __contains__(self, x) -> bool:
        return x in self._index

    def get(self, x: VarId, mode: Mode) -> Attr:
        i = self._index.get(x)
        return default_attr(mode) if i is None else self.attrs[i]

    def items(self):
        return zip(self.scope, self.attrs)

    def entries(self, mode: Mode) -> dict[VarId, Attr]:
        """The non-default entries, i.e. what the textual form shows."""
        d = default_attr(mode)
        return {x: a for x, a in self.items() if a is not d}

    def set(self, x: VarId, a: Attr) -> "AttrVec":
        i = self._index[x]
        return AttrVec(self.scope, self.attrs[:i] + (a,) + self.attrs[i + 1 :])

    def render(self, mode: Mode) -> str:
        return "{" + ", ".join(f"{x}:{a}" for x, a in self.entries(mode).items()) + "}"


def _same_scope(g1: AttrVec, g2: AttrVec):
    if g1.scope != g2.scope:
        raise ScopeMismatch(f"vectors over different scopes: {list(g1.scope)} vs {list(g2.scope)}")


def vec_plus(g1: AttrVec, g2: AttrVec, mode: Mode) -> AttrVec:
    _same_scope(g1, g2)
    table = _PLUS_TABLE[mode]
    try:
        attrs = tuple(table[p] for p in zip(g1.attrs, g2.attrs))
    except KeyError:
        attrs = tuple(attr_plus(a, b, mode) for a, b in zip(g1.attrs, g2.attrs))
    return AttrVec(g1.scope, attrs)


def vec_sum(gs: Iterable[AttrVec], mode: Mode) -> AttrVec:
    gs = list(gs)
    out = gs[0]
    for g in gs[1:]:
        out = vec_plus(out, g, mode)
    return out


def vec_leq(g1: AttrVec, g2: AttrVec, mode: Mode) -> bool:
    _same_scope(g1, g2)
    return all(attr_leq(a, b, mode) for a, b in zip(g1.attrs, g2.attrs))


def vec_restrict(g: AttrVec, dom: Iterable[VarId], mode: Mode) -> AttrVec:
    dom = tuple(dom)
    return AttrVec(dom, tuple(g.get(x, mode) for x in dom))


def vec_downshift(g: AttrVec, x: VarId) -> AttrVec:
    if x not in g:
        return g
    i = g.scope.index(x)
    return AttrVec(g.scope[:i] + g.scope[i + 1 :], g.attrs[:i] + g.attrs[i + 1 :])


def vec_lazify(g: AttrVec, mode: Mode) -> AttrVec:
    return AttrVec(g.scope, tuple(attr_lazify(a, mode) for a in g.attrs))


def vec_singleton(scope: Iterable[VarId], x: VarId, a: Attr, mode: Mode) -> AttrVec:
    """Default everywhere except `x`."""
    return AttrVec.of(scope, {x: a}, mode)


def all_vectors(scope: tuple[VarId, ...], mode: Mode):
    """Every vector over `scope`; exponential, meant for tiny scopes."""
    for attrs in itertools.product(legal_attrs(mode), repeat=len(scope)):
        yield AttrVec(scope, attrs)


def parse_vec(text: str, scope: Iterable[VarId], mode: Mode) -> AttrVec:
    """Parse `{x:S, y:?}` against an explicit scope."""
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ValueError(f"not a vector literal: {text!r}")
    entries = {}
    inner = body[1:-1].strip()
    if inner:
        for part in inner.split(","):
            name, _, attr = part.partition(":")
            name = VarId(name.strip())
            if name in entries:
                raise ValueError(f"variable {name} listed twice in {text!r}")
            entries[name] = Attr.parse(attr.strip())
    return AttrVec.of(scope, entries, mode)

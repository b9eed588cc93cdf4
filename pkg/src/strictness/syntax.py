"""Concrete syntax for both calculi: lexer, parsers, printers, program files.

Program files look like

    lang cbpv
    mode base
    var y : unit = ()
    var f : U[{}] (unit ^S -> F unit) = thunk{ fn x : unit . x; ret () }
    main = force f y

Binders are renamed during parsing so every binder in a file is unique.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from strictness import cbn, cbpv
from strictness.attrs import Attr, AttrVec, Mode, VarId, default_attr
from strictness.errors import ParseError

KEYWORDS = {
    "unit", "Bool", "true", "false", "fn", "let", "in", "case", "of", "inl", "inr",
    "if", "then", "else", "sub", "thunk", "force", "ret", "split", "var", "main",
    "lang", "mode", "F", "U",
}  # fmt: skip

_SYMBOLS = ["]->", "-[", "->", "<-", "(", ")", "{", "}", "[", "]", ",", ":", ".", ";", "|", "^", "*", "+", "=", "?"]
_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>"
    + "|".join(re.escape(s) for s in _SYMBOLS)
    + ")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "sym", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "ident":
                out.append(Token("kw" if s in KEYWORDS else "ident", s, line, col))
            elif kind == "sym":
                out.append(Token("sym", s, line, col))
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# ------------------------------------------------------------------ parser


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str, lang: str, mode: Mode):
        self.toks = tokenize(text)
        self.pos = 0
        self.lang = lang
        self.mode = mode
        # (source name, VarId) pairs, innermost last
        self.env: list[tuple[str, VarId]] = []
        self.used: set = set()
        self.idents = {t.text for t in self.toks if t.kind == "ident"}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error("expected an identifier")
        t = self.tok
        self.pos += 1
        return t

    # -- scope helpers

    @property
    def scope(self) -> tuple:
        return tuple(v for _, v in self.env)

    def bind(self, name: str) -> VarId:
        """A fresh VarId for a binder, renaming if the name was used before."""
        x = name
        k = 0
        while x in self.used or (k and x in self.idents):
            k += 1
            x = f"{name}_{k}"
        self.used.add(x)
        return VarId(x)

    def fresh_anon(self) -> VarId:
        k = 0
        while True:
            k += 1
            x = f"_{k}"
            if x not in self.used and x not in self.idents:
                self.used.add(x)
                return VarId(x)

    def resolve(self, tok: Token) -> VarId:
        for name, v in reversed(self.env):
            if name == tok.text:
                return v
        raise ParseError(f"unbound identifier {tok.text!r}", tok.line, tok.col)

    def push(self, name: str, v: VarId):
        self.env.append((name, v))

    def pop(self, n: int = 1):
        del self.env[len(self.env) - n :]

    # -- attributes and vectors

    def attr(self) -> Attr:
        t = self.tok
        if t.text in ("S", "L") and t.kind == "ident" or t.text in ("?", "U"):
            self.pos += 1
            a = Attr.parse(t.text)
            if a is Attr.U and self.mode is Mode.BASE:
                raise ParseError("the U attribute needs extended mode", t.line, t.col)
            return a
        raise self.error("expected an attribute (S, L, ? or U)")

    def vec(self, scope: Optional[tuple] = None) -> AttrVec:
        scope = self.scope if scope is None else scope
        self.expect("{")
        entries: dict = {}
        if not self.at("}"):
            while True:
                t = self.ident()
                v = self.resolve(t)
                if v not in scope:
                    raise ParseError(f"{t.text!r} is not in scope here", t.line, t.col)
                if v in entries:
                    raise ParseError(f"{t.text!r} listed twice", t.line, t.col)
                self.expect(":")
                entries[v] = self.attr()
                if not self.accept(","):
                    break
        self.expect("}")
        return AttrVec.of(scope, entries, self.mode)

    def default(self) -> AttrVec:
        return AttrVec.default(self.scope, self.mode)

    # ================================================================ CBN

    def cbn_type(self) -> cbn.CbnType:
        t, g = self.cbn_type_latent()
        if g is not None:
            raise self.error("a vector annotation is only allowed on a product or sum component")
        return t

    def cbn_type_latent(self):
        """A type optionally followed by `^ vec`; the vector is returned apart."""
        if self.at("(") and self.peek().kind == "ident" and self.peek(2).text == ":":
            return self.cbn_arrow(), None
        t1, g1 = self.cbn_comp()
        if self.at("*") or self.at("+"):
            op = self.tok.text
            self.pos += 1
            t2, g2 = self.cbn_comp()
            d = self.default()
            ctor = cbn.TProd if op == "*" else cbn.TSum
            return ctor(t1, g1 or d, t2, g2 or d), None
        return t1, g1

    def cbn_comp(self):
        t = self.cbn_atom()
        g = None
        if self.accept("^"):
            g = self.vec()
        return t, g

    def cbn_atom(self) -> cbn.CbnType:
        if self.accept("unit"):
            return cbn.TUnit()
        if self.accept("Bool"):
            return cbn.bool_type(self.scope, self.mode)
        if self.accept("("):
            t = self.cbn_type()
            self.expect(")")
            return t
        raise self.error("expected a type")

    def cbn_arrow(self) -> cbn.TArrow:
        self.expect("(")
        t = self.ident()
        x = VarId(t.text)
        while x in self.scope:
            x = VarId(x + "'")
        self.expect(":")
        alpha = self.attr()
        t1, g1 = self.cbn_type_latent()
        self.expect(")")
        if self.accept("->"):
            latent = self.default()
        else:
            self.expect("-[")
            latent = self.vec()
            self.expect("]->")
        self.push(t.text, x)
        try:
            t2 = self.cbn_type()
        finally:
            self.pop()
        return cbn.TArrow(x, alpha, t1, g1 or self.default(), latent, t2)

    def cbn_term(self):
        t = self.tok
        if self.at("fn"):
            self.pos += 1
            name = self.ident()
            self.expect(":")
            ty, g = self.cbn_type_latent()
            self.expect(".")
            x = self.bind(name.text)
            self.push(name.text, x)
            body = self.cbn_term()
            self.pop()
            return cbn.Lam(x, ty, g or self.default(), body, loc=(t.line, t.col))
        if self.at("let"):
            self.pos += 1
            if self.accept("("):
                n1 = self.ident()
                self.expect(",")
                n2 = self.ident()
                self.expect(")")
                self.expect("=")
                e1 = self.cbn_term()
                self.expect("in")
                x1, x2 = self.bind(n1.text), self.bind(n2.text)
                self.push(n1.text, x1)
                self.push(n2.text, x2)
                e2 = self.cbn_term()
                self.pop(2)
                return cbn.Split(x1, x2, e1, e2)
            name = self.ident()
            self.expect("=")
            e1 = self.cbn_term()
            self.expect("in")
            x = self.bind(name.text)
            self.push(name.text, x)
            e2 = self.cbn_term()
            self.pop()
            return cbn.Let(x, e1, e2)
        if self.at("case"):
            self.pos += 1
            e1 = self.cbn_term()
            self.expect("of")
            self.expect("inl")
            n1 = self.ident()
            self.expect("->")
            x1 = self.bind(n1.text)
            self.push(n1.text, x1)
            e2 = self.cbn_term()
            self.pop()
            self.expect("|")
            self.expect("inr")
            n2 = self.ident()
            self.expect("->")
            x2 = self.bind(n2.text)
            self.push(n2.text, x2)
            e3 = self.cbn_term()
            self.pop()
            return cbn.Case(e1, x1, e2, x2, e3)
        if self.at("if"):
            self.pos += 1
            c = self.cbn_term()
            self.expect("then")
            x1 = self.fresh_anon()
            self.push("", x1)
            a = self.cbn_term()
            self.pop()
            self.expect("else")
            x2 = self.fresh_anon()
            self.push("", x2)
            b = self.cbn_term()
            self.pop()
            return cbn.Case(c, x1, a, x2, b)
        e1 = self.cbn_unary()
        if self.accept(";"):
            return cbn.Seq(e1, self.cbn_term())
        return e1

    def cbn_unary(self):
        if self.accept("sub"):
            self.expect("[")
            g = self.vec()
            self.expect("]")
            return cbn.Sub(g, self.cbn_unary())
        return self.cbn_app()

    def _cbn_atom_start(self) -> bool:
        t = self.tok
        return t.kind == "ident" or (t.kind in ("sym", "kw") and t.text in ("(", "true", "false", "inl", "inr"))

    def cbn_app(self):
        e = self.cbn_term_atom()
        while self._cbn_atom_start():
            e = cbn.App(e, self.cbn_term_atom())
        return e

    def cbn_term_atom(self):
        t = self.tok
        if t.kind == "ident":
            self.pos += 1
            return cbn.Var(self.resolve(t))
        if self.accept("true"):
            return cbn.true_term(self.scope, self.mode)
        if self.accept("false"):
            return cbn.false_term(self.scope, self.mode)
        if self.at("inl") or self.at("inr"):
            left = self.tok.text == "inl"
            self.pos += 1
            self.expect("[")
            ty = self.cbn_type()
            self.expect("]")
            if not isinstance(ty, cbn.TSum):
                raise self.error("injection annotation must be a sum type", t)
            e = self.cbn_term_atom()
            return cbn.Inl(e, ty) if left else cbn.Inr(e, ty)
        if self.accept("("):
            if self.accept(")"):
                return cbn.Unit()
            e1 = self.cbn_term()
            if self.accept(","):
                e2 = self.cbn_term()
                self.expect(")")
                return cbn.Pair(e1, e2)
            self.expect(")")
            return e1
        raise self.error("expected a term")

    # =============================================================== CBPV

    def vtype(self):
        a1 = self.vtype_prod()
        if self.accept("+"):
            return cbpv.TSum(a1, self.vtype_prod())
        return a1

    def vtype_prod(self):
        a1 = self.vtype_atom()
        if self.accept("*"):
            return cbpv.TProd(a1, self.vtype_atom())
        return a1

    def vtype_atom(self):
        if self.accept("unit"):
            return cbpv.TUnit()
        if self.accept("Bool"):
            return cbpv.TSum(cbpv.TUnit(), cbpv.TUnit())
        if self.accept("U"):
            self.expect("[")
            g = self.vec()
            self.expect("]")
            return cbpv.TU(g, self.ctype_atom())
        if self.accept("("):
            a = self.vtype()
            self.expect(")")
            return a
        raise self.error("expected a value type")

    def ctype_atom(self):
        if self.accept("F"):
            return cbpv.TF(self.vtype_atom())
        if self.accept("("):
            b = self.ctype()
            self.expect(")")
            return b
        raise self.error("expected a computation type")

    def ctype(self):
        if self.at("F"):
            return self.ctype_atom()
        save = self.pos
        try:
            a = self.vtype_atom()
            if not self.at("^"):
                raise _Backtrack()
        except (_Backtrack, ParseError):
            self.pos = save
            return self.ctype_atom()
        self.expect("^")
        alpha = self.attr()
        self.expect("->")
        return cbpv.TArrow(a, alpha, self.ctype())

    def value(self):
        t = self.tok
        if t.kind == "ident":
            self.pos += 1
            return cbpv.Var(self.resolve(t))
        if self.accept("true"):
            return cbpv.Inl(cbpv.Unit(), cbpv.TSum(cbpv.TUnit(), cbpv.TUnit()))
        if self.accept("false"):
            return cbpv.Inr(cbpv.Unit(), cbpv.TSum(cbpv.TUnit(), cbpv.TUnit()))
        if self.accept("thunk"):
            self.expect("{")
            m = self.comp()
            self.expect("}")
            return cbpv.Thunk(m)
        if self.at("inl") or self.at("inr"):
            left = self.tok.text == "inl"
            self.pos += 1
            self.expect("[")
            a = self.vtype()
            self.expect("]")
            if not isinstance(a, cbpv.TSum):
                raise self.error("injection annotation must be a sum type", t)
            v = self.value()
            return cbpv.Inl(v, a) if left else cbpv.Inr(v, a)
        if self.accept("("):
            if self.accept(")"):
                return cbpv.Unit()
            v1 = self.value()
            if self.accept(","):
                v2 = self.value()
                self.expect(")")
                return cbpv.Pair(v1, v2)
            self.expect(")")
            return v1
        raise self.error("expected a value")

    def _value_start(self) -> bool:
        t = self.tok
        return t.kind == "ident" or (t.kind in ("sym", "kw") and t.text in ("(", "true", "false", "thunk", "inl", "inr"))

    def comp(self):
        t = self.tok
        if self.at("fn"):
            self.pos += 1
            name = self.ident()
            self.expect(":")
            a = self.vtype()
            self.expect(".")
            x = self.bind(name.text)
            self.push(name.text, x)
            m = self.comp()
            self.pop()
            return cbpv.Lam(x, a, m, loc=(t.line, t.col))
        if t.kind == "ident" and self.peek().text == "<-":
            self.pos += 2
            m1 = self.comp()
            self.expect("in")
            x = self.bind(t.text)
            self.push(t.text, x)
            m2 = self.comp()
            self.pop()
            return cbpv.Let(x, m1, m2)
        if self.accept("split"):
            self.expect("(")
            n1 = self.ident()
            self.expect(",")
            n2 = self.ident()
            self.expect(")")
            self.expect("=")
            v = self.value()
            self.expect("in")
            x1, x2 = self.bind(n1.text), self.bind(n2.text)
            self.push(n1.text, x1)
            self.push(n2.text, x2)
            m = self.comp()
            self.pop(2)
            return cbpv.Split(x1, x2, v, m)
        if self.accept("case"):
            v = self.value()
            self.expect("of")
            self.expect("inl")
            n1 = self.ident()
            self.expect("->")
            x1 = self.bind(n1.text)
            self.push(n1.text, x1)
            m1 = self.comp()
            self.pop()
            self.expect("|")
            self.expect("inr")
            n2 = self.ident()
            self.expect("->")
            x2 = self.bind(n2.text)
            self.push(n2.text, x2)
            m2 = self.comp()
            self.pop()
            return cbpv.Case(v, x1, m1, x2, m2)
        if self.accept("if"):
            v = self.value()
            self.expect("then")
            x1 = self.fresh_anon()
            self.push("", x1)
            m1 = self.comp()
            self.pop()
            self.expect("else")
            x2 = self.fresh_anon()
            self.push("", x2)
            m2 = self.comp()
            self.pop()
            return cbpv.Case(v, x1, m1, x2, m2)
        if self._value_start():
            save = self.pos
            try:
                v = self.value()
            except ParseError:
                v = None
            if v is not None and self.accept(";"):
                return cbpv.Seq(v, self.comp())
            self.pos = save
        return self.comp_unary()

    def comp_unary(self):
        if self.accept("sub"):
            self.expect("[")
            g = self.vec()
            self.expect("]")
            return cbpv.Sub(g, self.comp_unary())
        m = self.comp_atom()
        while self._value_start():
            m = cbpv.App(m, self.value())
        return m

    def comp_atom(self):
        if self.accept("ret"):
            return cbpv.Ret(self.value())
        if self.accept("force"):
            return cbpv.Force(self.value())
        if self.accept("("):
            m = self.comp()
            self.expect(")")
            return m
        raise self.error("expected a computation")

    # ============================================================ programs

    def term(self):
        return self.cbn_term() if self.lang == "cbn" else self.comp()

    def program(self) -> "Program":
        while self.at("lang") or self.at("mode"):
            kw = self.tok.text
            self.pos += 1
            t = self.ident()
            if kw == "lang":
                if t.text not in ("cbn", "cbpv"):
                    raise ParseError("language must be cbn or cbpv", t.line, t.col)
                self.lang = t.text
            else:
                try:
                    self.mode = Mode.parse(t.text)
                except ValueError as exc:
                    raise ParseError(str(exc), t.line, t.col) from None
        decls = []
        while self.at("var"):
            decls.append(self.decl())
        self.expect("main")
        self.expect("=")
        main = self.term()
        if self.tok.kind != "eof":
            raise self.error("expected end of input")
        return Program(self.lang, self.mode, decls, main)

    def decl(self) -> "Decl":
        start = self.expect("var")
        name = self.ident()
        if name.text in self.used:
            raise ParseError(f"duplicate declaration {name.text!r}", name.line, name.col)
        ty, latent = None, None
        if self.accept(":"):
            if self.lang == "cbn":
                ty, latent = self.cbn_type_latent()
            else:
                ty = self.vtype()
        term = None
        if self.accept("="):
            term = self.cbn_term() if self.lang == "cbn" else self.value()
        if term is None and ty is None:
            raise ParseError("a declaration needs a type or a value", start.line, start.col)
        x = self.bind(name.text)
        self.push(name.text, x)
        return Decl(x, ty, latent, term, loc=(start.line, start.col))


@dataclass
class Decl:
    name: VarId
    ty: object = None
    latent: Optional[AttrVec] = None
    term: object = None
    loc: Optional[tuple] = field(default=None, compare=False)


@dataclass
class Program:
    lang: str
    mode: Mode
    decls: list
    main: object

    @property
    def scope(self) -> tuple:
        return tuple(d.name for d in self.decls)


def parse_program(text: str, lang: str = "cbpv", mode: Mode = Mode.BASE) -> Program:
    return Parser(text, lang, mode).program()


def parse_term(text: str, lang: str, mode: Mode = Mode.BASE, scope=()):
    """Parse a single term whose free variables are `scope`."""
    p = Parser(text, lang, mode)
    for x in scope:
        p.push(x, VarId(x))
        p.used.add(x)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error("expected end of input")
    return t


def parse_type(text: str, lang: str, mode: Mode = Mode.BASE, scope=()):
    """Parse a CBN type, or a CBPV value or computation type, over `scope`."""
    p = Parser(text, lang, mode)
    for x in scope:
        p.push(x, VarId(x))
    if lang == "cbn":
        t = p.cbn_type()
    else:
        save = p.pos
        try:
            t = p.vtype()
            if p.tok.kind != "eof":
                raise _Backtrack()
        except (_Backtrack, ParseError):
            p.pos = save
            t = p.ctype()
    if p.tok.kind != "eof":
        raise p.error("expected end of input")
    return t


def parse_vec(text: str, scope, mode: Mode) -> AttrVec:
    p = Parser(text, "cbn", mode)
    for x in scope:
        p.push(x, VarId(x))
    g = p.vec()
    if p.tok.kind != "eof":
        raise p.error("expected end of input")
    return g


# ----------------------------------------------------------------- printer


def show_vec(g: AttrVec, mode: Mode) -> str:
    return g.render(mode)


def _is_default(g: AttrVec, mode: Mode) -> bool:
    d = default_attr(mode)
    return all(a is d for a in g.attrs)


def show_cbn_type(t, mode: Mode) -> str:
    if isinstance(t, cbn.TUnit):
        return "unit"
    if cbn.is_bool(t, mode):
        return "Bool"
    if isinstance(t, (cbn.TProd, cbn.TSum)):
        op = " * " if isinstance(t, cbn.TProd) else " + "
        return _cbn_comp(t.t1, t.g1, mode) + op + _cbn_comp(t.t2, t.g2, mode)
    dom = _cbn_comp(t.t1, t.g1, mode) if not isinstance(t.t1, cbn.TArrow) else show_cbn_type_latent(t.t1, t.g1, mode)
    return f"({t.x} :{t.attr} {dom}) -[{show_vec(t.latent, mode)}]-> {show_cbn_type(t.t2, mode)}"


def _cbn_atom(t, mode) -> str:
    s = show_cbn_type(t, mode)
    return s if s in ("unit", "Bool") else f"({s})"


def _cbn_comp(t, g, mode) -> str:
    s = _cbn_atom(t, mode)
    return s if _is_default(g, mode) else f"{s}^{show_vec(g, mode)}"


def show_cbn_type_latent(t, g, mode) -> str:
    """A type plus latent vector, as written after `fn x :` or `var x :`."""
    if _is_default(g, mode):
        return show_cbn_type(t, mode)
    return _cbn_comp(t, g, mode)


_LEVEL_CBN = {
    cbn.Lam: 0, cbn.Let: 0, cbn.Split: 0, cbn.Case: 0, cbn.Seq: 1, cbn.Sub: 2, cbn.App: 3,
}  # fmt: skip


def show_cbn(e, mode: Mode, level: int = 0) -> str:
    own = _LEVEL_CBN.get(type(e), 4)
    s = _show_cbn(e, mode)
    return f"({s})" if own < level else s


def _show_cbn(e, mode: Mode) -> str:
    if isinstance(e, cbn.Unit):
        return "()"
    if isinstance(e, cbn.Var):
        return e.x
    if isinstance(e, (cbn.Inl, cbn.Inr)):
        if isinstance(e.e, cbn.Unit) and cbn.is_bool(e.annot, mode):
            return "true" if isinstance(e, cbn.Inl) else "false"
        kw = "inl" if isinstance(e, cbn.Inl) else "inr"
        return f"{kw}[{show_cbn_type(e.annot, mode)}] {show_cbn(e.e, mode, 4)}"
    if isinstance(e, cbn.Pair):
        return f"({show_cbn(e.e1, mode)}, {show_cbn(e.e2, mode)})"
    if isinstance(e, cbn.Lam):
        return f"fn {e.x} : {show_cbn_type_latent(e.arg_type, e.arg_latent, mode)} . {show_cbn(e.body, mode)}"
    if isinstance(e, cbn.App):
        return f"{show_cbn(e.e1, mode, 3)} {show_cbn(e.e2, mode, 4)}"
    if isinstance(e, cbn.Let):
        return f"let {e.x} = {show_cbn(e.e1, mode)} in {show_cbn(e.e2, mode)}"
    if isinstance(e, cbn.Sub):
        return f"sub[{show_vec(e.target, mode)}] {show_cbn(e.e, mode, 2)}"
    if isinstance(e, cbn.Seq):
        return f"{show_cbn(e.e1, mode, 2)}; {show_cbn(e.e2, mode)}"
    if isinstance(e, cbn.Split):
        return f"let ({e.x1}, {e.x2}) = {show_cbn(e.e1, mode)} in {show_cbn(e.e2, mode)}"
    if isinstance(e, cbn.Case):
        return (
            f"case {show_cbn(e.e1, mode)} of inl {e.x1} -> {show_cbn(e.e2, mode)}"
            f" | inr {e.x2} -> {show_cbn(e.e3, mode)}"
        )
    raise TypeError(f"not a CBN term: {e!r}")


def _is_cbpv_bool(a) -> bool:
    return a == cbpv.TSum(cbpv.TUnit(), cbpv.TUnit())


def show_vtype(a, mode: Mode) -> str:
    if isinstance(a, cbpv.TUnit):
        return "unit"
    if _is_cbpv_bool(a):
        return "Bool"
    if isinstance(a, cbpv.TU):
        return f"U[{show_vec(a.g, mode)}] {_ctype_atom(a.b, mode)}"
    op = " * " if isinstance(a, cbpv.TProd) else " + "
    return _vtype_atom(a.a1, mode) + op + _vtype_atom(a.a2, mode)


def _vtype_atom(a, mode) -> str:
    s = show_vtype(a, mode)
    return s if s in ("unit", "Bool") else f"({s})"


def _ctype_atom(b, mode) -> str:
    if isinstance(b, cbpv.TF):
        return f"F {_vtype_atom(b.a, mode)}"
    return f"({show_ctype(b, mode)})"


def show_ctype(b, mode: Mode) -> str:
    if isinstance(b, cbpv.TF):
        return _ctype_atom(b, mode)
    return f"{_vtype_atom(b.a, mode)} ^{b.attr} -> {show_ctype(b.b, mode)}"


def show_cbpv_type(t, mode: Mode) -> str:
    return show_vtype(t, mode) if cbpv.is_value_type(t) else show_ctype(t, mode)


_LEVEL_CBPV = {
    cbpv.Lam: 0, cbpv.Let: 0, cbpv.Split: 0, cbpv.Case: 0, cbpv.Seq: 1, cbpv.Sub: 2, cbpv.App: 3,
}  # fmt: skip


def show_value(v, mode: Mode) -> str:
    if isinstance(v, cbpv.Unit):
        return "()"
    if isinstance(v, cbpv.Var):
        return v.x
    if isinstance(v, cbpv.Thunk):
        return f"thunk{{ {show_comp(v.m, mode)} }}"
    if isinstance(v, (cbpv.Inl, cbpv.Inr)):
        if isinstance(v.v, cbpv.Unit) and _is_cbpv_bool(v.annot):
            return "true" if isinstance(v, cbpv.Inl) else "false"
        kw = "inl" if isinstance(v, cbpv.Inl) else "inr"
        return f"{kw}[{show_vtype(v.annot, mode)}] {show_value(v.v, mode)}"
    if isinstance(v, cbpv.Pair):
        return f"({show_value(v.v1, mode)}, {show_value(v.v2, mode)})"
    raise TypeError(f"not a CBPV value: {v!r}")


def show_comp(m, mode: Mode, level: int = 0) -> str:
    own = _LEVEL_CBPV.get(type(m), 4)
    s = _show_comp(m, mode)
    return f"({s})" if own < level else s


def _show_comp(m, mode: Mode) -> str:
    sv = lambda v: show_value(v, mode)  # noqa: E731
    if isinstance(m, cbpv.Lam):
        return f"fn {m.x} : {show_vtype(m.arg_type, mode)} . {show_comp(m.m, mode)}"
    if isinstance(m, cbpv.Let):
        return f"{m.x} <- {show_comp(m.m1, mode)} in {show_comp(m.m2, mode)}"
    if isinstance(m, cbpv.Split):
        return f"split ({m.x1}, {m.x2}) = {sv(m.v)} in {show_comp(m.m, mode)}"
    if isinstance(m, cbpv.Case):
        return (
            f"case {sv(m.v)} of inl {m.x1} -> {show_comp(m.m1, mode)}"
            f" | inr {m.x2} -> {show_comp(m.m2, mode)}"
        )
    if isinstance(m, cbpv.Seq):
        return f"{sv(m.v)}; {show_comp(m.m, mode)}"
    if isinstance(m, cbpv.Sub):
        return f"sub[{show_vec(m.target, mode)}] {show_comp(m.m, mode, 2)}"
    if isinstance(m, cbpv.App):
        return f"{show_comp(m.m, mode, 3)} {sv(m.v)}"
    if isinstance(m, cbpv.Ret):
        return f"ret {sv(m.v)}"
    if isinstance(m, cbpv.Force):
        return f"force {sv(m.v)}"
    raise TypeError(f"not a CBPV computation: {m!r}")


def show_term(t, lang: str, mode: Mode) -> str:
    if lang == "cbn":
        return show_cbn(t, mode)
    return show_value(t, mode) if cbpv.is_value(t) else show_comp(t, mode)


def show_program(p: Program) -> str:
    lines = [f"lang {p.lang}", f"mode {p.mode.value}"]
    for d in p.decls:
        s = f"var {d.name}"
        if d.ty is not None:
            if p.lang == "cbn":
                latent = d.latent if d.latent is not None else AttrVec.default((), p.mode)
                s += " : " + show_cbn_type_latent(d.ty, latent, p.mode)
            else:
                s += " : " + show_vtype(d.ty, p.mode)
        if d.term is not None:
            s += " = " + show_term(d.term, p.lang, p.mode)
        lines.append(s)
    lines.append("main = " + show_term(p.main, p.lang, p.mode))
    return "\n".join(lines) + "\n"


def show_cbn_ctx(ctx: cbn.CbnCtx, mode: Mode) -> str:
    return ", ".join(f"{e.x} : {show_cbn_type_latent(e.ty, e.latent, mode)}" for e in ctx.entries)


def show_cbpv_ctx(ctx: cbpv.CbpvCtx, mode: Mode) -> str:
    return ", ".join(f"{x} : {show_vtype(a, mode)}" for x, a in ctx.entries)


def show_terminal(t, mode: Mode) -> str:
    """Print an evaluation result; captured environments are left out."""
    from strictness import evaluation as ev

    if isinstance(t, ev.WUnit):
        return "()"
    if isinstance(t, ev.WPair):
        return f"({show_terminal(t.w1, mode)}, {show_terminal(t.w2, mode)})"
    if isinstance(t, ev.WInl):
        return f"inl {_terminal_atom(t.w, mode)}"
    if isinstance(t, ev.WInr):
        return f"inr {_terminal_atom(t.w, mode)}"
    if isinstance(t, ev.WThunk):
        return "thunk{ " + show_comp(t.body, mode) + " }"
    if isinstance(t, ev.TRet):
        return f"ret {_terminal_atom(t.w, mode)}"
    if isinstance(t, ev.TLam):
        return f"closure {t.x} . " + show_comp(t.body, mode)
    raise TypeError(f"not a terminal: {t!r}")


def _terminal_atom(w, mode: Mode) -> str:
    s = show_terminal(w, mode)
    return f"({s})" if s.startswith(("inl ", "inr ")) else s

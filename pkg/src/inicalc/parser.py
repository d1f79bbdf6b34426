"""Concrete syntax: lexer, recursive-descent parser and pretty-printer.

Types, loosest to tightest::

    T -o T          (right associative)
    T + T, T (+) T  (left)
    T (x) T         (left)
    T * T           (left)
    Bool | Name | M atom | ( T )

Terms, loosest to tightest: binder forms (``let``, ``fn``, ``case``, ``if``,
``sample``/``send``), then ``t (x) u`` (left), application by juxtaposition,
prefix keywords (``fst``, ``snd``, ``inl[T]``, ``inr[T]``, primitive ops)
applied to one operand, then atoms.

A source file may start with ``#lang ini1`` or ``#lang ini2 layer=I|NI``,
followed by ``assume x : T`` / ``def x : T = t`` declarations and the main
term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .syntax import (
    App, BOOL, Case, Const, Inj, Lam, Layer, Let, LetTensor, NAME, PairShared,
    PairTensor, PrimOp, Proj, Sample, Span, TLolli, TModal, TOplus, TProd, TSum,
    TTensor, Term, Type, Var, fresh_name, free_vars, with_layer,
)

PURE_OPS = ("not", "and", "or", "xor", "eqb", "eqn")
EFFECT_OPS = ("coin", "amb", "fresh")

KEYWORDS = {
    "let", "in", "fn", "case", "of", "inl", "inr", "fst", "snd", "sample",
    "send", "as", "if", "then", "else", "true", "false", "Bool", "Name", "M",
    "assume", "def", *PURE_OPS, *EFFECT_OPS,
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<header>\#lang[^\n]*)
  | (?P<sym>\(x\)|\(\+\)|-o|=>|[()\[\],:;=|*+]|⊗|⊸|×|⊕)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

_ALIASES = {"⊗": "(x)", "⊸": "-o", "×": "*", "⊕": "(+)"}


class ParseError(Exception):
    def __init__(self, offset: int, expected, message: str, end: Optional[int] = None):
        self.span = Span(offset, offset if end is None else end)
        self.expected = frozenset(expected)
        self.message = message
        super().__init__(f"parse error at offset {offset}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'sym', 'ident', 'kw', 'header', 'eof'
    text: str
    start: int
    end: int


def tokenize(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(pos, (), f"unexpected character {text[pos]!r}", pos + 1)
        kind = m.lastgroup
        s = m.group()
        if kind == "sym":
            toks.append(Token("sym", _ALIASES.get(s, s), m.start(), m.end()))
        elif kind == "ident":
            toks.append(Token("kw" if s in KEYWORDS else "ident", s, m.start(), m.end()))
        elif kind == "header":
            toks.append(Token("header", s, m.start(), m.end()))
        pos = m.end()
    toks.append(Token("eof", "", n, n))
    return toks


@dataclass(frozen=True)
class Decl:
    name: str
    type: Type
    body: Optional[Term] = None  # None for `assume`


@dataclass(frozen=True)
class SourceFile:
    lang: str = "ini1"
    layer: Layer = Layer.INI
    decls: tuple = ()
    main: Optional[Term] = field(default=None)

    @property
    def assumptions(self) -> tuple:
        return tuple((d.name, d.type) for d in self.decls if d.body is None)

    def elaborated(self) -> Term:
        """Main term with `def` declarations bound around it."""
        out = self.main
        for d in reversed(self.decls):
            if d.body is None:
                continue
            if self.layer is Layer.I:
                out = App(Lam(d.name, d.type, out, layer=Layer.I), d.body, layer=Layer.I)
            else:
                out = Let(d.name, d.body, out, layer=self.layer)
        return out


class _Parser:
    def __init__(self, text: str, layer: Layer):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.layer = layer
        self._depth = 0

    # -- token helpers ------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "kw")

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail({text})
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail({"identifier"})
        return self.advance()

    def fail(self, expected, message: Optional[str] = None):
        t = self.tok
        shown = "end of input" if t.kind == "eof" else repr(t.text)
        msg = message or f"expected {' or '.join(sorted(expected))}, found {shown}"
        raise ParseError(t.start, expected, msg, t.end)

    def span_from(self, start: int) -> Span:
        prev = self.toks[self.i - 1] if self.i > 0 else self.tok
        return Span(start, max(start, prev.end))

    # -- file ---------------------------------------------------------------
    def file(self) -> SourceFile:
        lang, layer = "ini1", Layer.INI
        if self.tok.kind == "header":
            h = self.advance()
            lang, layer = _parse_header(h)
            self.layer = layer
        decls = []
        names = set()
        while self.at("assume") or self.at("def"):
            kw = self.advance().text
            name = self.ident()
            if name.text in names:
                raise ParseError(name.start, (), f"duplicate declaration {name.text!r}", name.end)
            names.add(name.text)
            self.expect(":")
            ty = self.type_()
            body = None
            if kw == "def":
                self.expect("=")
                body = self.term()
            self.expect(";")
            decls.append(Decl(name.text, ty, body))
        main = self.term()
        if self.tok.kind != "eof":
            self.fail({"end of input"})
        return SourceFile(lang, layer, tuple(decls), main)

    # -- types --------------------------------------------------------------
    def type_(self) -> Type:
        left = self.type_sum()
        if self.at("-o"):
            self.advance()
            return TLolli(left, self.type_())
        return left

    def type_sum(self) -> Type:
        left = self.type_tensor()
        while self.at("+") or self.at("(+)"):
            op = self.advance().text
            right = self.type_tensor()
            left = TSum(left, right) if op == "+" else TOplus(left, right)
        return left

    def type_tensor(self) -> Type:
        left = self.type_prod()
        while self.at("(x)"):
            self.advance()
            left = TTensor(left, self.type_prod())
        return left

    def type_prod(self) -> Type:
        left = self.type_atom()
        while self.at("*"):
            self.advance()
            left = TProd(left, self.type_atom())
        return left

    def type_atom(self) -> Type:
        self._enter()
        try:
            if self.at("Bool"):
                self.advance()
                return BOOL
            if self.at("Name"):
                self.advance()
                return NAME
            if self.at("M"):
                self.advance()
                return TModal(self.type_atom())
            if self.at("("):
                self.advance()
                ty = self.type_()
                self.expect(")")
                return ty
            self.fail({"Bool", "Name", "M", "("}, None)
        finally:
            self._depth -= 1

    # -- terms --------------------------------------------------------------
    def _enter(self):
        self._depth += 1
        if self._depth > 400:
            raise ParseError(self.tok.start, (), "nesting too deep")

    def term(self) -> Term:
        self._enter()
        try:
            return self._term()
        finally:
            self._depth -= 1

    def _term(self) -> Term:
        start = self.tok.start
        L = self.layer
        if self.at("let"):
            self.advance()
            x = self.ident().text
            if self.at("(x)"):
                self.advance()
                y = self.ident().text
                self.expect("=")
                bound = self.term()
                self.expect("in")
                body = self.term()
                return LetTensor(x, y, bound, body, span=self.span_from(start), layer=L)
            self.expect("=")
            bound = self.term()
            self.expect("in")
            body = self.term()
            return Let(x, bound, body, span=self.span_from(start), layer=L)
        if self.at("fn"):
            self.advance()
            x = self.ident().text
            self.expect(":")
            ty = self.type_()
            self.expect("=>")
            body = self.term()
            return Lam(x, ty, body, span=self.span_from(start), layer=L)
        if self.at("case"):
            self.advance()
            scrut = self.term()
            self.expect("of")
            if self.at("|"):
                self.advance()
            self.expect("inl")
            x = self.ident().text
            self.expect("=>")
            left = self.term()
            self.expect("|")
            self.expect("inr")
            y = self.ident().text
            self.expect("=>")
            right = self.term()
            return Case(scrut, x, left, y, right, span=self.span_from(start), layer=L)
        if self.at("if"):
            self.advance()
            scrut = self.term()
            self.expect("then")
            left = self.term()
            self.expect("else")
            right = self.term()
            avoid = free_vars(left) | free_vars(right)
            x = fresh_name("_", avoid)
            return Case(scrut, x, left, x, right, span=self.span_from(start), layer=L)
        if self.at("sample") or self.at("send"):
            self.advance()
            srcs = []
            if not self.at("as"):
                srcs.append(self.tensor())
                while self.at(","):
                    self.advance()
                    srcs.append(self.tensor())
            self.expect("as")
            names = []
            if not self.at("in"):
                names.append(self.ident().text)
                while self.at(","):
                    self.advance()
                    names.append(self.ident().text)
            if len(names) != len(srcs):
                raise ParseError(start, (), f"sample binds {len(srcs)} sources to {len(names)} names",
                                 self.tok.start)
            self.expect("in")
            saved = self.layer
            self.layer = Layer.NI
            body = self.term()
            self.layer = saved
            return Sample(tuple(zip(srcs, names)), body, span=self.span_from(start), layer=L)
        return self.tensor()

    def tensor(self) -> Term:
        start = self.tok.start
        left = self.app()
        while self.at("(x)"):
            self.advance()
            right = self.app()
            left = PairTensor(left, right, span=self.span_from(start), layer=self.layer)
        return left

    def app(self) -> Term:
        start = self.tok.start
        fn = self.prefix()
        while self._starts_prefix():
            arg = self.prefix()
            fn = App(fn, arg, span=self.span_from(start), layer=self.layer)
        return fn

    def _starts_prefix(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return True
        if t.kind == "kw":
            return t.text in ("true", "false", "fst", "snd", "inl", "inr", *PURE_OPS, *EFFECT_OPS)
        return t.kind == "sym" and t.text == "("

    def prefix(self) -> Term:
        self._enter()
        try:
            return self._prefix()
        finally:
            self._depth -= 1

    def _prefix(self) -> Term:
        start = self.tok.start
        L = self.layer
        if self.at("fst") or self.at("snd"):
            idx = 1 if self.advance().text == "fst" else 2
            body = self.prefix()
            return Proj(idx, body, span=self.span_from(start), layer=L)
        if self.at("inl") or self.at("inr"):
            idx = 1 if self.advance().text == "inl" else 2
            annot = None
            if self.at("["):
                self.advance()
                annot = self.type_()
                self.expect("]")
            body = self.prefix()
            return Inj(idx, body, annot, span=self.span_from(start), layer=L)
        if self.tok.kind == "kw" and self.tok.text in PURE_OPS:
            op = self.advance().text
            arg = self.prefix()
            return PrimOp(op, (arg,), span=self.span_from(start), layer=L)
        return self.atom()

    def atom(self) -> Term:
        start = self.tok.start
        L = self.layer
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return Var(t.text, span=self.span_from(start), layer=L)
        if self.at("true") or self.at("false"):
            self.advance()
            return Const(t.text == "true", span=self.span_from(start), layer=L)
        if t.kind == "kw" and t.text in EFFECT_OPS:
            self.advance()
            return PrimOp(t.text, span=self.span_from(start), layer=L)
        if self.at("("):
            self.advance()
            inner = self.term()
            if self.at(","):
                self.advance()
                right = self.term()
                self.expect(")")
                return PairShared(inner, right, span=self.span_from(start), layer=L)
            self.expect(")")
            return inner
        self.fail({"identifier", "true", "false", "coin", "amb", "fresh", "("})


def _parse_header(h: Token) -> tuple:
    parts = h.text.split()
    if len(parts) < 2 or parts[1] not in ("ini1", "ini2"):
        raise ParseError(h.start, {"#lang ini1", "#lang ini2"}, f"bad header {h.text!r}", h.end)
    if parts[1] == "ini1":
        if len(parts) != 2:
            raise ParseError(h.start, (), "ini1 takes no options", h.end)
        return "ini1", Layer.INI
    layer = Layer.I
    for opt in parts[2:]:
        if opt == "layer=I":
            layer = Layer.I
        elif opt == "layer=NI":
            layer = Layer.NI
        else:
            raise ParseError(h.start, {"layer=I", "layer=NI"}, f"unknown header option {opt!r}", h.end)
    return "ini2", layer


def parse(text: str, layer: Optional[Layer] = None) -> SourceFile:
    """Parse a whole source file; raises `ParseError` on the first failure.

    Without a ``#lang`` header the text is read as ``ini1`` (or as `layer`
    when one is given).
    """
    if not isinstance(text, str):
        raise ParseError(0, (), "input is not text")
    p = _Parser(text, layer or Layer.INI)
    try:
        sf = p.file()
    except RecursionError:
        raise ParseError(p.tok.start, (), "nesting too deep") from None
    if layer is not None and sf.lang == "ini1" and not text.lstrip().startswith("#lang"):
        sf = SourceFile("ini1" if layer is Layer.INI else "ini2", layer, sf.decls, sf.main)
    return sf


def parse_term(text: str, layer: Layer = Layer.INI) -> Term:
    return parse(text, layer).main


def parse_type(text: str) -> Type:
    p = _Parser(text, Layer.INI)
    ty = p.type_()
    if p.tok.kind != "eof":
        p.fail({"end of input"})
    return ty


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

_TY_PREC = {TLolli: 0, TSum: 1, TOplus: 1, TTensor: 2, TProd: 3}


def show_type(ty: Type, prec: int = 0) -> str:
    match ty:
        case TLolli(a, b):
            s = f"{show_type(a, 1)} -o {show_type(b, 0)}"
            p = 0
        case TSum(a, b):
            s = f"{show_type(a, 1)} + {show_type(b, 2)}"
            p = 1
        case TOplus(a, b):
            s = f"{show_type(a, 1)} (+) {show_type(b, 2)}"
            p = 1
        case TTensor(a, b):
            s = f"{show_type(a, 2)} (x) {show_type(b, 3)}"
            p = 2
        case TProd(a, b):
            s = f"{show_type(a, 3)} * {show_type(b, 4)}"
            p = 3
        case TModal(a):
            return f"M {show_type(a, 4)}"
        case _:
            return str(ty)
    return f"({s})" if p < prec else s


# term precedence levels: 0 binder forms, 1 tensor, 2 application, 3 prefix, 4 atom
def pretty(t: Term) -> str:
    return _pp(t, 0)


def _pp(t: Term, prec: int) -> str:
    match t:
        case Var(x):
            return x
        case Const(b):
            return "true" if b else "false"
        case PrimOp(op, ()):
            return op
        case PrimOp(op, (a,)):
            return _wrap(f"{op} {_pp(a, 3)}", 3, prec)
        case PairShared(a, b):
            return f"({_pp(a, 0)}, {_pp(b, 0)})"
        case Proj(i, b):
            return _wrap(f"{'fst' if i == 1 else 'snd'} {_pp(b, 3)}", 3, prec)
        case Inj(i, b, ann):
            kw = "inl" if i == 1 else "inr"
            if ann is not None:
                kw += f"[{show_type(ann)}]"
            return _wrap(f"{kw} {_pp(b, 3)}", 3, prec)
        case PairTensor(a, b):
            return _wrap(f"{_pp(a, 1)} (x) {_pp(b, 2)}", 1, prec)
        case App(f, a):
            return _wrap(f"{_pp(f, 2)} {_pp(a, 3)}", 2, prec)
        case LetTensor(x, y, a, b):
            return _wrap(f"let {x} (x) {y} = {_pp(a, 0)} in {_pp(b, 0)}", 0, prec)
        case Let(x, a, b):
            return _wrap(f"let {x} = {_pp(a, 0)} in {_pp(b, 0)}", 0, prec)
        case Lam(x, ann, b):
            return _wrap(f"fn {x}: {show_type(ann)} => {_pp(b, 0)}", 0, prec)
        case Case(s, x, a, y, b):
            # a binder form in the left branch would swallow `| inr`
            return _wrap(f"case {_pp(s, 0)} of inl {x} => {_pp(a, 1)} | inr {y} => {_pp(b, 0)}", 0, prec)
        case Sample(binds, body):
            srcs = ", ".join(_pp(s, 1) for s, _ in binds)
            names = ", ".join(x for _, x in binds)
            head = "sample" + (f" {srcs}" if srcs else "") + " as" + (f" {names}" if names else "")
            return _wrap(f"{head} in {_pp(body, 0)}", 0, prec)
    raise TypeError(f"not a term: {t!r}")


def _wrap(s: str, level: int, prec: int) -> str:
    return f"({s})" if level < prec else s


def pretty_file(sf: SourceFile) -> str:
    lines = []
    if sf.lang == "ini1":
        lines.append("#lang ini1")
    else:
        lines.append(f"#lang ini2 layer={sf.layer.value}")
    for d in sf.decls:
        if d.body is None:
            lines.append(f"assume {d.name} : {show_type(d.type)};")
        else:
            lines.append(f"def {d.name} : {show_type(d.type)} = {pretty(d.body)};")
    lines.append(pretty(sf.main))
    return "\n".join(lines) + "\n"


def retag(t: Term, layer: Layer) -> Term:
    return with_layer(t, layer)

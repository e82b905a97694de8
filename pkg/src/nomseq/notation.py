"""Concrete syntax: an ASCII reader/printer and a Unicode display printer.

ASCII grammar, loosest binding first:

    formula  := forall x:T. F | exists x:T. F | new 'a:T. F | new a:T. F | imp
    imp      := or [=> imp]
    or       := and {| and}
    and      := prim {& prim}
    prim     := top | bot | p(t,...) | t = t | t # t | ( formula )
    term     := x | 'a | c | f(t,...) | (t t).t | <t>t | ( term )
    type     := nu | delta | [nu]type

Contexts are written ``x:delta # 'a:nu, y:delta`` (``.`` when empty) and
sequents ``CTX ; F, F |- F, F``.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .context import DEFAULT_SIGNATURE, Context, FreshBind, VarBind
from .syntax import (
    Abs, AbsType, And, App, Atom, Bot, Const, DataType, Eq, Exists, Forall,
    Fresh, Imp, NameSym, NameType, New, NewVar, Or, Signature, Swap, Top, Var,
)

KEYWORDS = {"top", "bot", "forall", "exists", "new"}


class ParseError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{line}:{col}: {msg}")
        self.pos = pos
        self.line = line
        self.col = col


# ------------------------------------------------------------- printer

def show_type(ty) -> str:
    if isinstance(ty, (DataType, NameType)):
        return ty.name
    if isinstance(ty, AbsType):
        return f"[{ty.name_type.name}]{show_type(ty.body)}"
    raise TypeError(f"not a type: {ty!r}")


def show_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, NameSym):
        return "'" + t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, App):
        return f"{t.fn}({','.join(show_term(a) for a in t.args)})"
    if isinstance(t, Swap):
        # a swapped name that is itself a swap is parenthesized, or "x (" would read as an application
        left, right = (f"({show_term(u)})" if isinstance(u, Swap) else show_term(u) for u in (t.left, t.right))
        return f"({left} {right}).{show_term(t.body)}"
    if isinstance(t, Abs):
        return f"<{show_term(t.name)}>{show_term(t.body)}"
    raise TypeError(f"not a term: {t!r}")


_LEVEL = {Imp: 1, Or: 2, And: 3}


def _level(phi) -> int:
    if isinstance(phi, (Forall, Exists, New, NewVar)):
        return 0
    return _LEVEL.get(type(phi), 4)


def show_formula(phi) -> str:
    if isinstance(phi, Top):
        return "top"
    if isinstance(phi, Bot):
        return "bot"
    if isinstance(phi, Atom):
        return f"{phi.pred}({','.join(show_term(a) for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"{show_term(phi.left)} = {show_term(phi.right)}"
    if isinstance(phi, Fresh):
        return f"{show_term(phi.name)} # {show_term(phi.body)}"
    if isinstance(phi, Forall):
        return f"forall {phi.var}:{show_type(phi.sort)}. {show_formula(phi.body)}"
    if isinstance(phi, Exists):
        return f"exists {phi.var}:{show_type(phi.sort)}. {show_formula(phi.body)}"
    if isinstance(phi, New):
        return f"new '{phi.name}:{show_type(phi.sort)}. {show_formula(phi.body)}"
    if isinstance(phi, NewVar):
        return f"new {phi.var}:{show_type(phi.sort)}. {show_formula(phi.body)}"
    op = {And: "&", Or: "|", Imp: "=>"}[type(phi)]
    lvl = _level(phi)
    # & and | associate to the left, => to the right
    lmin, rmin = (lvl + 1, lvl) if isinstance(phi, Imp) else (lvl, lvl + 1)
    return f"{_paren(phi.left, lmin)} {op} {_paren(phi.right, rmin)}"


def _paren(phi, minimum: int) -> str:
    s = show_formula(phi)
    return f"({s})" if _level(phi) < minimum else s


def show_context(ctx: Context) -> str:
    if not ctx.entries:
        return "."
    out = []
    for i, e in enumerate(ctx.entries):
        if isinstance(e, FreshBind):
            out.append(("# " if i == 0 else " # ") + f"'{e.name}:{show_type(e.sort)}")
        else:
            out.append(("" if i == 0 else ", ") + f"{e.var}:{show_type(e.sort)}")
    return "".join(out)


def show_sequent(seq) -> str:
    left = ", ".join(show_formula(f) for f in seq.left)
    right = ", ".join(show_formula(f) for f in seq.right)
    s = show_context(seq.ctx) + " ; "
    if left:
        s += left + " "
    s += "|-"
    if right:
        s += " " + right
    return s


# ---------------------------------------------------- unicode display

_GREEK = {"nu": "ν", "nu2": "ν′", "delta": "δ", "delta2": "δ′", "tau": "τ", "sigma": "σ"}


def _u_ident(s: str) -> str:
    return _GREEK.get(s, s)


def _u_name(s: str) -> str:
    # tilde over the first character marks a name-symbol; NFC so ã is one code point
    return unicodedata.normalize("NFC", s[0] + "\u0303") + s[1:]


def unicode_type(ty) -> str:
    if isinstance(ty, (DataType, NameType)):
        return _u_ident(ty.name)
    return f"⟨{_u_ident(ty.name_type.name)}⟩{unicode_type(ty.body)}"


def unicode_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, NameSym):
        return _u_name(t.name)
    if isinstance(t, Const):
        return t.name
    if isinstance(t, App):
        return f"{t.fn}({','.join(unicode_term(a) for a in t.args)})"
    if isinstance(t, Swap):
        return f"({unicode_term(t.left)} {unicode_term(t.right)})·{unicode_term(t.body)}"
    return f"⟨{unicode_term(t.name)}⟩{unicode_term(t.body)}"


def unicode_formula(phi) -> str:
    if isinstance(phi, Top):
        return "⊤"
    if isinstance(phi, Bot):
        return "⊥"
    if isinstance(phi, Atom):
        return f"{phi.pred}({','.join(unicode_term(a) for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"{unicode_term(phi.left)} ≈ {unicode_term(phi.right)}"
    if isinstance(phi, Fresh):
        return f"{unicode_term(phi.name)} # {unicode_term(phi.body)}"
    if isinstance(phi, (Forall, Exists, NewVar)):
        q = {Forall: "∀", Exists: "∃", NewVar: "∇"}[type(phi)]
        return f"{q}{phi.var}:{unicode_type(phi.sort)}.{unicode_formula(phi.body)}"
    if isinstance(phi, New):
        return f"∇{_u_name(phi.name)}:{unicode_type(phi.sort)}.{unicode_formula(phi.body)}"
    op = {And: "∧", Or: "∨", Imp: "⊃"}[type(phi)]
    lvl = _level(phi)
    lmin, rmin = (lvl + 1, lvl) if isinstance(phi, Imp) else (lvl, lvl + 1)

    def par(x, m):
        s = unicode_formula(x)
        return f"({s})" if _level(x) < m else s

    return f"{par(phi.left, lmin)} {op} {par(phi.right, rmin)}"


def unicode_context(ctx: Context) -> str:
    out = []
    for i, e in enumerate(ctx.entries):
        if isinstance(e, FreshBind):
            out.append(f"#{_u_name(e.name)}:{unicode_type(e.sort)}")
        else:
            out.append(("," if i else "") + f"{e.var}:{unicode_type(e.sort)}")
    return "".join(out) or "·"


def unicode_sequent(seq) -> str:
    left = ", ".join(unicode_formula(f) for f in seq.left)
    right = ", ".join(unicode_formula(f) for f in seq.right)
    return f"{unicode_context(seq.ctx)}; {left} ⇒ {right}".replace("  ", " ").strip()


# -------------------------------------------------------------- reader

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<name>'[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>\|-|=>|[()\[\]<>.,:;#=&|])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(Token(kind, m.group(), pos))
        pos = m.end()
    toks.append(Token("eof", "", len(text)))
    return toks


class Reader:
    def __init__(self, text: str, sig: Signature = DEFAULT_SIGNATURE):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("punct", "ident") and t.text == text

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind not in ("punct", "ident"):
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def fail(self, msg: str):
        raise ParseError(msg, self.text, self.peek().pos)

    def done(self):
        if self.peek().kind != "eof":
            self.fail(f"unexpected {self.peek().text!r}")

    # types
    def type_(self):
        if self.at("["):
            self.next()
            nt = self.type_()
            if not isinstance(nt, NameType):
                self.fail("abstraction needs a name type")
            self.expect("]")
            return AbsType(nt, self.type_())
        t = self.next()
        if t.kind != "ident":
            self.i -= 1
            self.fail("expected a type")
        if t.text in self.sig.name_types:
            return NameType(t.text)
        if t.text in self.sig.data_types:
            return DataType(t.text)
        self.i -= 1
        self.fail(f"unknown type {t.text!r}")

    # terms
    def term(self):
        t = self.peek()
        if t.kind == "name":
            self.next()
            return NameSym(t.text[1:])
        if t.kind == "ident":
            if t.text in KEYWORDS:
                self.fail(f"keyword {t.text!r} where a term was expected")
            self.next()
            if self.at("("):
                self.next()
                args = self.term_list(")")
                return App(t.text, args)
            if t.text in self.sig.constants:
                return Const(t.text)
            return Var(t.text)
        if self.at("<"):
            self.next()
            a = self.term()
            self.expect(">")
            return Abs(a, self.term())
        if self.at("("):
            self.next()
            first = self.term()
            if self.at(")"):
                self.next()
                return first
            second = self.term()
            self.expect(")")
            self.expect(".")
            return Swap(first, second, self.term())
        self.fail(f"expected a term, found {t.text or 'end of input'!r}")

    def term_list(self, close: str) -> list:
        out = []
        if self.at(close):
            self.next()
            return out
        out.append(self.term())
        while self.at(","):
            self.next()
            out.append(self.term())
        self.expect(close)
        return out

    # formulas
    def formula(self):
        t = self.peek()
        if t.kind == "ident" and t.text in ("forall", "exists", "new"):
            self.next()
            nt = self.peek()
            if nt.kind == "name" and t.text == "new":
                self.next()
                self.expect(":")
                ty = self.type_()
                if not isinstance(ty, NameType):
                    self.fail("new needs a name type")
                self.expect(".")
                return New(nt.text[1:], ty, self.formula())
            if nt.kind != "ident" or nt.text in KEYWORDS:
                self.fail("expected a bound identifier")
            self.next()
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            body = self.formula()
            if t.text == "forall":
                return Forall(nt.text, ty, body)
            if t.text == "exists":
                return Exists(nt.text, ty, body)
            if not isinstance(ty, NameType):
                self.fail("new needs a name type")
            return NewVar(nt.text, ty, body)
        return self.imp()

    def imp(self):
        left = self.disj()
        if self.at("=>"):
            self.next()
            return Imp(left, self.imp_or_quant())
        return left

    def imp_or_quant(self):
        t = self.peek()
        if t.kind == "ident" and t.text in ("forall", "exists", "new"):
            return self.formula()
        return self.imp()

    def disj(self):
        left = self.conj()
        while self.at("|"):
            self.next()
            left = Or(left, self.conj_or_quant())
        return left

    def conj_or_quant(self):
        t = self.peek()
        if t.kind == "ident" and t.text in ("forall", "exists", "new"):
            return self.formula()
        return self.conj()

    def conj(self):
        left = self.prim()
        while self.at("&"):
            self.next()
            t = self.peek()
            if t.kind == "ident" and t.text in ("forall", "exists", "new"):
                left = And(left, self.formula())
            else:
                left = And(left, self.prim())
        return left

    def prim(self):
        t = self.peek()
        if t.kind == "ident" and t.text == "top":
            self.next()
            return Top()
        if t.kind == "ident" and t.text == "bot":
            self.next()
            return Bot()
        if t.kind == "ident" and t.text in ("forall", "exists", "new"):
            return self.formula()
        start = self.i
        try:
            tm = self.term()
        except ParseError:
            tm = None
        if tm is not None:
            if self.at("="):
                self.next()
                return Eq(tm, self.term())
            if self.at("#"):
                self.next()
                return Fresh(tm, self.term())
            if isinstance(tm, App) and tm.fn not in self.sig.functions:
                return Atom(tm.fn, tm.args)
            if isinstance(tm, (Var, Const)) and tm.name in self.sig.relations:
                return Atom(tm.name, ())
        self.i = start
        if self.at("("):
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        self.fail(f"expected a formula, found {t.text or 'end of input'!r}")

    # contexts and sequents
    def context(self, stop=(";",)) -> Context:
        entries = []
        if self.at("."):
            self.next()
            return Context()
        while self.peek().kind != "eof" and self.peek().text not in stop:
            if entries or self.at("#"):
                if self.at(",") or self.at("#"):
                    self.next()
                else:
                    self.fail("expected ',' or '#' between context entries")
            t = self.next()
            if t.kind not in ("name", "ident") or t.text in KEYWORDS:
                self.i -= 1
                self.fail("expected a context entry")
            self.expect(":")
            ty = self.type_()
            if t.kind == "name":
                if not isinstance(ty, NameType):
                    self.fail("name-symbols need a name type")
                entries.append(FreshBind(t.text[1:], ty))
            else:
                entries.append(VarBind(t.text, ty))
        return Context(tuple(entries))

    def formula_list(self, stop: tuple) -> list:
        out = []
        if self.peek().kind == "eof" or self.peek().text in stop:
            return out
        out.append(self.formula())
        while self.at(","):
            self.next()
            out.append(self.formula())
        return out

    def sequent(self):
        from .calculus import Sequent
        ctx = self.context()
        self.expect(";")
        left = self.formula_list(("|-",))
        self.expect("|-")
        right = self.formula_list((")",))
        return Sequent(ctx, tuple(left), tuple(right))


def _whole(text, sig, method):
    r = Reader(text, sig)
    out = getattr(r, method)()
    r.done()
    return out


def parse_type(text: str, sig: Signature = DEFAULT_SIGNATURE):
    return _whole(text, sig, "type_")


def parse_term(text: str, sig: Signature = DEFAULT_SIGNATURE):
    return _whole(text, sig, "term")


def parse_formula(text: str, sig: Signature = DEFAULT_SIGNATURE):
    return _whole(text, sig, "formula")


def parse_context(text: str, sig: Signature = DEFAULT_SIGNATURE) -> Context:
    return _whole(text, sig, "context")


def parse_sequent(text: str, sig: Signature = DEFAULT_SIGNATURE):
    return _whole(text, sig, "sequent")

"""Typing contexts with freshness bindings, and the typing judgments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .syntax import (
    Abs, AbsType, And, App, Atom, Bot, Const, Eq, Exists, Forall,
    Fresh, Imp, NameSym, NameType, New, NewVar, Or, Signature, Swap, Top,
    Type, Var, free_ids, fresh_id, rich_signature, substitute,
)

DEFAULT_SIGNATURE = rich_signature()


class TypeError_(ValueError):
    """Raised when a term, formula or context is ill-typed."""


@dataclass(frozen=True)
class VarBind:
    var: str
    sort: Type


@dataclass(frozen=True)
class FreshBind:
    name: str
    sort: NameType


Entry = Union[VarBind, FreshBind]


def entry_id(e: Entry) -> str:
    return e.var if isinstance(e, VarBind) else e.name


@dataclass(frozen=True)
class Context:
    entries: tuple = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for e in entries:
            i = entry_id(e)
            if i in seen:
                raise TypeError_(f"identifier {i} bound twice in context")
            seen.add(i)
            if isinstance(e, FreshBind) and not isinstance(e.sort, NameType):
                raise TypeError_(f"fresh binding {i} needs a name type")

    def __len__(self):
        return len(self.entries)

    def ids(self) -> list:
        return [entry_id(e) for e in self.entries]

    def dom(self) -> frozenset:
        return frozenset(self.ids())

    def var_type(self, x: str) -> Optional[Type]:
        for e in self.entries:
            if isinstance(e, VarBind) and e.var == x:
                return e.sort
        return None

    def name_type(self, a: str) -> Optional[NameType]:
        for e in self.entries:
            if isinstance(e, FreshBind) and e.name == a:
                return e.sort
        return None

    def position(self, ident: str) -> int:
        for i, e in enumerate(self.entries):
            if entry_id(e) == ident:
                return i
        return -1

    def add_var(self, x: str, sort: Type) -> "Context":
        return Context(self.entries + (VarBind(x, sort),))

    def add_fresh(self, a: str, sort: NameType) -> "Context":
        return Context(self.entries + (FreshBind(a, sort),))

    def extend(self, entries: Iterable[Entry]) -> "Context":
        return Context(self.entries + tuple(entries))

    def without(self, ident: str) -> "Context":
        return Context(tuple(e for e in self.entries if entry_id(e) != ident))

    def fresh_names(self) -> list:
        return [e for e in self.entries if isinstance(e, FreshBind)]

    def variables(self) -> list:
        return [e for e in self.entries if isinstance(e, VarBind)]


EMPTY = Context()


def _ident(a) -> str:
    if isinstance(a, NameSym):
        return a.name
    if isinstance(a, str):
        return a
    raise TypeError_(f"expected a name-symbol, got {a!r}")


def in_fresh_set(ctx: Context, a, t) -> bool:
    """Decide whether a # t belongs to the freshness set generated by ctx.

    Holds when a is fresh-bound after every identifier free in t.
    """
    name = _ident(a)
    pos = -1
    for i, e in enumerate(ctx.entries):
        if isinstance(e, FreshBind) and e.name == name:
            pos = i
            break
    if pos < 0:
        raise TypeError_(f"name-symbol {name} is not bound in the context")
    vs, ns = free_ids(t)
    before = {entry_id(e) for e in ctx.entries[:pos]}
    return (vs | ns) <= before


def ctx_leq(weaker: Context, stronger: Context) -> bool:
    """True when every typing and freshness fact of weaker holds in stronger."""
    for e in weaker.entries:
        j = stronger.position(entry_id(e))
        if j < 0 or stronger.entries[j] != e:
            return False
    for i, e in enumerate(weaker.entries):
        if isinstance(e, FreshBind):
            j = stronger.position(e.name)
            for earlier in weaker.entries[:i]:
                if stronger.position(entry_id(earlier)) > j:
                    return False
    return True


# -------------------------------------------------------------- typing

def typecheck_term(ctx: Context, t, sig: Signature = DEFAULT_SIGNATURE) -> Type:
    if isinstance(t, Var):
        ty = ctx.var_type(t.name)
        if ty is None:
            raise TypeError_(f"unbound variable {t.name}")
        return ty
    if isinstance(t, NameSym):
        ty = ctx.name_type(t.name)
        if ty is None:
            raise TypeError_(f"unbound name-symbol '{t.name}")
        return ty
    if isinstance(t, Const):
        if t.name not in sig.constants:
            raise TypeError_(f"unknown constant {t.name}")
        return sig.constants[t.name]
    if isinstance(t, App):
        if t.fn not in sig.functions:
            raise TypeError_(f"unknown function {t.fn}")
        arg_types, res = sig.functions[t.fn]
        if len(arg_types) != len(t.args):
            raise TypeError_(f"{t.fn} expects {len(arg_types)} arguments, got {len(t.args)}")
        for want, arg in zip(arg_types, t.args):
            got = typecheck_term(ctx, arg, sig)
            if got != want:
                raise TypeError_(f"argument of {t.fn} has type {got}, expected {want}")
        return res
    if isinstance(t, Swap):
        ta = typecheck_term(ctx, t.left, sig)
        tb = typecheck_term(ctx, t.right, sig)
        if not isinstance(ta, NameType) or ta != tb:
            raise TypeError_(f"swapping needs two names of one name type, got {ta} and {tb}")
        return typecheck_term(ctx, t.body, sig)
    if isinstance(t, Abs):
        ta = typecheck_term(ctx, t.name, sig)
        if not isinstance(ta, NameType):
            raise TypeError_(f"abstraction over a term of type {ta}")
        return AbsType(ta, typecheck_term(ctx, t.body, sig))
    raise TypeError_(f"not a term: {t!r}")


def _bind_apart(ctx: Context, ident: str, body, is_name: bool):
    """Rename a bound id that clashes with the context before extending it."""
    if ctx.position(ident) < 0:
        return ident, body
    new = fresh_id(ident, ctx.dom() | free_ids(body)[0] | free_ids(body)[1])
    key = NameSym(ident) if is_name else Var(ident)
    val = NameSym(new) if is_name else Var(new)
    return new, substitute(body, {key: val})


def typecheck_formula(ctx: Context, phi, sig: Signature = DEFAULT_SIGNATURE) -> bool:
    """Return True when phi is a well-formed proposition in ctx; raise otherwise."""
    if isinstance(phi, (Top, Bot)):
        return True
    if isinstance(phi, Atom):
        if phi.pred not in sig.relations:
            raise TypeError_(f"unknown relation {phi.pred}")
        want = sig.relations[phi.pred]
        if len(want) != len(phi.args):
            raise TypeError_(f"{phi.pred} expects {len(want)} arguments, got {len(phi.args)}")
        for w, a in zip(want, phi.args):
            got = typecheck_term(ctx, a, sig)
            if got != w:
                raise TypeError_(f"argument of {phi.pred} has type {got}, expected {w}")
        return True
    if isinstance(phi, Eq):
        tl = typecheck_term(ctx, phi.left, sig)
        tr = typecheck_term(ctx, phi.right, sig)
        if tl != tr:
            raise TypeError_(f"equation between types {tl} and {tr}")
        return True
    if isinstance(phi, Fresh):
        ta = typecheck_term(ctx, phi.name, sig)
        if not isinstance(ta, NameType):
            raise TypeError_(f"freshness needs a name on the left, got type {ta}")
        typecheck_term(ctx, phi.body, sig)
        return True
    if isinstance(phi, (And, Or, Imp)):
        return typecheck_formula(ctx, phi.left, sig) and typecheck_formula(ctx, phi.right, sig)
    if isinstance(phi, (Forall, Exists)):
        if not sig.well_formed(phi.sort):
            raise TypeError_(f"quantifier over undeclared type {phi.sort}")
        var, body = _bind_apart(ctx, phi.var, phi.body, False)
        return typecheck_formula(ctx.add_var(var, phi.sort), body, sig)
    if isinstance(phi, NewVar):
        if not isinstance(phi.sort, NameType) or not sig.well_formed(phi.sort):
            raise TypeError_(f"fresh-name quantifier over non-name type {phi.sort}")
        var, body = _bind_apart(ctx, phi.var, phi.body, False)
        return typecheck_formula(ctx.add_var(var, phi.sort), body, sig)
    if isinstance(phi, New):
        if not isinstance(phi.sort, NameType) or not sig.well_formed(phi.sort):
            raise TypeError_(f"fresh-name quantifier over non-name type {phi.sort}")
        name, body = _bind_apart(ctx, phi.name, phi.body, True)
        return typecheck_formula(ctx.add_fresh(name, phi.sort), body, sig)
    raise TypeError_(f"not a formula: {phi!r}")


def check_context(ctx: Context, sig: Signature = DEFAULT_SIGNATURE) -> bool:
    for e in ctx.entries:
        if not sig.well_formed(e.sort):
            raise TypeError_(f"binding {entry_id(e)} has undeclared type {e.sort}")
    return True


def well_typed(ctx: Context, phi, sig: Signature = DEFAULT_SIGNATURE) -> bool:
    try:
        return typecheck_formula(ctx, phi, sig)
    except TypeError_:
        return False

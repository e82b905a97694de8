"""Nominal terms, formulas and signatures.

Names are kept explicit (no de Bruijn indices) because contexts refer to
name-symbols by identity.  Variables and name-symbols live in separate
universes; both are identified by plain strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union


class SyntaxError_(ValueError):
    """Raised for ill-formed syntax objects and bad signature declarations."""


def _memo_hash(cls):
    """Cache the field hash on the instance; trees are hashed over and over."""
    field_hash = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = field_hash(self)
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class DataType:
    name: str


@dataclass(frozen=True)
class NameType:
    name: str


@dataclass(frozen=True)
class AbsType:
    name_type: NameType
    body: "Type"

    def __post_init__(self):
        if not isinstance(self.name_type, NameType):
            raise SyntaxError_(f"abstraction over non-name type {self.name_type}")


Type = Union[DataType, NameType, AbsType]


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class NameSym:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@_memo_hash
@dataclass(frozen=True)
class App:
    fn: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@_memo_hash
@dataclass(frozen=True)
class Swap:
    left: "Term"
    right: "Term"
    body: "Term"


@_memo_hash
@dataclass(frozen=True)
class Abs:
    name: "Term"
    body: "Term"


Term = Union[Var, NameSym, Const, App, Swap, Abs]


# ------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@_memo_hash
@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@_memo_hash
@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@_memo_hash
@dataclass(frozen=True)
class Fresh:
    name: Term
    body: Term


@_memo_hash
@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@_memo_hash
@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@_memo_hash
@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@_memo_hash
@dataclass(frozen=True)
class Forall:
    var: str
    sort: Type
    body: "Formula"


@_memo_hash
@dataclass(frozen=True)
class Exists:
    var: str
    sort: Type
    body: "Formula"


@_memo_hash
@dataclass(frozen=True)
class New:
    """The fresh-name quantifier binding a name-symbol."""
    name: str
    sort: NameType
    body: "Formula"


@_memo_hash
@dataclass(frozen=True)
class NewVar:
    """The fresh-name quantifier binding a variable (the NL side of the translation)."""
    var: str
    sort: NameType
    body: "Formula"


Formula = Union[Top, Bot, Atom, Eq, Fresh, And, Or, Imp, Forall, Exists, New, NewVar]

BINARY = (And, Or, Imp)
VAR_BINDERS = (Forall, Exists, NewVar)
ATOMS = (Atom, Eq, Fresh)

BUILTIN_FUNCTIONS = frozenset({"swap", "abs"})
BUILTIN_RELATIONS = frozenset({"eq", "fresh"})


def neg(phi: Formula) -> Formula:
    return Imp(phi, Bot())


def iff(phi: Formula, psi: Formula) -> Formula:
    return And(Imp(phi, psi), Imp(psi, phi))


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Bot()
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def is_atom(phi) -> bool:
    return isinstance(phi, ATOMS)


def is_constraint(phi) -> bool:
    return isinstance(phi, (Eq, Fresh))


def atom_parts(phi) -> tuple[str, tuple]:
    """View any atomic formula uniformly as (predicate, arguments)."""
    if isinstance(phi, Atom):
        return phi.pred, phi.args
    if isinstance(phi, Eq):
        return "eq", (phi.left, phi.right)
    if isinstance(phi, Fresh):
        return "fresh", (phi.name, phi.body)
    raise SyntaxError_(f"not an atomic formula: {phi!r}")


def make_atom(pred: str, args) -> Formula:
    args = tuple(args)
    if pred == "eq":
        if len(args) != 2:
            raise SyntaxError_("eq takes two arguments")
        return Eq(*args)
    if pred == "fresh":
        if len(args) != 2:
            raise SyntaxError_("fresh takes two arguments")
        return Fresh(*args)
    return Atom(pred, args)


def term_children(t) -> tuple:
    if isinstance(t, App):
        return t.args
    if isinstance(t, Swap):
        return (t.left, t.right, t.body)
    if isinstance(t, Abs):
        return (t.name, t.body)
    return ()


def rebuild_term(t, children) -> Term:
    children = tuple(children)
    if isinstance(t, App):
        return App(t.fn, children)
    if isinstance(t, Swap):
        return Swap(*children)
    if isinstance(t, Abs):
        return Abs(*children)
    return t


# ---------------------------------------------------- free identifiers

def term_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (NameSym, Const)):
        return frozenset()
    out = set()
    for c in term_children(t):
        out |= term_vars(c)
    return frozenset(out)


def term_names(t) -> frozenset:
    if isinstance(t, NameSym):
        return frozenset((t.name,))
    if isinstance(t, (Var, Const)):
        return frozenset()
    out = set()
    for c in term_children(t):
        out |= term_names(c)
    return frozenset(out)


def free_ids(e) -> tuple[frozenset, frozenset]:
    """Free variable ids and free name-symbol ids of a term or formula."""
    if isinstance(e, (Var, NameSym, Const, App, Swap, Abs)):
        return term_vars(e), term_names(e)
    if isinstance(e, (Top, Bot)):
        return frozenset(), frozenset()
    if is_atom(e):
        vs, ns = set(), set()
        for a in atom_parts(e)[1]:
            vs |= term_vars(a)
            ns |= term_names(a)
        return frozenset(vs), frozenset(ns)
    if isinstance(e, BINARY):
        v1, n1 = free_ids(e.left)
        v2, n2 = free_ids(e.right)
        return v1 | v2, n1 | n2
    if isinstance(e, VAR_BINDERS):
        v, n = free_ids(e.body)
        return v - {e.var}, n
    if isinstance(e, New):
        v, n = free_ids(e.body)
        return v, n - {e.name}
    raise SyntaxError_(f"not a term or formula: {e!r}")


def fvn(e) -> tuple[frozenset, frozenset]:
    """Free variables and free name-symbols, as Var and NameSym objects."""
    vs, ns = free_ids(e)
    return frozenset(Var(v) for v in vs), frozenset(NameSym(n) for n in ns)


def all_ids(e) -> set:
    """Every identifier occurring anywhere in e, bound or free."""
    out = set()

    def walk(x):
        if isinstance(x, (Var, NameSym, Const)):
            out.add(x.name)
        elif isinstance(x, (App, Swap, Abs)):
            for c in term_children(x):
                walk(c)
        elif is_atom(x):
            for a in atom_parts(x)[1]:
                walk(a)
        elif isinstance(x, BINARY):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, VAR_BINDERS):
            out.add(x.var)
            walk(x.body)
        elif isinstance(x, New):
            out.add(x.name)
            walk(x.body)

    walk(e)
    return out


# -------------------------------------------------------- fresh names

def fresh_id(base: str, avoid) -> str:
    stem = base.rstrip("0123456789'") or "v"
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


class NameSupply:
    """Deterministic generator of identifiers unused so far.

    Every generated id is added to the used set, so two calls never collide.
    """

    def __init__(self, used: Iterable[str] = ()):
        self.used = set(used)

    def reserve(self, ids: Iterable[str]) -> None:
        self.used.update(ids)

    def fresh(self, hint: str = "v") -> str:
        new = fresh_id(hint, self.used)
        self.used.add(new)
        return new

    def var(self, hint: str = "x") -> Var:
        return Var(self.fresh(hint))

    def name(self, hint: str = "a") -> NameSym:
        return NameSym(self.fresh(hint))


# ------------------------------------------------------- substitution

def _subst_term(t, vmap, nmap):
    if isinstance(t, Var):
        return vmap.get(t.name, t)
    if isinstance(t, NameSym):
        return nmap.get(t.name, t)
    if isinstance(t, Const):
        return t
    return rebuild_term(t, (_subst_term(c, vmap, nmap) for c in term_children(t)))


def _subst(e, vmap, nmap):
    if not vmap and not nmap:
        return e
    if isinstance(e, (Var, NameSym, Const, App, Swap, Abs)):
        return _subst_term(e, vmap, nmap)
    if isinstance(e, (Top, Bot)):
        return e
    if is_atom(e):
        pred, args = atom_parts(e)
        return make_atom(pred, (_subst_term(a, vmap, nmap) for a in args))
    if isinstance(e, BINARY):
        return type(e)(_subst(e.left, vmap, nmap), _subst(e.right, vmap, nmap))
    body_v, body_n = free_ids(e)
    if isinstance(e, VAR_BINDERS):
        bound = e.var
        vm = {k: v for k, v in vmap.items() if k != bound and k in body_v}
        nm = {k: v for k, v in nmap.items() if k in body_n}
        vals = list(vm.values()) + list(nm.values())
        captured = set()
        for v in vals:
            captured |= term_vars(v)
        if bound in captured:
            avoid = all_ids(e.body) | captured | set(vm) | set(nm)
            new = fresh_id(bound, avoid)
            vm[bound] = Var(new)
            bound = new
        return type(e)(bound, e.sort, _subst(e.body, vm, nm))
    if isinstance(e, New):
        bound = e.name
        vm = {k: v for k, v in vmap.items() if k in body_v}
        nm = {k: v for k, v in nmap.items() if k != bound and k in body_n}
        captured = set()
        for v in list(vm.values()) + list(nm.values()):
            captured |= term_names(v)
        if bound in captured:
            avoid = all_ids(e.body) | captured | set(vm) | set(nm)
            new = fresh_id(bound, avoid)
            nm[bound] = NameSym(new)
            bound = new
        return New(bound, e.sort, _subst(e.body, vm, nm))
    raise SyntaxError_(f"not a term or formula: {e!r}")


def substitute(e, mapping: Mapping):
    """Simultaneous capture-avoiding substitution.

    mapping keys are Var or NameSym objects; values are terms.
    """
    vmap, nmap = {}, {}
    for k, v in mapping.items():
        if isinstance(k, Var):
            vmap[k.name] = v
        elif isinstance(k, NameSym):
            nmap[k.name] = v
        else:
            raise SyntaxError_(f"cannot substitute for {k!r}")
    return _subst(e, vmap, nmap)


def subst(e, x, t):
    """Replace the free occurrences of x (a Var, or a NameSym) in e by t."""
    if isinstance(x, str):
        x = Var(x)
    return substitute(e, {x: t})


def rename_bound(e, avoid) -> Formula:
    """Rename every binder of e whose id is in avoid to an unused id."""
    if isinstance(e, (Top, Bot)) or is_atom(e):
        return e
    if isinstance(e, BINARY):
        return type(e)(rename_bound(e.left, avoid), rename_bound(e.right, avoid))
    if isinstance(e, VAR_BINDERS):
        body = e.body
        var = e.var
        if var in avoid:
            new = fresh_id(var, set(avoid) | all_ids(e))
            body = substitute(body, {Var(var): Var(new)})
            var = new
        return type(e)(var, e.sort, rename_bound(body, avoid))
    if isinstance(e, New):
        body = e.body
        nm = e.name
        if nm in avoid:
            new = fresh_id(nm, set(avoid) | all_ids(e))
            body = substitute(body, {NameSym(nm): NameSym(new)})
            nm = new
        return New(nm, e.sort, rename_bound(body, avoid))
    raise SyntaxError_(f"not a formula: {e!r}")


# ---------------------------------------------------------- swapping

def swap_formula(a: Term, b: Term, phi: Formula, ctx=None) -> Formula:
    """Push the swapping (a b) through phi, wrapping atom arguments.

    If a context is supplied, a and b are typechecked in it and must share
    a name type.
    """
    if ctx is not None:
        from .context import TypeError_, typecheck_term
        ta, tb = typecheck_term(ctx, a), typecheck_term(ctx, b)
        if ta != tb or not isinstance(ta, NameType):
            raise TypeError_(f"swap of {ta} with {tb}")
    avoid_v = term_vars(a) | term_vars(b)
    avoid_n = term_names(a) | term_names(b)
    return _swap(a, b, phi, avoid_v, avoid_n)


def _swap(a, b, phi, avoid_v, avoid_n):
    if isinstance(phi, (Top, Bot)):
        return phi
    if is_atom(phi):
        pred, args = atom_parts(phi)
        return make_atom(pred, (Swap(a, b, t) for t in args))
    if isinstance(phi, BINARY):
        return type(phi)(_swap(a, b, phi.left, avoid_v, avoid_n),
                         _swap(a, b, phi.right, avoid_v, avoid_n))
    if isinstance(phi, VAR_BINDERS):
        var, body = phi.var, phi.body
        if var in avoid_v:
            new = fresh_id(var, all_ids(phi) | avoid_v | avoid_n)
            body = substitute(body, {Var(var): Var(new)})
            var = new
        return type(phi)(var, phi.sort, _swap(a, b, body, avoid_v, avoid_n))
    if isinstance(phi, New):
        nm, body = phi.name, phi.body
        if nm in avoid_n:
            new = fresh_id(nm, all_ids(phi) | avoid_v | avoid_n)
            body = substitute(body, {NameSym(nm): NameSym(new)})
            nm = new
        return New(nm, phi.sort, _swap(a, b, body, avoid_v, avoid_n))
    raise SyntaxError_(f"not a formula: {phi!r}")


# ------------------------------------------------- alpha-equivalence

def _term_key(t, env):
    if isinstance(t, Var):
        i = env.get(("v", t.name))
        return ("v", t.name) if i is None else ("bv", i)
    if isinstance(t, NameSym):
        i = env.get(("n", t.name))
        return ("n", t.name) if i is None else ("bn", i)
    if isinstance(t, Const):
        return ("c", t.name)
    if isinstance(t, App):
        return ("app", t.fn) + tuple(_term_key(c, env) for c in t.args)
    if isinstance(t, Swap):
        return ("swap",) + tuple(_term_key(c, env) for c in term_children(t))
    if isinstance(t, Abs):
        return ("abs",) + tuple(_term_key(c, env) for c in term_children(t))
    raise SyntaxError_(f"not a term: {t!r}")


def _key(phi, env, depth):
    if isinstance(phi, Top):
        return ("top",)
    if isinstance(phi, Bot):
        return ("bot",)
    if is_atom(phi):
        pred, args = atom_parts(phi)
        return ("atom", pred) + tuple(_term_key(a, env) for a in args)
    if isinstance(phi, BINARY):
        return (type(phi).__name__, _key(phi.left, env, depth), _key(phi.right, env, depth))
    if isinstance(phi, VAR_BINDERS):
        inner = dict(env)
        inner[("v", phi.var)] = depth
        return (type(phi).__name__, phi.sort, _key(phi.body, inner, depth + 1))
    if isinstance(phi, New):
        inner = dict(env)
        inner[("n", phi.name)] = depth
        return ("New", phi.sort, _key(phi.body, inner, depth + 1))
    raise SyntaxError_(f"not a formula: {phi!r}")


def alpha_key(phi: Formula) -> tuple:
    """A hashable key identifying phi up to renaming of bound identifiers."""
    return _key(phi, {}, 0)


def alpha_eq(phi: Formula, psi: Formula) -> bool:
    return alpha_key(phi) == alpha_key(psi)


# ------------------------------------------------------------ measures

def formula_size(phi: Formula) -> int:
    """Number of connectives and quantifiers; atoms, top and bot count zero."""
    if isinstance(phi, (Top, Bot)) or is_atom(phi):
        return 0
    if isinstance(phi, BINARY):
        return 1 + formula_size(phi.left) + formula_size(phi.right)
    return 1 + formula_size(phi.body)


def term_depth(t) -> int:
    kids = term_children(t)
    return 1 + max((term_depth(c) for c in kids), default=0)


def formula_depth(phi: Formula) -> int:
    if isinstance(phi, (Top, Bot)) or is_atom(phi):
        return 0
    if isinstance(phi, BINARY):
        return 1 + max(formula_depth(phi.left), formula_depth(phi.right))
    return 1 + formula_depth(phi.body)


# ----------------------------------------------------------- signature

@dataclass(frozen=True)
class Signature:
    name_types: frozenset = frozenset()
    data_types: frozenset = frozenset()
    constants: Mapping[str, DataType] = field(default_factory=dict)
    functions: Mapping[str, tuple] = field(default_factory=dict)
    relations: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "name_types", frozenset(self.name_types))
        object.__setattr__(self, "data_types", frozenset(self.data_types))
        if self.name_types & self.data_types:
            raise SyntaxError_(f"type ids declared twice: {sorted(self.name_types & self.data_types)}")
        seen = set()
        for kind in (self.constants, self.functions, self.relations):
            for k in kind:
                if k in seen:
                    raise SyntaxError_(f"symbol {k} declared twice")
                if k in BUILTIN_FUNCTIONS or k in BUILTIN_RELATIONS:
                    raise SyntaxError_(f"built-in symbol {k} cannot be redeclared")
                seen.add(k)
        for c, ty in self.constants.items():
            if not isinstance(ty, DataType) or not self.well_formed(ty):
                raise SyntaxError_(f"constant {c} needs a declared data type")
        for f, (args, res) in self.functions.items():
            if not isinstance(res, DataType) or not self.well_formed(res):
                raise SyntaxError_(f"function {f} must return a declared data type")
            for a in args:
                if not self.well_formed(a):
                    raise SyntaxError_(f"function {f} has ill-formed argument type {a}")
        for p, args in self.relations.items():
            for a in args:
                if not self.well_formed(a):
                    raise SyntaxError_(f"relation {p} has ill-formed argument type {a}")

    def well_formed(self, ty) -> bool:
        if isinstance(ty, DataType):
            return ty.name in self.data_types
        if isinstance(ty, NameType):
            return ty.name in self.name_types
        if isinstance(ty, AbsType):
            return self.well_formed(ty.name_type) and self.well_formed(ty.body)
        return False

    def type_named(self, name: str) -> Type:
        if name in self.name_types:
            return NameType(name)
        if name in self.data_types:
            return DataType(name)
        raise SyntaxError_(f"unknown type {name}")


NU = NameType("nu")
DELTA = DataType("delta")


def test_signature() -> Signature:
    """The small signature {nu, delta, c, f: delta,delta -> delta, p: delta -> o}."""
    return Signature(
        name_types={"nu"},
        data_types={"delta"},
        constants={"c": DELTA},
        functions={"f": ((DELTA, DELTA), DELTA)},
        relations={"p": (DELTA,)},
    )


def rich_signature() -> Signature:
    """A larger signature with two name types and relations over names."""
    nu2 = NameType("nu2")
    return Signature(
        name_types={"nu", "nu2"},
        data_types={"delta"},
        constants={"c": DELTA, "d": DELTA},
        functions={"f": ((DELTA, DELTA), DELTA), "g": ((NU, DELTA), DELTA)},
        relations={"p": (DELTA,), "q": (NU, DELTA), "r": (NU,), "s": (nu2,)},
    )

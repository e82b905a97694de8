"""The ground term model: swapping, freshness and equality on closed terms.

Ground terms reuse the syntax classes NameSym, Const, App and Abs; they
never contain Var or Swap.  Everything here is a terminating structural
recursion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from .calculus import (
    AXIOM_PARAMS, Derivation, Mode, RuleApp, Sequent, AxiomError, CLASSICAL,
    axiom_instances, contains, positions_of, replace_at,
)
from .context import (
    DEFAULT_SIGNATURE, Context, FreshBind, TypeError_, VarBind, in_fresh_set,
    typecheck_term,
)
from .syntax import (
    Abs, AbsType, App, Atom, Bot, Const, DataType, Eq, Fresh, NameSym,
    NameType, Signature, Swap, Var, fresh_id, free_ids, is_constraint,
    
)


class ModelError(ValueError):
    """Raised for non-ground input, unbound variables or non-constraints."""


@lru_cache(maxsize=200_000)
def is_ground(t) -> bool:
    if isinstance(t, (NameSym, Const)):
        return True
    if isinstance(t, App):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, Abs):
        return isinstance(t.name, NameSym) and is_ground(t.body)
    return False


# ------------------------------------------------------------- relations

@lru_cache(maxsize=200_000)
def ground_swap(a: NameSym, b: NameSym, t):
    """Exchange the names a and b throughout the ground term t."""
    if isinstance(t, NameSym):
        if t == a:
            return b
        if t == b:
            return a
        return t
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(ground_swap(a, b, s) for s in t.args))
    if isinstance(t, Abs):
        return Abs(ground_swap(a, b, t.name), ground_swap(a, b, t.body))
    raise ModelError(f"not a ground term: {t!r}")


@lru_cache(maxsize=200_000)
def ground_fresh(a: NameSym, t) -> bool:
    if isinstance(t, NameSym):
        return t != a
    if isinstance(t, Const):
        return True
    if isinstance(t, App):
        return all(ground_fresh(a, s) for s in t.args)
    if isinstance(t, Abs):
        return t.name == a or ground_fresh(a, t.body)
    raise ModelError(f"not a ground term: {t!r}")


@lru_cache(maxsize=200_000)
def ground_eq(t, u) -> bool:
    if isinstance(t, (NameSym, Const)):
        return t == u
    if isinstance(t, App):
        return (isinstance(u, App) and t.fn == u.fn and len(t.args) == len(u.args)
                and all(ground_eq(x, y) for x, y in zip(t.args, u.args)))
    if isinstance(t, Abs):
        if not isinstance(u, Abs):
            return False
        a, b = t.name, u.name
        if a == b:
            return ground_eq(t.body, u.body)
        return ground_fresh(a, u.body) and ground_eq(t.body, ground_swap(a, b, u.body))
    raise ModelError(f"not a ground term: {t!r}")


# --------------------------------------------------------- interpretations

@dataclass(frozen=True)
class Interpretation:
    """A map from variables to ground terms, plus the types of the extra names used."""
    values: tuple = ()
    names: tuple = ()

    @staticmethod
    def of(values: dict, names: Optional[dict] = None) -> "Interpretation":
        return Interpretation(tuple(sorted(values.items())), tuple(sorted((names or {}).items())))

    def as_dict(self) -> dict:
        return dict(self.values)

    def name_types(self) -> dict:
        return dict(self.names)

    def __getitem__(self, x: str):
        return self.as_dict()[x]


def _values(theta) -> dict:
    if isinstance(theta, Interpretation):
        return theta.as_dict()
    return dict(theta)


def interpret(theta, t):
    """Evaluate a term under theta; swappings are carried out on the result."""
    vals = _values(theta)

    def go(s):
        k = type(s)
        if k is Swap:
            a, b = go(s.left), go(s.right)
            if type(a) is not NameSym or type(b) is not NameSym:
                raise ModelError("swapping of non-names")
            return ground_swap(a, b, go(s.body))
        if k is Var:
            if s.name not in vals:
                raise ModelError(f"unbound variable {s.name}")
            return vals[s.name]
        if k is NameSym or k is Const or is_ground(s):
            return s
        if k is App:
            return App(s.fn, tuple(go(x) for x in s.args))
        if k is Abs:
            return Abs(go(s.name), go(s.body))
        raise ModelError(f"not a term: {s!r}")

    return go(t)


def satisfies(theta, constraints) -> bool:
    """theta |= A for one constraint, or for every member of a collection."""
    if isinstance(constraints, (Eq, Fresh, Atom)) or not hasattr(constraints, "__iter__"):
        constraints = [constraints]
    for a in constraints:
        if isinstance(a, Eq):
            if not ground_eq(interpret(theta, a.left), interpret(theta, a.right)):
                return False
        elif isinstance(a, Fresh):
            n = interpret(theta, a.name)
            if not isinstance(n, NameSym):
                raise ModelError("freshness of a non-name")
            if not ground_fresh(n, interpret(theta, a.body)):
                return False
        else:
            raise ModelError(f"not a constraint: {a!r}")
    return True


def ground_type(t, name_types: dict, sig: Signature = DEFAULT_SIGNATURE):
    """Type of a ground term, given the types of the name-symbols it uses."""
    ctx = Context(tuple(FreshBind(n, ty) for n, ty in sorted(name_types.items())))
    names = free_ids(t)[1]
    missing = names - set(name_types)
    if missing:
        raise ModelError(f"name-symbols of unknown type: {sorted(missing)}")
    try:
        return typecheck_term(ctx, t, sig)
    except TypeError_ as e:
        raise ModelError(str(e)) from None


def satisfies_ctx(theta, ctx: Context, sig: Signature = DEFAULT_SIGNATURE) -> bool:
    vals = _values(theta)
    types = {e.name: e.sort for e in ctx.fresh_names()}
    if isinstance(theta, Interpretation):
        types.update(theta.name_types())
    for i, e in enumerate(ctx.entries):
        if isinstance(e, VarBind):
            if e.var not in vals:
                return False
            v = vals[e.var]
            if not is_ground(v):
                return False
            try:
                if ground_type(v, types, sig) != e.sort:
                    return False
            except ModelError:
                return False
        else:
            for earlier in ctx.entries[:i]:
                if isinstance(earlier, VarBind) and not ground_fresh(NameSym(e.name), vals[earlier.var]):
                    return False
    return True


# --------------------------------------------------------- enumeration

def ground_terms(ty, depth: int, names: dict, sig: Signature = DEFAULT_SIGNATURE) -> list:
    """All ground terms of a type with height at most depth, by height then constructor."""
    layers = _ground_layers(depth, tuple(sorted((k, v.name) for k, v in names.items())), sig)
    return [t for level in layers for t in level.get(ty, [])]


def _ground_layers(depth, names_key, sig):
    names = {}
    for n, tyname in names_key:
        names.setdefault(NameType(tyname), []).append(NameSym(n))
    types = [DataType(d) for d in sorted(sig.data_types)] + [NameType(n) for n in sorted(sig.name_types)]
    abs_types = [AbsType(NameType(n), b) for n in sorted(sig.name_types) for b in types]
    all_types = types + abs_types
    layers = []
    seen = {ty: [] for ty in all_types}
    for h in range(1, depth + 1):
        level = {ty: [] for ty in all_types}
        if h == 1:
            for ty in types:
                if isinstance(ty, NameType):
                    level[ty] = list(names.get(ty, []))
                else:
                    level[ty] = [Const(c) for c in sorted(sig.constants) if sig.constants[c] == ty]
        else:
            for f in sorted(sig.functions):
                args, res = sig.functions[f]
                pools = [seen.get(a, []) for a in args]
                for combo in itertools.product(*pools):
                    if max((_height(x) for x in combo), default=0) == h - 1:
                        level[res].append(App(f, combo))
            for ty in abs_types:
                for a in names.get(ty.name_type, []):
                    for body in seen.get(ty.body, []):
                        if _height(body) == h - 1:
                            level[ty].append(Abs(a, body))
        for ty in all_types:
            seen[ty] = seen[ty] + level[ty]
        layers.append(level)
    return layers


def _height(t) -> int:
    if isinstance(t, App):
        return 1 + max((_height(a) for a in t.args), default=0)
    if isinstance(t, Abs):
        return 1 + max(_height(t.name), _height(t.body))
    return 1


def _infer_name_types(gamma, ctx: Context, sig: Signature) -> dict:
    """Types for name-symbols used by the constraints but not bound in the context."""
    known = {e.name: e.sort for e in ctx.fresh_names()}
    out = {}
    default = NameType(sorted(sig.name_types)[0]) if sig.name_types else None
    for a in gamma:
        _, ns = free_ids(a)
        for n in sorted(ns - set(known)):
            ty = None
            if isinstance(a, Eq):
                for side, other in ((a.left, a.right), (a.right, a.left)):
                    if side == NameSym(n):
                        try:
                            ty = typecheck_term(ctx, other, sig)
                        except TypeError_:
                            pass
            out.setdefault(n, ty or default)
    return out


def sat_search(ctx: Context, gamma, depth: int, extra_names: int = 2,
               sig: Signature = DEFAULT_SIGNATURE) -> Optional[Interpretation]:
    """First interpretation (in enumeration order) satisfying ctx and every constraint.

    A None result only says no witness exists within the bound.
    """
    gamma = list(gamma)
    for a in gamma:
        if not is_constraint(a):
            raise ModelError(f"not a constraint: {a!r}")
    names = {e.name: e.sort for e in ctx.fresh_names()}
    names.update(_infer_name_types(gamma, ctx, sig))
    used = set(ctx.ids()) | set(names)
    for a in gamma:
        vs, ns = free_ids(a)
        used |= vs | ns
    extra = {}
    for nt in sorted(sig.name_types):
        for _ in range(extra_names):
            n = fresh_id("n", used)
            used.add(n)
            extra[n] = NameType(nt)
    all_names = {**names, **extra}
    variables = ctx.variables()
    for a in gamma:
        vs, _ = free_ids(a)
        unbound = vs - {v.var for v in variables}
        if unbound:
            raise ModelError(f"constraint mentions unbound variables {sorted(unbound)}")
    pools = [ground_terms(v.sort, depth, all_names, sig) for v in variables]
    # each constraint is checked as soon as its last variable is assigned
    order = [v.var for v in variables]
    due = {i: [] for i in range(len(order) + 1)}
    for a in gamma:
        vs, _ = free_ids(a)
        last = max((order.index(v) + 1 for v in vs), default=0)
        due[last].append(a)
    fresh_due = {i: [] for i in range(len(order))}
    for k, e in enumerate(ctx.entries):
        if isinstance(e, FreshBind):
            for earlier in ctx.entries[:k]:
                if isinstance(earlier, VarBind):
                    fresh_due[order.index(earlier.var)].append(NameSym(e.name))
    if not all(satisfies({}, a) for a in due[0]):
        return None

    def go(i: int, vals: dict) -> Optional[dict]:
        if i == len(order):
            return vals
        for t in pools[i]:
            if not all(ground_fresh(n, t) for n in fresh_due[i]):
                continue
            vals[order[i]] = t
            if all(satisfies(vals, a) for a in due[i + 1]):
                found = go(i + 1, vals)
                if found is not None:
                    return found
            del vals[order[i]]
        return None

    found = go(0, {})
    if found is None:
        return None
    used_names = set()
    for t in found.values():
        used_names |= free_ids(t)[1]
    return Interpretation.of(dict(found), {n: extra[n] for n in used_names if n in extra})


# ------------------------------------------------- bounded proof search

def _atomic_terms(ctx: Context, sig: Signature) -> list:
    out = [Var(e.var) if isinstance(e, VarBind) else NameSym(e.name) for e in ctx.entries]
    out += [Const(c) for c in sorted(sig.constants)]
    return out


def _typed(ctx, t, sig):
    try:
        return typecheck_term(ctx, t, sig)
    except TypeError_:
        return None


def _axiom_steps(seq: Sequent, sig: Signature) -> Iterator[RuleApp]:
    ctx = seq.ctx
    terms = _atomic_terms(ctx, sig)
    names = [t for t in terms if isinstance(_typed(ctx, t, sig), NameType)]
    for ax in sorted(AXIOM_PARAMS):
        keys = AXIOM_PARAMS[ax]
        pools = []
        for k in keys:
            if k in ("a", "b"):
                pools.append(names)
            elif k == "c":
                pools.append([Const(c) for c in sorted(sig.constants)])
            elif k == "f":
                pools.append(sorted(sig.functions))
            elif k == "p":
                pools.append(sorted(sig.relations) + ["eq", "fresh"])
            elif k == "args":
                pools.append([None])
            else:
                pools.append(terms)
        for combo in itertools.product(*pools):
            params = dict(zip(keys, combo))
            if "args" in params:
                arity = _arities(params, sig)
                if arity is None:
                    continue
                arg_choices = itertools.product(terms, repeat=arity)
            else:
                arg_choices = [None]
            for args in arg_choices:
                if args is not None:
                    params["args"] = tuple(args)
                try:
                    inst = axiom_instances(ax, params, ctx, sig)
                except AxiomError:
                    continue
                if all(contains(seq.left, p) and _enough(seq.left, inst.premises) for p in inst.premises):
                    yield RuleApp("Ax", axiom=inst)


def _enough(left, premises) -> bool:
    from .calculus import mset
    have, need = mset(left), mset(premises)
    return all(have[k] >= n for k, n in need.items())


def _arities(params, sig):
    if "f" in params:
        f = params["f"]
        return 3 if f == "swap" else 2 if f == "abs" else len(sig.functions[f][0])
    p = params["p"]
    return 2 if p in ("eq", "fresh") else len(sig.relations[p])


def _nonlogical_steps(seq: Sequent, sig: Signature) -> Iterator[tuple]:
    """Every nonlogical inference (bounded parameters) with this conclusion."""
    ctx = seq.ctx
    terms = _atomic_terms(ctx, sig)
    for t in terms:
        phi = Eq(t, t)
        yield RuleApp("eqR", principal=phi), [seq.add_left(phi)]
    for eq in seq.left:
        if not isinstance(eq, Eq):
            continue
        for atom in seq.left:
            if atom is eq or atom.__class__ not in (Eq, Fresh, Atom):
                continue
            for pos in positions_of(atom, eq.left):
                out = replace_at(atom, pos, eq.right)
                yield RuleApp("eqS", principal=atom, equation=eq, positions=(pos,)), [seq.add_left(out)]
    for e in ctx.fresh_names():
        for t in terms:
            try:
                if in_fresh_set(ctx, NameSym(e.name), t):
                    phi = Fresh(NameSym(e.name), t)
                    yield RuleApp("ctxfresh", principal=phi), [seq.add_left(phi)]
            except TypeError_:
                pass
    for r in _axiom_steps(seq, sig):
        yield r, [seq.add_left(q) for q in r.axiom.conclusions]
    for phi in seq.left:
        if isinstance(phi, Eq) and isinstance(phi.left, Abs) and isinstance(phi.right, Abs):
            a, t, b, u = phi.left.name, phi.left.body, phi.right.name, phi.right.body
            yield RuleApp("A2", principal=phi), [seq.add_left(Eq(a, b), Eq(t, u)),
                                                 seq.add_left(Fresh(a, u), Eq(t, Swap(a, b, u)))]
    for nt in sorted(sig.name_types):
        n = fresh_id("n", set(ctx.ids()))
        inner = ctx.add_fresh(n, NameType(nt))
        yield RuleApp("F", eigen=n, sort=NameType(nt)), [Sequent(inner, seq.left, seq.right)]


def search_nonlogical(seq: Sequent, max_nodes: int, sig: Signature = DEFAULT_SIGNATURE,
                      mode: Mode = CLASSICAL) -> Optional[Derivation]:
    """Exhaustive search for a derivation of at most max_nodes nodes using nonlogical rules.

    Leaves may be hyp, botL or a premise-free axiom instance.  Parameters
    range over identifiers of the context and constants.
    """
    from .calculus import check_rule

    def leaves(s: Sequent):
        for phi in s.left:
            if isinstance(phi, Bot):
                yield RuleApp("botL", principal=phi)
            if phi.__class__ in (Eq, Fresh, Atom) and contains(s.right, phi):
                yield RuleApp("hyp", principal=phi)
        for r in _axiom_steps(s, sig):
            if not r.axiom.conclusions:
                yield r

    def go(s: Sequent, budget: int) -> Optional[Derivation]:
        if budget < 1:
            return None
        for r in leaves(s):
            if check_rule(mode, s, r, []) is None:
                return Derivation(s, r, ())
        if budget < 2:
            return None
        for r, prems in _nonlogical_steps(s, sig):
            if any(p.same(s) for p in prems):
                continue
            if len(prems) > budget - 1:
                continue
            found = _split(prems, budget - 1)
            if found is not None:
                return Derivation(s, r, tuple(found))
        return None

    def _split(prems, budget):
        if not prems:
            return []
        first, rest = prems[0], prems[1:]
        for b in range(1, budget - len(rest) + 1):
            d = go(first, b)
            if d is None:
                continue
            tail = _split(rest, budget - _size(d))
            if tail is not None:
                return [d] + tail
        return None

    return go(seq, max_nodes)


def _size(d: Derivation) -> int:
    return 1 + sum(_size(p) for p in d.premises)


def count_search_space(seq: Sequent, max_nodes: int, sig: Signature = DEFAULT_SIGNATURE) -> int:
    """Number of sequents visited by an exhaustive search (for reporting the bound)."""
    seen = 0

    def go(s, budget):
        nonlocal seen
        seen += 1
        if budget < 2:
            return
        for _, prems in _nonlogical_steps(s, sig):
            for p in prems:
                if not p.same(s):
                    go(p, budget - len(prems))

    go(seq, max_nodes)
    return seen


# ------------------------------------------------------------- axiom validity

CONSTRAINT_RELATIONS = ("eq", "fresh")


def instance_holds(inst) -> bool:
    """A ground instance /\\P => \\/Q is true in the term model."""
    return not satisfies({}, inst.premises) or any(satisfies({}, q) for q in inst.conclusions)


def term_model_names(per_type: int, sig: Signature = DEFAULT_SIGNATURE) -> dict:
    """per_type name-symbols for each name type: a0 a1 .. for the first type, b0 .. next."""
    letters = "abcdeghijk"
    return {f"{letters[k]}{i}": NameType(nt)
            for k, nt in enumerate(sorted(sig.name_types)) for i in range(per_type)}


def _model_types(sig):
    base = [DataType(d) for d in sorted(sig.data_types)] + [NameType(n) for n in sorted(sig.name_types)]
    return base + [AbsType(NameType(n), b) for n in sorted(sig.name_types) for b in base]


def scheme_instances(axiom: str, depth: int, names: dict, sig: Signature = DEFAULT_SIGNATURE):
    """Every ground instance of an axiom scheme over terms of height at most depth.

    Instances range over all types the signature can form, every ordered
    pair of names of one type (equal names included) and, for E3, the
    constraint relations, which are the only relations the model fixes.
    """
    if axiom not in AXIOM_PARAMS:
        raise ModelError(f"unknown axiom {axiom}")
    by_type = {}
    for n, ty in sorted(names.items()):
        by_type.setdefault(ty, []).append(NameSym(n))
    types = _model_types(sig)
    pool = {ty: ground_terms(ty, depth, names, sig) for ty in types}
    pairs = [(a, b) for ns in by_type.values() for a in ns for b in ns]

    def inst(**s):
        return axiom_instances(axiom, s, None, sig)

    if axiom == "S1":
        for ns in by_type.values():
            for a in ns:
                for ty in types:
                    for x in pool[ty]:
                        yield inst(a=a, x=x)
    elif axiom in ("S2", "F1"):
        for a, b in pairs:
            for ty in types:
                for x in pool[ty]:
                    yield inst(a=a, b=b, x=x)
    elif axiom in ("S3", "F4"):
        for a, b in pairs:
            yield inst(a=a, b=b)
    elif axiom == "E1":
        for a, b in pairs:
            for c in sorted(sig.constants):
                yield inst(a=a, b=b, c=Const(c))
    elif axiom == "E2":
        for a, b in pairs:
            for f in sorted(sig.functions):
                arg_types, _ = sig.functions[f]
                for args in itertools.product(*(pool[t] for t in arg_types)):
                    yield inst(a=a, b=b, f=f, args=args)
            for ns in by_type.values():
                for ty in types:
                    for n1 in ns:
                        for t in pool[ty]:
                            yield inst(a=a, b=b, f="abs", args=(n1, t))
                            for n2 in ns:
                                yield inst(a=a, b=b, f="swap", args=(n1, n2, t))
    elif axiom == "E3":
        for a, b in pairs:
            for ty in types:
                for t in pool[ty]:
                    for u in pool[ty]:
                        yield inst(a=a, b=b, p="eq", args=(t, u))
                    for ns in by_type.values():
                        for n in ns:
                            yield inst(a=a, b=b, p="fresh", args=(n, t))
    elif axiom == "F2":
        tys = sorted(by_type, key=lambda t: t.name)
        for t1 in tys:
            for t2 in tys:
                if t1 != t2:
                    for a in by_type[t1]:
                        for b in by_type[t2]:
                            yield inst(a=a, b=b)
    elif axiom == "F3":
        for ns in by_type.values():
            for a in ns:
                yield inst(a=a)
    else:  # A1
        for a, b in pairs:
            for ty in types:
                for x in pool[ty]:
                    for y in pool[ty]:
                        yield inst(a=a, b=b, x=x, y=y)


def validate_scheme(axiom: str, depth: int = 3, per_type: int = 3,
                    sig: Signature = DEFAULT_SIGNATURE) -> tuple:
    """(instances checked, first counterexample or None)."""
    n = 0
    for inst in scheme_instances(axiom, depth, term_model_names(per_type, sig), sig):
        n += 1
        if not instance_holds(inst):
            return n, inst
    return n, None

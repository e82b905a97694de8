"""Sequents, derivations and the rule checker.

A derivation node stores everything needed to recheck it without search:
the principal formula, witnesses, eigen-identifiers, the axiom instance for
nonlogical Ax steps and the replaced positions for equality substitution.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Iterator, Optional

from .context import (
    DEFAULT_SIGNATURE, Context, TypeError_, in_fresh_set, typecheck_formula,
    typecheck_term,
)
from .syntax import (
    Abs, AbsType, And, App, Bot, Const, Eq, Exists, Forall, Fresh, Imp,
    NameSym, NameType, New, Or, Signature, Swap, Top, Var, alpha_key,
    atom_parts, is_atom, make_atom, rebuild_term, subst, 
    term_children,
)


class Logic(Enum):
    CLASSICAL = "classical"
    INTUITIONISTIC = "intuitionistic"
    SINGLE = "single"


@dataclass(frozen=True)
class Mode:
    logic: Logic = Logic.CLASSICAL
    allow_cut: bool = False
    sig: Signature = DEFAULT_SIGNATURE

    def with_cut(self, allow: bool = True) -> "Mode":
        return replace(self, allow_cut=allow)


CLASSICAL = Mode(Logic.CLASSICAL)
INTUITIONISTIC = Mode(Logic.INTUITIONISTIC)
SINGLE = Mode(Logic.SINGLE)


# ------------------------------------------------------------ sequents

_key_ids: dict = {}


@lru_cache(maxsize=500_000)
def fkey(phi) -> int:
    """A small integer identifying phi up to alpha; equal keys mean alpha-equal formulas."""
    return _key_ids.setdefault(alpha_key(phi), len(_key_ids))


def mset(formulas) -> Counter:
    return Counter(fkey(f) for f in formulas)


def mset_eq(a, b) -> bool:
    return len(a) == len(b) and mset(a) == mset(b)


def remove_one(formulas, phi) -> Optional[tuple]:
    """Drop one occurrence of phi (up to alpha), or None if it is absent."""
    k = fkey(phi)
    out = list(formulas)
    for i, f in enumerate(out):
        if fkey(f) == k:
            del out[i]
            return tuple(out)
    return None


def count(formulas, phi) -> int:
    k = fkey(phi)
    return sum(1 for f in formulas if fkey(f) == k)


def contains(formulas, phi) -> bool:
    k = fkey(phi)
    return any(fkey(f) == k for f in formulas)


@dataclass(frozen=True)
class Sequent:
    ctx: Context
    left: tuple = ()
    right: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))

    def add_left(self, *fs) -> "Sequent":
        return Sequent(self.ctx, self.left + fs, self.right)

    def add_right(self, *fs) -> "Sequent":
        return Sequent(self.ctx, self.left, fs + self.right)

    def with_ctx(self, ctx: Context) -> "Sequent":
        return Sequent(ctx, self.left, self.right)

    def same(self, other: "Sequent") -> bool:
        if self.ctx == other.ctx and self.left == other.left and self.right == other.right:
            return True
        return (self.ctx == other.ctx and mset_eq(self.left, other.left)
                and mset_eq(self.right, other.right))


# --------------------------------------------------------------- rules

LOGICAL_RULES = frozenset({
    "hyp", "topR", "botL", "andR", "andL", "orR", "orR1", "orR2", "orL",
    "impR", "impL", "allR", "allL", "exR", "exL", "newR", "newL",
})
NONLOGICAL_RULES = frozenset({"eqR", "eqS", "Ax", "A2", "A3", "F", "ctxfresh"})
ALL_RULES = LOGICAL_RULES | NONLOGICAL_RULES | {"cut"}

# Axiom schemes: parameter names in order, and whether each names a term.
AXIOM_PARAMS = {
    "S1": ("a", "x"),
    "S2": ("a", "b", "x"),
    "S3": ("a", "b"),
    "E1": ("a", "b", "c"),
    "E2": ("a", "b", "f", "args"),
    "E3": ("a", "b", "p", "args"),
    "F1": ("a", "b", "x"),
    "F2": ("a", "b"),
    "F3": ("a",),
    "F4": ("a", "b"),
    "A1": ("a", "b", "x", "y"),
}


@dataclass(frozen=True)
class AxiomInstance:
    axiom: str
    params: tuple
    premises: tuple
    conclusions: tuple

    def param(self, key):
        return dict(self.params)[key]


@dataclass(frozen=True)
class RuleApp:
    name: str
    principal: object = None
    witness: object = None
    eigen: Optional[str] = None
    eigen2: Optional[str] = None
    sort: object = None
    axiom: Optional[AxiomInstance] = None
    equation: object = None
    positions: tuple = ()


@dataclass(frozen=True)
class Derivation:
    conclusion: Sequent
    rule: RuleApp
    premises: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))


class AxiomError(ValueError):
    pass


def _apply_fn(f: str, args):
    args = tuple(args)
    if f == "swap":
        if len(args) != 3:
            raise AxiomError("swap takes three arguments")
        return Swap(*args)
    if f == "abs":
        if len(args) != 2:
            raise AxiomError("abs takes two arguments")
        return Abs(*args)
    return App(f, args)


def axiom_instances(axiom: str, substitution: dict, ctx: Optional[Context] = None,
                    sig: Signature = DEFAULT_SIGNATURE) -> AxiomInstance:
    """Instantiate one of the equational and freshness axiom schemes.

    With a context the instance is typechecked; without one only the shape
    is built.
    """
    if axiom not in AXIOM_PARAMS:
        raise AxiomError(f"unknown axiom {axiom}")
    keys = AXIOM_PARAMS[axiom]
    missing = [k for k in keys if k not in substitution]
    if missing:
        raise AxiomError(f"{axiom} needs parameters {missing}")
    s = {k: substitution[k] for k in keys}
    if "args" in s:
        s["args"] = tuple(s["args"])
    a = s["a"]
    b = s.get("b")

    def sw(t):
        return Swap(a, b, t)

    if axiom == "S1":
        P, Q = (), (Eq(Swap(a, a, s["x"]), s["x"]),)
    elif axiom == "S2":
        P, Q = (), (Eq(sw(sw(s["x"])), s["x"]),)
    elif axiom == "S3":
        P, Q = (), (Eq(sw(a), b),)
    elif axiom == "E1":
        if not isinstance(s["c"], Const):
            raise AxiomError("E1 needs a constant")
        P, Q = (), (Eq(sw(s["c"]), s["c"]),)
    elif axiom == "E2":
        f = s["f"]
        if f not in sig.functions and f not in ("swap", "abs"):
            raise AxiomError(f"unknown function {f}")
        P = ()
        Q = (Eq(sw(_apply_fn(f, s["args"])), _apply_fn(f, (sw(t) for t in s["args"]))),)
    elif axiom == "E3":
        p = s["p"]
        if p not in sig.relations and p not in ("eq", "fresh"):
            raise AxiomError(f"unknown relation {p}")
        P = (make_atom(p, s["args"]),)
        Q = (make_atom(p, (sw(t) for t in s["args"])),)
    elif axiom == "F1":
        x = s["x"]
        P, Q = (Fresh(a, x), Fresh(b, x)), (Eq(sw(x), x),)
    elif axiom == "F2":
        P, Q = (), (Fresh(a, b),)
    elif axiom == "F3":
        P, Q = (Fresh(a, a),), ()
    elif axiom == "F4":
        P, Q = (), (Fresh(a, b), Eq(a, b))
    else:  # A1
        x, y = s["x"], s["y"]
        P, Q = (Fresh(a, y), Eq(x, sw(y))), (Eq(Abs(a, x), Abs(b, y)),)

    inst = AxiomInstance(axiom, tuple((k, s[k]) for k in keys), P, Q)
    if ctx is not None:
        _typecheck_instance(inst, ctx, sig)
    return inst


def _typecheck_instance(inst: AxiomInstance, ctx: Context, sig: Signature):
    s = dict(inst.params)
    try:
        ta = typecheck_term(ctx, s["a"], sig)
        if not isinstance(ta, NameType):
            raise AxiomError(f"{inst.axiom}: parameter a must have a name type, has {ta}")
        if "b" in s:
            tb = typecheck_term(ctx, s["b"], sig)
            if not isinstance(tb, NameType):
                raise AxiomError(f"{inst.axiom}: parameter b must have a name type, has {tb}")
            if inst.axiom == "F2":
                if ta == tb:
                    raise AxiomError("F2 requires two distinct name types")
            elif ta != tb:
                raise AxiomError(f"{inst.axiom}: a and b have different types {ta}, {tb}")
        for f in inst.premises + inst.conclusions:
            typecheck_formula(ctx, f, sig)
    except TypeError_ as e:
        raise AxiomError(f"{inst.axiom}: {e}") from None


def instance_from_params(axiom: str, params, ctx=None, sig=DEFAULT_SIGNATURE) -> AxiomInstance:
    return axiom_instances(axiom, dict(params), ctx, sig)


# ---------------------------------------------------------- positions

def subterm_at(atom, path):
    _, args = atom_parts(atom)
    t = args[path[0]]
    for i in path[1:]:
        t = term_children(t)[i]
    return t


def _replace_term(t, path, u):
    if not path:
        return u
    kids = list(term_children(t))
    kids[path[0]] = _replace_term(kids[path[0]], path[1:], u)
    return rebuild_term(t, kids)


def replace_at(atom, path, u):
    pred, args = atom_parts(atom)
    args = list(args)
    args[path[0]] = _replace_term(args[path[0]], path[1:], u)
    return make_atom(pred, args)


def positions_of(atom, t) -> list:
    """Every position in the atom's arguments holding exactly t."""
    out = []

    def walk(s, path):
        if s == t:
            out.append(path)
            return
        for i, c in enumerate(term_children(s)):
            walk(c, path + (i,))

    for i, a in enumerate(atom_parts(atom)[1]):
        walk(a, (i,))
    return out


# ------------------------------------------------------------ checking

class Violation(Exception):
    pass


def _need(cond, msg):
    if not cond:
        raise Violation(msg)


def _take_left(concl: Sequent, phi, what="principal formula"):
    rest = remove_one(concl.left, phi)
    _need(rest is not None, f"{what} not in antecedent")
    return rest


def _take_right(concl: Sequent, phi, what="principal formula"):
    rest = remove_one(concl.right, phi)
    _need(rest is not None, f"{what} not in succedent")
    return rest


def _typed(ctx, t, sig):
    try:
        return typecheck_term(ctx, t, sig)
    except TypeError_ as e:
        raise Violation(f"witness ill-typed: {e}") from None


def _expected(mode: Mode, concl: Sequent, r: RuleApp, prems) -> list:
    """Candidate premise lists; the node is valid if the actual premises match one."""
    ctx, G, D = concl.ctx, concl.left, concl.right
    sig = mode.sig
    logic = mode.logic
    name = r.name
    phi = r.principal
    S = Sequent

    if name == "hyp":
        _need(is_atom(phi), "hyp needs an atomic principal formula")
        _take_left(concl, phi)
        _take_right(concl, phi)
        return [[]]
    if name == "topR":
        _need(isinstance(phi, Top), "topR principal must be top")
        _take_right(concl, phi)
        return [[]]
    if name == "botL":
        _need(isinstance(phi, Bot), "botL principal must be bot")
        _take_left(concl, phi)
        return [[]]
    if name == "andR":
        _need(isinstance(phi, And), "andR principal must be a conjunction")
        rest = _take_right(concl, phi)
        return [[S(ctx, G, (phi.left,) + rest), S(ctx, G, (phi.right,) + rest)]]
    if name == "andL":
        _need(isinstance(phi, And), "andL principal must be a conjunction")
        rest = _take_left(concl, phi)
        return [[S(ctx, rest + (phi.left, phi.right), D)]]
    if name == "orR":
        _need(logic != Logic.SINGLE, "orR is not available in single-conclusion mode")
        _need(isinstance(phi, Or), "orR principal must be a disjunction")
        rest = _take_right(concl, phi)
        return [[S(ctx, G, (phi.left, phi.right) + rest)]]
    if name in ("orR1", "orR2"):
        _need(logic == Logic.SINGLE, f"{name} is only available in single-conclusion mode")
        _need(isinstance(phi, Or), f"{name} principal must be a disjunction")
        rest = _take_right(concl, phi)
        part = phi.left if name == "orR1" else phi.right
        return [[S(ctx, G, (part,) + rest)]]
    if name == "orL":
        _need(isinstance(phi, Or), "orL principal must be a disjunction")
        rest = _take_left(concl, phi)
        return [[S(ctx, rest + (phi.left,), D), S(ctx, rest + (phi.right,), D)]]
    if name == "impR":
        _need(isinstance(phi, Imp), "impR principal must be an implication")
        rest = _take_right(concl, phi)
        dropped = [S(ctx, G + (phi.left,), (phi.right,))]
        if logic == Logic.CLASSICAL:
            return [[S(ctx, G + (phi.left,), (phi.right,) + rest)], dropped]
        return [dropped]
    if name == "impL":
        _need(isinstance(phi, Imp), "impL principal must be an implication")
        rest = _take_left(concl, phi)
        kept = [S(ctx, G, (phi.left,)), S(ctx, rest + (phi.right,), D)]
        if logic == Logic.CLASSICAL:
            return [[S(ctx, rest, (phi.left,) + D), S(ctx, rest + (phi.right,), D)], kept]
        return [kept]
    if name in ("allR", "exL"):
        cls = Forall if name == "allR" else Exists
        _need(isinstance(phi, cls), f"{name} principal has the wrong shape")
        x = r.eigen
        _need(isinstance(x, str) and ctx.position(x) < 0, f"{name} eigenvariable must be new to the context")
        inner = ctx.add_var(x, phi.sort)
        body = subst(phi.body, Var(phi.var), Var(x))
        if name == "exL":
            rest = _take_left(concl, phi)
            return [[S(inner, rest + (body,), D)]]
        rest = _take_right(concl, phi)
        dropped = [S(inner, G, (body,))]
        if logic == Logic.CLASSICAL:
            return [[S(inner, G, (body,) + rest)], dropped]
        return [dropped]
    if name in ("allL", "exR"):
        cls = Forall if name == "allL" else Exists
        _need(isinstance(phi, cls), f"{name} principal has the wrong shape")
        _need(r.witness is not None, f"{name} needs a witness term")
        ty = _typed(ctx, r.witness, sig)
        _need(ty == phi.sort, f"witness has type {ty}, expected {phi.sort}")
        inst = subst(phi.body, Var(phi.var), r.witness)
        if name == "allL":
            _take_left(concl, phi)
            return [[S(ctx, G + (inst,), D)]]
        rest = _take_right(concl, phi)
        if logic == Logic.SINGLE:
            return [[S(ctx, G, (inst,) + rest)]]
        return [[S(ctx, G, (inst,) + D)]]
    if name in ("newR", "newL"):
        _need(isinstance(phi, New), f"{name} principal must be a fresh-name quantification")
        a = r.eigen
        _need(isinstance(a, str) and ctx.position(a) < 0, f"{name} eigen-name must be new to the context")
        inner = ctx.add_fresh(a, phi.sort)
        body = subst(phi.body, NameSym(phi.name), NameSym(a))
        if name == "newL":
            rest = _take_left(concl, phi)
            return [[S(inner, rest + (body,), D)]]
        rest = _take_right(concl, phi)
        return [[S(inner, G, (body,) + rest)]]
    if name == "eqR":
        _need(isinstance(phi, Eq) and phi.left == phi.right, "eqR adds an equation t = t")
        _typed(ctx, phi.left, sig)
        return [[S(ctx, G + (phi,), D)]]
    if name == "eqS":
        eq = r.equation
        _need(isinstance(eq, Eq), "eqS needs an equation")
        _need(is_atom(phi), "eqS principal must be atomic")
        _need(contains(G, eq), "equation not in antecedent")
        _need(contains(G, phi), "principal formula not in antecedent")
        if fkey(eq) == fkey(phi):
            _need(count(G, phi) >= 2, "equation and principal must be distinct occurrences")
        _need(len(r.positions) > 0, "eqS needs at least one position")
        out = phi
        for p in r.positions:
            try:
                found = subterm_at(phi, p)
            except (IndexError, TypeError):
                raise Violation(f"position {p} does not exist") from None
            _need(found == eq.left, f"position {p} does not hold the rewritten term")
            out = replace_at(out, p, eq.right)
        return [[S(ctx, G + (out,), D)]]
    if name == "Ax":
        inst = r.axiom
        _need(isinstance(inst, AxiomInstance), "Ax needs an axiom instance")
        try:
            fresh = instance_from_params(inst.axiom, inst.params, ctx, sig)
        except AxiomError as e:
            raise Violation(str(e)) from None
        _need(fresh == inst, "axiom instance data is inconsistent with its scheme")
        need = mset(inst.premises)
        have = mset(G)
        _need(all(have[k] >= n for k, n in need.items()), "axiom hypotheses not in antecedent")
        return [[S(ctx, G + (q,), D) for q in inst.conclusions]]
    if name == "A2":
        _need(isinstance(phi, Eq) and isinstance(phi.left, Abs) and isinstance(phi.right, Abs),
              "A2 principal must equate two abstractions")
        _need(contains(G, phi), "principal formula not in antecedent")
        a, t = phi.left.name, phi.left.body
        b, u = phi.right.name, phi.right.body
        return [[S(ctx, G + (Eq(a, b), Eq(t, u)), D),
                 S(ctx, G + (Fresh(a, u), Eq(t, Swap(a, b, u))), D)]]
    if name == "A3":
        t = r.witness
        _need(t is not None, "A3 needs a term")
        ty = _typed(ctx, t, sig)
        _need(isinstance(ty, AbsType), f"A3 term must have abstraction type, has {ty}")
        a, x = r.eigen2, r.eigen
        _need(isinstance(a, str) and isinstance(x, str) and a != x, "A3 needs two distinct new variables")
        _need(ctx.position(a) < 0 and ctx.position(x) < 0, "A3 variables must be new to the context")
        inner = ctx.add_var(a, ty.name_type).add_var(x, ty.body)
        return [[S(inner, G + (Eq(t, Abs(Var(a), Var(x))),), D)]]
    if name == "F":
        a = r.eigen
        _need(isinstance(a, str) and ctx.position(a) < 0, "F name must be new to the context")
        _need(isinstance(r.sort, NameType) and sig.well_formed(r.sort), "F needs a declared name type")
        return [[S(ctx.add_fresh(a, r.sort), G, D)]]
    if name == "ctxfresh":
        _need(isinstance(phi, Fresh) and isinstance(phi.name, NameSym), "context freshness adds a # t for a name-symbol a")
        try:
            ok = in_fresh_set(ctx, phi.name, phi.body)
        except TypeError_ as e:
            raise Violation(str(e)) from None
        _need(ok, "freshness formula is not generated by the context")
        return [[S(ctx, G + (phi,), D)]]
    if name == "cut":
        _need(mode.allow_cut, "cut is not allowed in this mode")
        _need(len(prems) == 2, "cut needs two premises")
        p1, p2 = prems
        _need(p1.ctx == ctx and p2.ctx == ctx, "cut premises must share the conclusion context")
        r1 = remove_one(p1.right, phi)
        l2 = remove_one(p2.left, phi)
        _need(r1 is not None, "cut formula missing on the right of the first premise")
        _need(l2 is not None, "cut formula missing on the left of the second premise")
        _need(mset_eq(p1.left + l2, G), "cut antecedents do not combine to the conclusion")
        _need(mset_eq(r1 + p2.right, D), "cut succedents do not combine to the conclusion")
        return [list(prems)]
    raise Violation(f"unknown rule {name}")


def check_rule(mode: Mode, conclusion: Sequent, rule: RuleApp, premises) -> Optional[str]:
    """Validate one inference; returns None when valid, else the first failed condition."""
    premises = list(premises)
    if mode.logic == Logic.SINGLE:
        for s in [conclusion] + premises:
            if len(s.right) != 1:
                return "single-conclusion sequents need exactly one succedent formula"
    try:
        candidates = _expected(mode, conclusion, rule, premises)
    except Violation as v:
        return str(v)
    except (TypeError_, AxiomError) as e:
        return str(e)
    arity = {len(c) for c in candidates}
    if len(premises) not in arity:
        return f"{rule.name} expects {sorted(arity)} premises, got {len(premises)}"
    for cand in candidates:
        if len(cand) == len(premises) and all(c.same(p) for c, p in zip(cand, premises)):
            return None
    return f"premises do not match the {rule.name} schema"


def premises_for(mode: Mode, conclusion: Sequent, rule: RuleApp) -> list:
    """The premise sequents a rule needs, for building derivations bottom-up.

    Where a mode admits more than one premise shape the first is returned.
    Raises Violation when the rule does not apply.
    """
    if rule.name == "cut":
        raise Violation("cut premises cannot be computed from the conclusion")
    try:
        return _expected(mode, conclusion, rule, [])[0]
    except (TypeError_, AxiomError) as e:
        raise Violation(str(e)) from None


def sequent_well_formed(seq: Sequent, sig: Signature, seen: Optional[set] = None) -> Optional[str]:
    """None when seq is well formed; seen, if given, memoizes (ctx, formula) pairs."""
    try:
        for e in seq.ctx.entries:
            if not sig.well_formed(e.sort):
                return f"undeclared type {e.sort} in context"
        for f in seq.left + seq.right:
            if seen is not None:
                if (seq.ctx, f) in seen:
                    continue
                typecheck_formula(seq.ctx, f, sig)
                seen.add((seq.ctx, f))
            else:
                typecheck_formula(seq.ctx, f, sig)
    except TypeError_ as e:
        return f"ill-formed sequent: {e}"
    return None


@dataclass
class Report:
    ok: bool
    height: int
    logical_height: int
    violations: list = field(default_factory=list)


def check_derivation(mode: Mode, d: Derivation) -> Report:
    violations = []
    wf_cache = {}
    typed = set()

    def visit(node: Derivation, path: tuple):
        seq = node.conclusion
        key = id(seq)
        if key not in wf_cache:
            wf_cache[key] = sequent_well_formed(seq, mode.sig, typed)
        if wf_cache[key]:
            violations.append((path, node.rule.name, wf_cache[key]))
        msg = check_rule(mode, seq, node.rule, [p.conclusion for p in node.premises])
        if msg:
            violations.append((path, node.rule.name, msg))
        h, lh = 0, 0
        for i, p in enumerate(node.premises):
            ph, plh = visit(p, path + (i,))
            h, lh = max(h, ph), max(lh, plh)
        return h + 1, lh + (1 if node.rule.name in LOGICAL_RULES else 0)

    h, lh = visit(d, ())
    violations.sort(key=lambda v: v[0])
    return Report(not violations, h, lh, violations)


def is_valid(mode: Mode, d: Derivation) -> bool:
    return check_derivation(mode, d).ok


# ------------------------------------------------------------ measures

def height(d: Derivation) -> int:
    return 1 + max((height(p) for p in d.premises), default=0)


def logical_height(d: Derivation) -> int:
    own = 1 if d.rule.name in LOGICAL_RULES else 0
    return own + max((logical_height(p) for p in d.premises), default=0)


def nodes(d: Derivation) -> Iterator[Derivation]:
    stack = [d]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.premises))


def cut_count(d: Derivation) -> int:
    return sum(1 for n in nodes(d) if n.rule.name == "cut")


def size(d: Derivation) -> int:
    return sum(1 for _ in nodes(d))


def rule_names(d: Derivation) -> set:
    return {n.rule.name for n in nodes(d)}


# ---------------------------------------------------------- builders

def node(conclusion: Sequent, rule: RuleApp, *premises: Derivation) -> Derivation:
    return Derivation(conclusion, rule, tuple(premises))


def ax(conclusion: Sequent, inst: AxiomInstance, *premises: Derivation) -> Derivation:
    return Derivation(conclusion, RuleApp("Ax", axiom=inst), tuple(premises))

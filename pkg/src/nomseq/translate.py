"""Translations between NL (fresh-name quantifier over variables) and the sequent
calculus (fresh-name quantifier over name-symbols), plus machine-built
derivations of the NL axioms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .calculus import (
    CLASSICAL, INTUITIONISTIC, Derivation, Logic, Mode, RuleApp, Sequent,
    Violation, axiom_instances, premises_for, remove_one,
)
from .context import (
    DEFAULT_SIGNATURE, Context, FreshBind, TypeError_, VarBind, typecheck_formula,
    typecheck_term,
)
from .syntax import (
    Abs, AbsType, And, App, Atom, Const, Bot, DataType, Eq, Exists, Forall, Fresh, Imp,
    NameSym, NameType, New, NewVar, Or, Signature, Swap, Top, Var, conj, fresh_id,
    free_ids, iff, neg, subst, swap_formula, 
)
from . import transform as tf


class TranslateError(ValueError):
    pass


# ------------------------------------------------------------ the bijection

@dataclass
class NameVarBijection:
    """A bijection between name-variables and name-symbols.

    With auto set, unmapped identifiers map to the identically spelled
    counterpart (the a <-> ã convention).
    """
    to_name: dict = field(default_factory=dict)
    auto: bool = True

    def __post_init__(self):
        vals = list(self.to_name.values())
        if len(set(vals)) != len(vals):
            raise TranslateError("the name/variable map is not injective")

    def name_for(self, var: str) -> str:
        if var in self.to_name:
            return self.to_name[var]
        if self.auto and var not in self.to_name.values():
            return var
        raise TranslateError(f"name-variable {var} has no name-symbol")

    def var_for(self, name: str) -> str:
        for v, n in self.to_name.items():
            if n == name:
                return v
        if self.auto and name not in self.to_name:
            return name
        raise TranslateError(f"name-symbol {name} is outside the bijection")


def _iota(iota) -> NameVarBijection:
    if iota is None:
        return NameVarBijection()
    if isinstance(iota, dict):
        return NameVarBijection(dict(iota), auto=False)
    return iota


def to_nlseq(phi, iota=None):
    """Replace each variable-binding fresh-name quantifier by one binding a name-symbol."""
    iota = _iota(iota)
    if free_ids(phi)[1] or _has_new(phi):
        raise TranslateError("NL formulas contain no name-symbols")

    def go(f):
        match f:
            case Top() | Bot() | Atom() | Eq() | Fresh():
                return f
            case And(l, r) | Or(l, r) | Imp(l, r):
                return type(f)(go(l), go(r))
            case Forall(v, s, b) | Exists(v, s, b):
                return type(f)(v, s, go(b))
            case NewVar(v, s, b):
                if not isinstance(s, NameType):
                    raise TranslateError(f"fresh-name quantifier over non-name variable {v}")
                n = iota.name_for(v)
                return New(n, s, subst(go(b), Var(v), NameSym(n)))
        raise TranslateError(f"not a formula: {f!r}")

    return go(phi)


def _has_new(phi) -> bool:
    match phi:
        case New():
            return True
        case And(l, r) | Or(l, r) | Imp(l, r):
            return _has_new(l) or _has_new(r)
        case Forall(_, _, b) | Exists(_, _, b) | NewVar(_, _, b):
            return _has_new(b)
    return False


def to_nl(phi, iota=None):
    """Inverse of to_nlseq; free name-symbols become their name-variables."""
    iota = _iota(iota)

    def go(f):
        match f:
            case Top() | Bot() | Atom() | Eq() | Fresh():
                return f
            case And(l, r) | Or(l, r) | Imp(l, r):
                return type(f)(go(l), go(r))
            case Forall(v, s, b) | Exists(v, s, b) | NewVar(v, s, b):
                return type(f)(v, s, go(b))
            case New(n, s, b):
                v = iota.var_for(n)
                if v in free_ids(b)[0]:
                    raise TranslateError(f"name-variable {v} already occurs free")
                return NewVar(v, s, subst(go(b), NameSym(n), Var(v)))
        raise TranslateError(f"not a formula: {f!r}")

    out = go(phi)
    for n in sorted(free_ids(out)[1]):
        v = iota.var_for(n)
        if v in free_ids(out)[0]:
            raise TranslateError(f"name-variable {v} already occurs free")
        out = subst(out, NameSym(n), Var(v))
    return out


def ctx_constraints(ctx: Context, iota=None) -> tuple:
    """The freshness facts of a context with variable or name right-hand sides, as NL constraints."""
    iota = _iota(iota)
    out = []
    for i, e in enumerate(ctx.entries):
        if not isinstance(e, FreshBind):
            continue
        a = Var(iota.var_for(e.name))
        for earlier in ctx.entries[:i]:
            if isinstance(earlier, VarBind):
                out.append(Fresh(a, Var(earlier.var)))
            else:
                out.append(Fresh(a, Var(iota.var_for(earlier.name))))
    return tuple(out)


def ctx_to_nl(ctx: Context, iota=None) -> Context:
    """The NL context: every fresh name binding becomes a variable binding."""
    iota = _iota(iota)
    return Context(tuple(VarBind(iota.var_for(e.name), e.sort) if isinstance(e, FreshBind) else e
                         for e in ctx.entries))


# ------------------------------------------------------------ NL axioms

@dataclass(frozen=True)
class NLAxiom:
    scheme: str          # e.g. "CS1" or "IF3"
    label: str           # scheme plus the types or symbols it was instantiated at
    formula: object      # the NL formula
    data: tuple = ()     # instantiation details used by derive_nl_axiom


@dataclass(frozen=True)
class QuantifierInstance:
    """An instance of the fresh-name quantifier scheme: new a:sort. body, over xs."""
    var: str
    sort: NameType
    body: object
    xs: tuple  # ((name, type), ...) in declaration order


def _all(binds, body):
    for v, ty in reversed(binds):
        body = Forall(v, ty, body)
    return body


def _fresh_all(a, xs):
    return conj(Fresh(a, Var(x)) for x, _ in xs)


def default_types(sig: Signature) -> list:
    """Carrier types used when instantiating type-generic schemes."""
    out = [DataType(d) for d in sorted(sig.data_types)] + [NameType(n) for n in sorted(sig.name_types)]
    if sig.name_types and sig.data_types:
        out.append(AbsType(NameType(sorted(sig.name_types)[0]), DataType(sorted(sig.data_types)[0])))
    return out


def default_quantifier_instances(sig: Signature = DEFAULT_SIGNATURE) -> list:
    """Three instances of the fresh-name quantifier scheme over the rich signature."""
    nu, delta = NameType("nu"), DataType("delta")
    a, b, x, z = Var("a"), Var("b"), Var("x"), Var("z")
    y = Var("y")
    return [
        QuantifierInstance("a", nu, Atom("q", (a, x)), (("x", delta),)),
        QuantifierInstance("a", nu,
                           Forall("y", delta, Or(Atom("q", (a, Swap(a, b, App("f", (x, y))))), Atom("r", (a,)))),
                           (("b", nu), ("x", delta))),
        QuantifierInstance("a", nu,
                           NewVar("b", nu, And(Fresh(a, b), Exists("z", delta, Eq(z, App("g", (a, x)))))),
                           (("x", delta),)),
    ]


def nl_axioms(sig: Signature = DEFAULT_SIGNATURE, which: str = "classical", types=None,
              quantifier_instances=None) -> list:
    """Instances of the NL axioms (classical) or the INL axioms (intuitionistic)."""
    if which not in ("classical", "intuitionistic"):
        raise TranslateError(f"unknown axiom set {which}")
    pre = "C" if which == "classical" else "I"
    types = default_types(sig) if types is None else list(types)
    names = [NameType(n) for n in sorted(sig.name_types)]
    out = []

    def add(scheme, label, formula, data=()):
        ctx = Context()
        try:
            typecheck_formula(ctx, formula, sig)
        except TypeError_ as e:
            raise TranslateError(f"{label} is ill-typed: {e}") from None
        out.append(NLAxiom(pre + scheme, pre + label, formula, tuple(data)))

    a, a1, b, b1, x, x1, y = (Var(n) for n in ("a", "a1", "b", "b1", "x", "x1", "y"))
    ts = lambda t: _show_type(t)
    for nu in names:
        for tau in types:
            add("S1", f"S1[{ts(nu)},{ts(tau)}]",
                _all([("a", nu), ("x", tau)], Eq(Swap(a, a, x), x)))
            add("S2", f"S2[{ts(nu)},{ts(tau)}]",
                _all([("a", nu), ("a1", nu), ("x", tau)], Eq(Swap(a, a1, Swap(a, a1, x)), x)))
        add("S3", f"S3[{ts(nu)}]", _all([("a", nu), ("a1", nu)], Eq(Swap(a, a1, a), a1)))
    for nu in names:
        for nu2 in names:
            for tau in types:
                sw = lambda t: Swap(a, a1, t)
                add("E1", f"E1[{ts(nu)},{ts(nu2)},{ts(tau)}]",
                    _all([("a", nu), ("a1", nu), ("b", nu2), ("b1", nu2), ("x", tau)],
                         Eq(sw(Swap(b, b1, x)), Swap(sw(b), sw(b1), sw(x)))))
                add("E2", f"E2[{ts(nu)},{ts(nu2)},{ts(tau)}]",
                    _all([("a", nu), ("a1", nu), ("b", nu2), ("x", tau)],
                         Imp(Fresh(b, x), Fresh(sw(b), sw(x)))))
    for nu in names:
        sw = lambda t: Swap(a, a1, t)
        for c in sorted(sig.constants):
            add("E3", f"E3[{ts(nu)},{c}]", _all([("a", nu), ("a1", nu)], Eq(sw(Const(c)), Const(c))),
                (("const", c),))
        for f in sorted(sig.functions):
            args, _ = sig.functions[f]
            xs = [(f"x{i + 1}", t) for i, t in enumerate(args)]
            vs = [Var(v) for v, _ in xs]
            add("E3", f"E3[{ts(nu)},{f}]",
                _all([("a", nu), ("a1", nu)] + xs, Eq(sw(App(f, tuple(vs))), App(f, tuple(sw(v) for v in vs)))),
                (("fn", f),))
        for p in sorted(sig.relations):
            args = sig.relations[p]
            xs = [(f"x{i + 1}", t) for i, t in enumerate(args)]
            vs = [Var(v) for v, _ in xs]
            add("E4", f"E4[{ts(nu)},{p}]",
                _all([("a", nu), ("a1", nu)] + xs, Imp(Atom(p, tuple(vs)), Atom(p, tuple(sw(v) for v in vs)))),
                (("rel", p),))
    for nu in names:
        for nu2 in names:
            for tau in types:
                sw = lambda t: Swap(b, b1, t)
                add("E5", f"E5[{ts(nu2)},{ts(nu)},{ts(tau)}]",
                    _all([("b", nu2), ("b1", nu2), ("a", nu), ("x", tau)],
                         Eq(sw(Abs(a, x)), Abs(sw(a), sw(x)))))
    for nu in names:
        for tau in types:
            add("F1", f"F1[{ts(nu)},{ts(tau)}]",
                _all([("a", nu), ("a1", nu), ("x", tau)],
                     Imp(And(Fresh(a, x), Fresh(a1, x)), Eq(Swap(a, a1, x), x))))
    if which == "classical":
        for nu in names:
            add("F2", f"F2[{ts(nu)}]", _all([("a", nu), ("a1", nu)], iff(Fresh(a, a1), neg(Eq(a, a1)))))
        distinct, gen = "F3", "F4"
    else:
        for nu in names:
            add("F2", f"F2[{ts(nu)}]", _all([("a", nu)], neg(Fresh(a, a))))
            add("F3", f"F3[{ts(nu)}]", _all([("a", nu), ("a1", nu)], Or(Fresh(a, a1), Eq(a, a1))))
        distinct, gen = "F4", "F5"
    for nu in names:
        for nu2 in names:
            if nu != nu2:
                add(distinct, f"{distinct}[{ts(nu)},{ts(nu2)}]",
                    _all([("a", nu), ("a1", nu2)], Fresh(a, a1)))
    for nu in names:
        for k in range(3):
            xs = [(f"x{i + 1}", types[i % len(types)]) for i in range(k)]
            add(gen, f"{gen}[{ts(nu)};{','.join(ts(t) for _, t in xs)}]",
                _all(xs, Exists("a", nu, _fresh_all(a, xs))), (("xs", tuple(xs)),))
    qs = default_quantifier_instances(sig) if quantifier_instances is None else quantifier_instances
    for i, q in enumerate(qs):
        add("Q", f"Q[{i + 1}]", quantifier_formula(q), (("q", q),))
    for nu in names:
        for tau in types:
            lhs = Eq(Abs(a, x), Abs(a1, x1))
            rhs = Or(And(Eq(a, a1), Eq(x, x1)), And(Fresh(a1, x), Eq(x1, Swap(a, a1, x))))
            add("A1", f"A1[{ts(nu)},{ts(tau)}]",
                _all([("a", nu), ("a1", nu), ("x", tau), ("x1", tau)], iff(lhs, rhs)))
            add("A2", f"A2[{ts(nu)},{ts(tau)}]",
                Forall("y", AbsType(nu, tau), Exists("a", nu, Exists("x", tau, Eq(y, Abs(a, x))))))
    return out


def _show_type(ty) -> str:
    from .notation import show_type
    return show_type(ty)


def quantifier_formula(q: QuantifierInstance):
    """forall xs. (new a. body) <=> (exists a. a # xs & body); the body's free variables must lie in a, xs."""
    fv = free_ids(q.body)[0] - {q.var}
    missing = fv - {x for x, _ in q.xs}
    if missing:
        raise TranslateError(f"free variables {sorted(missing)} are not among the quantified ones")
    a = Var(q.var)
    return _all(list(q.xs), iff(NewVar(q.var, q.sort, q.body),
                                Exists(q.var, q.sort, And(_fresh_all(a, q.xs), q.body))))


# ------------------------------------------------------ proof building

class _Builder:
    """Bottom-up construction of derivations, one rule at a time."""

    def __init__(self, mode: Mode):
        self.mode = mode

    def by(self, seq: Sequent, rule: RuleApp, *kids: Callable) -> Derivation:
        try:
            prems = premises_for(self.mode, seq, rule)
        except Violation as v:
            raise TranslateError(f"{rule.name} does not apply: {v}") from None
        if len(prems) != len(kids):
            raise TranslateError(f"{rule.name} has {len(prems)} premises, {len(kids)} given")
        return Derivation(seq, rule, tuple(k(p) for k, p in zip(kids, prems)))

    def hyp(self, phi) -> Callable:
        """Close a sequent holding phi on both sides."""
        def close(seq):
            left, right = remove_one(seq.left, phi), remove_one(seq.right, phi)
            if left is None or right is None:
                raise TranslateError("formula missing for hyp*")
            return tf.derive_hyp(seq.ctx, left, phi, right, self.mode)
        return close

    def eigen(self, seq: Sequent, hint: str) -> str:
        used = set(seq.ctx.ids())
        for f in seq.left + seq.right:
            vs, ns = free_ids(f)
            used |= vs | ns
        return hint if hint not in used else fresh_id(hint, used)

    def all_r(self, then: Callable, count: Optional[int] = None) -> Callable:
        """allR on the sole succedent formula, count times (all leading ones by default)."""
        def go(seq, left=count):
            phi = seq.right[0]
            if not isinstance(phi, Forall) or left == 0:
                return then(seq)
            x = self.eigen(seq, phi.var)
            return self.by(seq, RuleApp("allR", principal=phi, eigen=x),
                           lambda s: go(_front(s, subst(phi.body, Var(phi.var), Var(x))),
                                        None if left is None else left - 1))
        return go

    def imp_r(self, then: Callable) -> Callable:
        def go(seq):
            phi = seq.right[0]
            return self.by(seq, RuleApp("impR", principal=phi), lambda s: then(_front(s, phi.right)))
        return go

    def and_r(self, *kids: Callable) -> Callable:
        def go(seq):
            phi = seq.right[0]
            return self.by(seq, RuleApp("andR", principal=phi),
                           lambda s: kids[0](_front(s, phi.left)),
                           lambda s: kids[1](_front(s, phi.right)))
        return go

    def split_left(self, then: Callable) -> Callable:
        """andL on every antecedent conjunction."""
        def go(seq):
            for phi in seq.left:
                if isinstance(phi, And):
                    return self.by(seq, RuleApp("andL", principal=phi), go)
            return then(seq)
        return go

    def fresh_conj(self, name) -> Callable:
        """Prove the sole succedent a # x1 & ... & a # xn from the context."""
        def go(seq):
            phi = seq.right[0]
            if isinstance(phi, Top):
                return self.by(seq, RuleApp("topR", principal=phi))
            if isinstance(phi, And):
                return self.and_r(go, go)(seq)
            if any(_same(phi, f) for f in seq.left):
                return self.hyp(phi)(seq)
            return self.by(seq, RuleApp("ctxfresh", principal=phi), self.hyp(phi))
        return go


def _same(f, g) -> bool:
    from .calculus import fkey
    return fkey(f) == fkey(g)


def _front(seq: Sequent, phi) -> Sequent:
    """Reorder the succedent so that phi comes first."""
    rest = remove_one(seq.right, phi)
    if rest is None:
        return seq
    return Sequent(seq.ctx, seq.left, (phi,) + rest)


def _root(formula) -> Sequent:
    return Sequent(Context(), (), (formula,))


def _mode_for(ax: NLAxiom, mode: Optional[Mode]) -> Mode:
    if mode is not None:
        return mode
    return CLASSICAL if ax.scheme.startswith("C") else INTUITIONISTIC


def derive_nl_axiom(ax: NLAxiom, mode: Optional[Mode] = None) -> Derivation:
    """A derivation of the translated axiom from the empty sequent context."""
    mode = _mode_for(ax, mode)
    B = _Builder(mode)
    phi = to_nlseq(ax.formula)
    kind = ax.scheme[1:]
    data = dict(ax.data)
    seq = _root(phi)
    if kind in ("S1", "S2", "S3", "E1", "E2", "E3", "E4", "E5", "F1") or \
            (ax.scheme == "CF3" or ax.scheme == "IF4"):
        return B.all_r(lambda s: _universal(B, ax, s, data))(seq)
    if ax.scheme == "CF2":
        return B.all_r(lambda s: _cf2(B, s))(seq)
    if ax.scheme == "IF2":
        return B.all_r(B.imp_r(lambda s: _f3_leaf(B, s, s.ctx.variables()[0].var)))(seq)
    if ax.scheme == "IF3":
        return B.all_r(lambda s: _if3(B, s))(seq)
    if ax.scheme in ("CF4", "IF5"):
        return _fresh_exists(B, seq)
    if kind == "Q":
        q = data["q"]
        return B.all_r(B.and_r(lambda s: _q_forward(B, s, q), lambda s: _q_reverse(B, s, q)),
                       len(q.xs))(seq)
    if kind == "A1":
        return B.all_r(B.and_r(lambda s: _a1_forward(B, s), lambda s: _a1_reverse(B, s)))(seq)
    if kind == "A2":
        return _a2(B, seq)
    raise TranslateError(f"no derivation for {ax.scheme}")


def derive_quantifier_direction(q: QuantifierInstance, direction: str, mode: Mode = CLASSICAL) -> Derivation:
    """One implication of a fresh-name quantifier instance: 'forward' or 'reverse'."""
    if direction not in ("forward", "reverse"):
        raise TranslateError(f"unknown direction {direction}")
    B = _Builder(mode)
    full = to_nlseq(quantifier_formula(q))
    body = full
    for _ in q.xs:
        body = body.body
    part = body.left if direction == "forward" else body.right
    step = _q_forward if direction == "forward" else _q_reverse
    return B.all_r(lambda s: step(B, s, q), len(q.xs))(_root(_rebuild_all(full, len(q.xs), part)))


def _rebuild_all(phi, n, inner):
    if n == 0:
        return inner
    return Forall(phi.var, phi.sort, _rebuild_all(phi.body, n - 1, inner))


def _var_terms(seq: Sequent) -> list:
    return [Var(e.var) for e in seq.ctx.variables()]


def _universal(B: _Builder, ax: NLAxiom, seq: Sequent, data: dict) -> Derivation:
    """Axioms of the form forall xs. P => Q closed by a single nonlogical rule."""
    vs = _var_terms(seq)
    kind = ax.scheme[1:]
    if ax.scheme == "IF4":
        kind = "F3"
    if ax.scheme == "CF3":
        kind = "F3"
    if kind == "S1":
        inst = ("S1", {"a": vs[0], "x": vs[1]})
    elif kind == "S2":
        inst = ("S2", {"a": vs[0], "b": vs[1], "x": vs[2]})
    elif kind == "S3":
        inst = ("S3", {"a": vs[0], "b": vs[1]})
    elif kind == "E1":
        inst = ("E2", {"a": vs[0], "b": vs[1], "f": "swap", "args": (vs[2], vs[3], vs[4])})
    elif kind == "E2":
        inst = ("E3", {"a": vs[0], "b": vs[1], "p": "fresh", "args": (vs[2], vs[3])})
    elif kind == "E3" and "const" in data:
        inst = ("E1", {"a": vs[0], "b": vs[1], "c": Const(data["const"])})
    elif kind == "E3":
        inst = ("E2", {"a": vs[0], "b": vs[1], "f": data["fn"], "args": tuple(vs[2:])})
    elif kind == "E4":
        inst = ("E3", {"a": vs[0], "b": vs[1], "p": data["rel"], "args": tuple(vs[2:])})
    elif kind == "E5":
        inst = ("E2", {"a": vs[0], "b": vs[1], "f": "abs", "args": (vs[2], vs[3])})
    elif kind == "F1":
        inst = ("F1", {"a": vs[0], "b": vs[1], "x": vs[2]})
    else:
        inst = ("F2", {"a": vs[0], "b": vs[1]})
    axi = axiom_instances(inst[0], inst[1])
    goal = seq.right[0]

    def close(s):
        q = axi.conclusions[0]
        return B.by(s, RuleApp("Ax", axiom=axi), B.hyp(q))

    if isinstance(goal, Imp):
        return B.imp_r(B.split_left(close))(seq)
    return close(seq)


def _f3_leaf(B: _Builder, seq: Sequent, a: str) -> Derivation:
    inst = axiom_instances("F3", {"a": Var(a)})
    return B.by(seq, RuleApp("Ax", axiom=inst))


def _cf2(B: _Builder, seq: Sequent) -> Derivation:
    a, a1 = _var_terms(seq)[:2]

    def forward(s):
        # a # a1, a = a1 |- bot: rewrite to a1 # a1 and refute
        def inner(s2):
            eq, fr = Eq(a, a1), Fresh(a, a1)
            rw = RuleApp("eqS", principal=fr, equation=eq, positions=((0,),))
            return B.by(s2, rw, lambda s3: _f3_leaf(B, s3, a1.name))
        return B.imp_r(B.imp_r(inner))(s)

    def reverse(s):
        # not (a = a1) |- a # a1 by cases on F4
        def inner(s2):
            f4 = axiom_instances("F4", {"a": a, "b": a1})
            fr, eq = Fresh(a, a1), Eq(a, a1)
            n = neg(eq)

            def eq_case(s3):
                return B.by(s3, RuleApp("impL", principal=n), B.hyp(eq), lambda s4: B.by(s4, RuleApp("botL", principal=Bot())))
            return B.by(s2, RuleApp("Ax", axiom=f4), B.hyp(fr), eq_case)
        return B.imp_r(inner)(s)

    return B.and_r(forward, reverse)(seq)


def _if3(B: _Builder, seq: Sequent) -> Derivation:
    a, a1 = _var_terms(seq)[:2]
    goal = seq.right[0]
    f4 = axiom_instances("F4", {"a": a, "b": a1})

    def branch(atom, which):
        def go(s):
            if B.mode.logic == Logic.SINGLE:
                return B.by(s, RuleApp(which, principal=goal), B.hyp(atom))
            return B.by(s, RuleApp("orR", principal=goal), B.hyp(atom))
        return go

    r1 = "orR1"
    return B.by(seq, RuleApp("Ax", axiom=f4), branch(Fresh(a, a1), r1), branch(Eq(a, a1), "orR2"))


def _fresh_exists(B: _Builder, seq: Sequent) -> Derivation:
    def after_intros(s):
        ex = s.right[0]
        n = B.eigen(s, "a")

        def with_name(s2):
            w = NameSym(n)
            body = subst(ex.body, Var(ex.var), w)
            return B.by(s2, RuleApp("exR", principal=ex, witness=w),
                        lambda s3: B.fresh_conj(w)(_front(s3, body)))
        return B.by(s, RuleApp("F", eigen=n, sort=ex.sort), with_name)
    return B.all_r(after_intros)(seq)


def _q_forward(B: _Builder, seq: Sequent, q: QuantifierInstance) -> Derivation:
    """new a. phi(a) |- exists a. a # xs & phi(a)."""
    def after(s):
        new = s.left[-1]
        ex = s.right[0]
        n = B.eigen(s, q.var)
        w = NameSym(n)
        body_l = subst(new.body, NameSym(new.name), w)
        inst = subst(ex.body, Var(ex.var), w)

        def opened(s2):
            return B.by(s2, RuleApp("exR", principal=ex, witness=w),
                        lambda s3: B.and_r(B.fresh_conj(w), B.hyp(body_l))(_front(s3, inst)))
        return B.by(s, RuleApp("newL", principal=new, eigen=n), opened)

    if isinstance(seq.right[0], Imp):
        return B.imp_r(after)(seq)
    return after(seq)


def _q_reverse(B: _Builder, seq: Sequent, q: QuantifierInstance) -> Derivation:
    """exists a. a # xs & phi(a) |- new a. phi(a), using swapping and EVL."""
    mode = B.mode

    def after(s):
        ex = s.left[-1]
        v = B.eigen(s, q.var)
        opened_body = subst(ex.body, Var(ex.var), Var(v))
        phi_v = opened_body.right

        def opened(s2):
            def split(s3):
                new = s3.right[0]
                m = B.eigen(s3, "b")
                phi_m = subst(new.body, NameSym(new.name), NameSym(m))

                def finish(s4):
                    rest = remove_one(s4.left, phi_v)
                    right_rest = remove_one(s4.right, phi_m)
                    d0 = tf.derive_hyp(s4.ctx, rest, phi_m, right_rest, mode)
                    swapped = swap_formula(Var(v), NameSym(m), phi_v)
                    supply = tf.supply_for(d0, phi_v)
                    d1 = tf._replace(d0, tf.LEFT, phi_m, swapped, Var(v), NameSym(m), mode, supply)
                    return tf._ev(d1, Var(v), NameSym(m), tf.LEFT, phi_v, mode)
                return B.by(s3, RuleApp("newR", principal=new, eigen=m), lambda s4: finish(_front(s4, phi_m)))
            return B.split_left(split)(s2)
        return B.by(s, RuleApp("exL", principal=ex, eigen=v), opened)

    if isinstance(seq.right[0], Imp):
        return B.imp_r(after)(seq)
    return after(seq)


def _swap_back(st, a, a1):
    """(a a1).a1 = a from S3 and S2."""
    e_ab = st.axiom("S3", a=a, b=a1)
    e_twice = st.axiom("S2", a=a, b=a1, x=a)
    return st.rewrite(e_ab, e_twice, [(0, 2)])


def _a1_forward(B: _Builder, seq: Sequent) -> Derivation:
    a, a1, x, x1 = _var_terms(seq)[:4]
    goal_or = seq.right[0].right

    def after(s):
        lhs = s.left[-1]
        left_disj, right_disj = goal_or.left, goal_or.right

        def pick(part, first):
            def go(s2):
                if B.mode.logic == Logic.SINGLE:
                    rule = RuleApp("orR1" if first else "orR2", principal=goal_or)
                    return B.by(s2, rule, lambda s3: part(_front(s3, left_disj if first else right_disj)))
                return B.by(s2, RuleApp("orR", principal=goal_or),
                            lambda s3: part(_front(s3, left_disj if first else right_disj)))
            return go

        def same_branch(s2):
            return pick(B.and_r(B.hyp(Eq(a, a1)), B.hyp(Eq(x, x1))), True)(s2)

        def renamed_branch(s2):
            # from a # x1 and x = (a a1).x1 derive a1 # x and x1 = (a a1).x
            st = tf.Steps(s2)
            e = Eq(x, Swap(a, a1, x1))
            moved = st.axiom("E3", a=a, b=a1, p="fresh", args=(a, x1))
            cur = st.rewrite(st.axiom("S3", a=a, b=a1), moved, [(0,)])
            st.rewrite(st.sym(e), cur, [(1,)])
            r = st.rewrite(e, st.refl(Swap(a, a1, x)), [(1, 2)])
            r = st.rewrite(st.axiom("S2", a=a, b=a1, x=x1), r, [(1,)])
            st.sym(r)
            closed = pick(B.and_r(B.hyp(Fresh(a1, x)), B.hyp(Eq(x1, Swap(a, a1, x)))), False)(st.seq)
            return st.close(closed)

        return B.by(s, RuleApp("A2", principal=lhs), same_branch, renamed_branch)

    return B.imp_r(after)(seq)


def _a1_reverse(B: _Builder, seq: Sequent) -> Derivation:
    a, a1, x, x1 = _var_terms(seq)[:4]
    goal = Eq(Abs(a, x), Abs(a1, x1))

    def after(s):
        disj = s.left[-1]

        def same_branch(s2):
            def inner(s3):
                st = tf.Steps(s3)
                r = st.refl(Abs(a, x))
                r = st.rewrite(Eq(a, a1), r, [(1, 0)])
                st.rewrite(Eq(x, x1), r, [(1, 1)])
                return st.close(B.hyp(goal)(st.seq))
            return B.split_left(inner)(s2)

        def renamed_branch(s2):
            # from a1 # x and x1 = (a a1).x derive a # x1 and x = (a a1).x1, then A1
            def inner(s3):
                st = tf.Steps(s3)
                e = Eq(x1, Swap(a, a1, x))
                moved = st.axiom("E3", a=a, b=a1, p="fresh", args=(a1, x))
                cur = st.rewrite(_swap_back(st, a, a1), moved, [(0,)])
                st.rewrite(st.sym(e), cur, [(1,)])
                r = st.rewrite(e, st.refl(Swap(a, a1, x1)), [(1, 2)])
                r = st.rewrite(st.axiom("S2", a=a, b=a1, x=x), r, [(1,)])
                st.sym(r)
                inst = axiom_instances("A1", {"a": a, "b": a1, "x": x, "y": x1})
                return st.close(B.by(st.seq, RuleApp("Ax", axiom=inst), B.hyp(goal)))
            return B.split_left(inner)(s2)

        return B.by(s, RuleApp("orL", principal=disj), same_branch, renamed_branch)

    return B.imp_r(after)(seq)


def _a2(B: _Builder, seq: Sequent) -> Derivation:
    def after(s):
        y = _var_terms(s)[0]
        ex = s.right[0]
        an, xn = B.eigen(s, "a"), None
        used = set(s.ctx.ids()) | {an}
        xn = "x" if "x" not in used else fresh_id("x", used)
        eq = Eq(y, Abs(Var(an), Var(xn)))

        def opened(s2):
            inner = subst(ex.body, Var(ex.var), Var(an))
            return B.by(s2, RuleApp("exR", principal=ex, witness=Var(an)),
                        lambda s3: _exr_x(_front(s3, inner)))

        def _exr_x(s3):
            ex2 = s3.right[0]
            inst = subst(ex2.body, Var(ex2.var), Var(xn))
            return B.by(s3, RuleApp("exR", principal=ex2, witness=Var(xn)),
                        lambda s4: B.hyp(eq)(_front(s4, inst)))

        return B.by(s, RuleApp("A3", witness=y, eigen=xn, eigen2=an), opened)
    return B.all_r(after)(seq)


# ------------------------------------------------------ freshness lemmas

def fresh_propagation_formula(t, sort: NameType, xs, a: str = "a"):
    """forall a. forall xs. a # x1 & ... & a # xn => a # t."""
    return Forall(a, sort, _all(list(xs), Imp(_fresh_all(Var(a), xs), Fresh(Var(a), t))))


def fresh_quantifier_formula(phi, a: str, sort: NameType, xs):
    """(exists a. a # xs & phi) <=> (forall a. a # xs => phi), closed over xs."""
    av = Var(a)
    return _all(list(xs), iff(Exists(a, sort, And(_fresh_all(av, xs), phi)),
                              Forall(a, sort, Imp(_fresh_all(av, xs), phi))))


def derive_freshness_lemma(arg, sort: NameType, xs, a: str = "a", mode: Mode = CLASSICAL,
                           sig: Signature = DEFAULT_SIGNATURE) -> Derivation:
    """Derivations of the two freshness facts: propagation to a term, and the
    agreement of the existential and universal fresh-name readings of a formula."""
    xs = tuple(xs)
    names = {x for x, _ in xs}
    if a in names:
        raise TranslateError("the name variable must differ from the listed variables")
    B = _Builder(mode)
    if _is_term(arg):
        vs, ns = free_ids(arg)
        if ns:
            raise TranslateError("the term must not mention name-symbols")
        if not vs <= names:
            raise TranslateError(f"variables {sorted(vs - names)} are not listed")
        goal = fresh_propagation_formula(arg, sort, xs, a)
        return B.all_r(B.imp_r(B.split_left(lambda s: _propagate(B, s, arg, Var(a)))))(_root(goal))
    vs, ns = free_ids(arg)
    if ns:
        raise TranslateError("the formula must not mention name-symbols")
    if not vs <= names | {a}:
        raise TranslateError(f"variables {sorted(vs - names - {a})} are not listed")
    goal = fresh_quantifier_formula(arg, a, sort, xs)
    return B.all_r(B.and_r(lambda s: _fq_forward(B, s), lambda s: _fq_reverse(B, s)), len(xs))(_root(goal))


def _is_term(x) -> bool:
    return isinstance(x, (Var, NameSym, Const, App, Swap, Abs))


def _propagate(B: _Builder, seq: Sequent, t, a) -> Derivation:
    goal = Fresh(a, t)
    if any(_same(goal, f) for f in seq.left):
        return B.hyp(goal)(seq)
    sort = typecheck_term(seq.ctx, a, B.mode.sig)
    n = B.eigen(seq, "b")
    bn = NameSym(n)

    def with_name(s):
        st = tf.Steps(s)
        st.ctx_fresh(bn, t)
        moved = st.axiom("E3", a=bn, b=a, p="fresh", args=(bn, t))
        s3 = st.axiom("S3", a=bn, b=a)
        cur = st.rewrite(s3, moved, [(0,)])
        norm = tf.SwapNormalizer(st, bn, a)
        nf, e = norm.norm(Swap(bn, a, t))
        if nf != t:
            raise TranslateError("the swapping does not fix the term")
        if e is not None:
            st.rewrite(e, cur, [(1,)])
        return st.close(B.hyp(goal)(st.seq))

    return B.by(seq, RuleApp("F", eigen=n, sort=sort), with_name)


def _fq_forward(B: _Builder, seq: Sequent) -> Derivation:
    """exists a. a # xs & phi(a) |- forall a. a # xs => phi(a)."""
    mode = B.mode

    def after(s):
        ex = s.left[-1]
        v = B.eigen(s, ex.var)
        phi_v = subst(ex.body, Var(ex.var), Var(v)).right

        def opened(s2):
            def intro(s3):
                al = s3.right[0]
                w = B.eigen(s3, ex.var)
                imp = subst(al.body, Var(al.var), Var(w))
                phi_w = imp.right

                def finish(s5):
                    rest = remove_one(s5.left, phi_v)
                    d0 = tf.derive_hyp(s5.ctx, rest, phi_w, remove_one(s5.right, phi_w), mode)
                    swapped = swap_formula(Var(v), Var(w), phi_v)
                    supply = tf.supply_for(d0, phi_v)
                    d1 = tf._replace(d0, tf.LEFT, phi_w, swapped, Var(v), Var(w), mode, supply)
                    return tf._ev(d1, Var(v), Var(w), tf.LEFT, phi_v, mode)

                return B.by(s3, RuleApp("allR", principal=al, eigen=w),
                            lambda s4: B.imp_r(B.split_left(lambda s5: finish(_front(s5, phi_w))))(_front(s4, imp)))
            return B.split_left(intro)(s2)
        return B.by(s, RuleApp("exL", principal=ex, eigen=v), opened)

    return B.imp_r(after)(seq)


def _fq_reverse(B: _Builder, seq: Sequent) -> Derivation:
    """forall a. a # xs => phi(a) |- exists a. a # xs & phi(a)."""
    def after(s):
        al = s.left[-1]
        ex = s.right[0]
        n = B.eigen(s, al.var)
        w = NameSym(n)
        imp = subst(al.body, Var(al.var), w)
        inst = subst(ex.body, Var(ex.var), w)

        def named(s2):
            def inst_l(s3):
                def use(s4):
                    return B.by(s4, RuleApp("exR", principal=ex, witness=w),
                                lambda s5: B.and_r(B.fresh_conj(w), B.hyp(imp.right))(_front(s5, inst)))
                return B.by(s3, RuleApp("impL", principal=imp),
                            lambda s4: B.fresh_conj(w)(_front(s4, imp.left)), use)
            return B.by(s2, RuleApp("allL", principal=al, witness=w), inst_l)
        return B.by(s, RuleApp("F", eigen=n, sort=al.sort), named)

    return B.imp_r(after)(seq)

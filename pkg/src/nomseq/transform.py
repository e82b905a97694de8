"""Executable structural metatheory: every lemma is a derivation-to-derivation map.

All functions take checked derivations and return new ones; nothing is
mutated.  Fresh identifiers come from a NameSupply seeded with every id
already present, so results are deterministic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .calculus import (
    CLASSICAL, Derivation, Logic, Mode, RuleApp, Sequent, check_rule,
    axiom_instances, contains, count, fkey, height, instance_from_params,
    mset, nodes, remove_one, replace_at,
)
from .context import (
    Context, FreshBind, TypeError_, VarBind, ctx_leq, entry_id, in_fresh_set,
    typecheck_formula, typecheck_term,
)
from .syntax import (
    And, App, Bot, Const, Eq, Exists, Forall, Fresh, Imp, NameSym,
    New, NameSupply, Or, Swap, Top, Var, all_ids, atom_parts,
    formula_size, free_ids, is_atom, rebuild_term, subst, substitute,
    swap_formula, term_children, 
)


class TransformError(ValueError):
    """Raised when a transformation's precondition does not hold."""


LEFT, RIGHT = "left", "right"

RIGHT_RULES = {"topR", "andR", "orR", "orR1", "orR2", "impR", "allR", "exR", "newR"}
LEFT_RULES = {"botL", "andL", "orL", "impL", "allL", "exL", "newL"}
EIGEN_RULES = {"allR", "exL", "newL", "newR", "F", "A3"}


def _side(side: str) -> str:
    s = side.lower()
    if s in ("left", "l"):
        return LEFT
    if s in ("right", "r"):
        return RIGHT
    raise TransformError(f"unknown side {side!r}")


# ------------------------------------------------------------- helpers

def formulas_on(seq: Sequent, side: str) -> tuple:
    return seq.left if side == LEFT else seq.right


def swap_out(seq: Sequent, side: str, old, new=(), ctx: Optional[Context] = None) -> Sequent:
    """Remove one occurrence of old from a side and add the new formulas."""
    rest = remove_one(formulas_on(seq, side), old)
    if rest is None:
        raise TransformError("formula not present in the sequent")
    ctx = seq.ctx if ctx is None else ctx
    if side == LEFT:
        return Sequent(ctx, rest + tuple(new), seq.right)
    return Sequent(ctx, seq.left, tuple(new) + rest)


def add_to(seq: Sequent, lefts=(), rights=(), ctx: Optional[Context] = None) -> Sequent:
    ctx = seq.ctx if ctx is None else ctx
    return Sequent(ctx, seq.left + tuple(lefts), tuple(rights) + seq.right)


def principal_side(rule: RuleApp) -> Optional[str]:
    if rule.name in RIGHT_RULES:
        return RIGHT
    if rule.name in LEFT_RULES:
        return LEFT
    return None


def is_principal(d: Derivation, side: str, phi) -> bool:
    """Does d's last rule act on (a copy of) phi on the given side as a logical principal?"""
    r = d.rule
    if r.principal is None or principal_side(r) != side:
        return False
    return fkey(r.principal) == fkey(phi)


def carries(mode: Mode, d: Derivation, i: int) -> tuple:
    """Whether premise i inherits the conclusion's left / right side formulas."""
    r = d.rule
    name = r.name
    concl = d.conclusion
    prem = d.premises[i].conclusion
    if name == "cut":
        # side formulas are threaded through the first premise only
        return (True, True) if i == 0 else (False, False)
    if name in RIGHT_RULES:
        if mode.logic == Logic.SINGLE:
            return True, False
        if name in ("impR", "allR"):
            if mode.logic != Logic.CLASSICAL:
                return True, False
            return True, len(prem.right) == len(concl.right)
        return True, True
    if name == "impL" and i == 0:
        kept = count(prem.left, r.principal) == count(concl.left, r.principal)
        if mode.logic != Logic.CLASSICAL or kept:
            return True, False
        return True, True
    return True, True


def _cut_free(d: Derivation, what: str) -> None:
    if any(n.rule.name == "cut" for n in nodes(d)):
        raise TransformError(f"{what} expects a cut-free derivation")


def eigen_ids(rule: RuleApp) -> list:
    if rule.name not in EIGEN_RULES:
        return []
    out = [rule.eigen]
    if rule.name == "A3":
        out.append(rule.eigen2)
    return out


def rule_ids(rule: RuleApp) -> set:
    out = set()
    for f in (rule.principal, rule.witness, rule.equation):
        if f is not None:
            out |= all_ids(f)
    for e in (rule.eigen, rule.eigen2):
        if e:
            out.add(e)
    if rule.axiom is not None:
        for _, v in rule.axiom.params:
            if isinstance(v, tuple):
                for t in v:
                    out |= all_ids(t)
            elif not isinstance(v, str):
                out |= all_ids(v)
    return out


def sequent_ids(seq: Sequent) -> set:
    out = set(seq.ctx.ids())
    for f in seq.left + seq.right:
        out |= all_ids(f)
    return out


def derivation_ids(d: Derivation) -> set:
    out = set()
    for n in nodes(d):
        out |= sequent_ids(n.conclusion)
        out |= rule_ids(n.rule)
    return out


def supply_for(*things) -> NameSupply:
    used = set()
    for t in things:
        if isinstance(t, Derivation):
            used |= derivation_ids(t)
        elif isinstance(t, Sequent):
            used |= sequent_ids(t)
        elif isinstance(t, Context):
            used |= set(t.ids())
        elif isinstance(t, (set, frozenset, list, tuple)):
            for x in t:
                if isinstance(x, str):
                    used.add(x)
                else:
                    used |= all_ids(x)
        elif t is not None:
            used |= all_ids(t)
    return NameSupply(used)


def _map_rule(rule: RuleApp, fn: Callable, ren: dict) -> RuleApp:
    """Apply a term/formula map to the instantiation data of a rule."""
    changes = {}
    for f in ("principal", "witness", "equation"):
        v = getattr(rule, f)
        if v is not None:
            changes[f] = fn(v)
    for f in ("eigen", "eigen2"):
        v = getattr(rule, f)
        if v is not None and v in ren:
            changes[f] = ren[v]
    if rule.axiom is not None:
        params = []
        for k, v in rule.axiom.params:
            if isinstance(v, tuple):
                params.append((k, tuple(fn(t) for t in v)))
            elif isinstance(v, str):
                params.append((k, v))
            else:
                params.append((k, fn(v)))
        changes["axiom"] = instance_from_params(rule.axiom.axiom, params)
    return replace(rule, **changes)


def _ren_mapping(ren: dict) -> dict:
    m = {}
    for k, v in ren.items():
        m[Var(k)] = Var(v)
        m[NameSym(k)] = NameSym(v)
    return m


def _ren_ctx(ctx: Context, ren: dict) -> Context:
    out = []
    for e in ctx.entries:
        if isinstance(e, VarBind):
            out.append(VarBind(ren.get(e.var, e.var), e.sort))
        else:
            out.append(FreshBind(ren.get(e.name, e.name), e.sort))
    return Context(tuple(out))


def _ren_seq(seq: Sequent, ren: dict, m: dict) -> Sequent:
    if not ren:
        return seq
    return Sequent(_ren_ctx(seq.ctx, ren),
                   tuple(substitute(f, m) for f in seq.left),
                   tuple(substitute(f, m) for f in seq.right))


def fresh_for(supply: NameSupply, hint: str, *ders: Derivation) -> str:
    """A fresh id that is also unused in the given derivations."""
    for d in ders:
        supply.reserve(derivation_ids(d))
    return supply.fresh(hint)


def rename_apart(d: Derivation, avoid, supply: Optional[NameSupply] = None) -> Derivation:
    """Rename every eigen-identifier of d that lies in avoid."""
    avoid = set(avoid)
    if not any(e in avoid for n in nodes(d) for e in eigen_ids(n.rule)):
        return d
    supply = supply or supply_for(d, avoid)
    supply.reserve(avoid)

    def go(n: Derivation, ren: dict) -> Derivation:
        m = _ren_mapping(ren)
        concl = _ren_seq(n.conclusion, ren, m)
        rule = _map_rule(n.rule, lambda x: substitute(x, m), ren) if ren else n.rule
        inner = ren
        for field_name in ("eigen", "eigen2"):
            e = getattr(n.rule, field_name)
            if e is not None and n.rule.name in EIGEN_RULES and (field_name == "eigen" or n.rule.name == "A3"):
                if e in avoid:
                    new = supply.fresh(e)
                    inner = {**inner, e: new}
                    rule = replace(rule, **{field_name: new})
        return Derivation(concl, rule, tuple(go(p, inner) for p in n.premises))

    return go(d, {})


def rename_ids(d: Derivation, ren: dict) -> Derivation:
    """Rename identifiers everywhere in d (contexts, formulas, rule data)."""
    ren = {k: v for k, v in ren.items() if k != v}
    if not ren:
        return d
    d = rename_apart(d, set(ren.values()))
    m = _ren_mapping(ren)

    def go(n: Derivation) -> Derivation:
        concl = _ren_seq(n.conclusion, ren, m)
        rule = _map_rule(n.rule, lambda x: substitute(x, m), ren)
        return Derivation(concl, rule, tuple(go(p) for p in n.premises))

    return go(d)


# ------------------------------------------------------------ weakening

def _weaken_many(d: Derivation, lefts: tuple, rights: tuple, mode: Mode) -> Derivation:
    if not lefts and not rights:
        return d
    if rights and mode.logic == Logic.SINGLE:
        raise TransformError("cannot weaken the succedent in single-conclusion mode")
    concl = add_to(d.conclusion, lefts, rights)
    prems = []
    for i, p in enumerate(d.premises):
        cl, cr = carries(mode, d, i)
        prems.append(_weaken_many(p, lefts if cl else (), rights if cr else (), mode))
    return Derivation(concl, d.rule, tuple(prems))


def weaken(d: Derivation, phi, side: str = LEFT, mode: Mode = CLASSICAL) -> Derivation:
    """Add phi to one side of the conclusion, threading it through the derivation."""
    side = _side(side)
    try:
        typecheck_formula(d.conclusion.ctx, phi, mode.sig)
    except TypeError_ as e:
        raise TransformError(f"cannot weaken by an ill-formed formula: {e}") from None
    if side == LEFT:
        return _weaken_many(d, (phi,), (), mode)
    return _weaken_many(d, (), (phi,), mode)


def weaken_all(d: Derivation, lefts=(), rights=(), mode: Mode = CLASSICAL) -> Derivation:
    return _weaken_many(d, tuple(lefts), tuple(rights), mode)


def weaken_ctx(d: Derivation, new_ctx: Context, mode: Mode = CLASSICAL) -> Derivation:
    """Move d to a stronger context: same sequents, more typing and freshness facts."""
    root = d.conclusion.ctx
    if not ctx_leq(root, new_ctx):
        raise TransformError("target context is not stronger than the derivation's context")
    if new_ctx == root:
        return d
    d = rename_apart(d, new_ctx.dom() - root.dom())
    n_root = len(root.entries)

    def go(n: Derivation) -> Derivation:
        ctx = n.conclusion.ctx
        suffix = ctx.entries[n_root:]
        seq = Sequent(Context(new_ctx.entries + suffix), n.conclusion.left, n.conclusion.right)
        return Derivation(seq, n.rule, tuple(go(p) for p in n.premises))

    return go(d)


# --------------------------------------------------------- substitution

def subst_derivation(d: Derivation, x, t, mode: Mode = CLASSICAL) -> Derivation:
    """Substitute t for the context variable x throughout d."""
    xname = x.name if isinstance(x, Var) else x
    root = d.conclusion.ctx
    pos = root.position(xname)
    if pos < 0 or not isinstance(root.entries[pos], VarBind):
        raise TransformError(f"{xname} is not a variable of the root context")
    prefix = Context(root.entries[:pos])
    try:
        ty = typecheck_term(prefix, t, mode.sig)
    except TypeError_ as e:
        raise TransformError(f"substituted term ill-typed: {e}") from None
    if ty != root.entries[pos].sort:
        raise TransformError(f"substituted term has type {ty}, expected {root.entries[pos].sort}")
    vs, ns = free_ids(t)
    d = rename_apart(d, vs | ns)
    m = {Var(xname): t}

    def fn(e):
        return substitute(e, m)

    def go(n: Derivation) -> Derivation:
        ctx = n.conclusion.ctx
        entries = ctx.entries[:pos] + ctx.entries[pos + 1:]
        seq = Sequent(Context(entries), tuple(fn(f) for f in n.conclusion.left),
                      tuple(fn(f) for f in n.conclusion.right))
        return Derivation(seq, _map_rule(n.rule, fn, {}), tuple(go(p) for p in n.premises))

    return go(d)


# ------------------------------------------------ equational bookkeeping

@dataclass
class Steps:
    """A stack of single-continuation nonlogical steps that only add antecedent formulas."""
    seq: Sequent
    frames: list = field(default_factory=list)
    added: list = field(default_factory=list)

    def push(self, rule: RuleApp, new, closed_before=(), closed_after=()):
        concl = self.seq
        self.seq = add_to(concl, (new,))
        self.frames.append((concl, rule, tuple(closed_before), tuple(closed_after)))
        self.added.append(new)
        return new

    def close(self, top: Derivation) -> Derivation:
        d = top
        for concl, rule, before, after in reversed(self.frames):
            d = Derivation(concl, rule, before + (d,) + after)
        return d

    # primitive steps
    def has(self, phi) -> bool:
        return contains(self.seq.left, phi)

    def refl(self, t):
        return self.push(RuleApp("eqR", principal=Eq(t, t)), Eq(t, t))

    def axiom(self, name: str, **params):
        inst = axiom_instances(name, params)
        if len(inst.conclusions) != 1:
            raise TransformError(f"{name} is not a single-conclusion axiom")
        return self.push(RuleApp("Ax", axiom=inst), inst.conclusions[0])

    def ctx_fresh(self, a, t):
        phi = Fresh(a, t)
        return self.push(RuleApp("ctxfresh", principal=phi), phi)

    def rewrite(self, eq, atom, positions):
        out = atom
        for p in positions:
            out = replace_at(out, p, eq.right)
        return self.push(RuleApp("eqS", principal=atom, equation=eq, positions=tuple(positions)), out)

    def sym(self, eq):
        if eq.left == eq.right:
            return eq
        r = self.refl(eq.left)
        return self.rewrite(eq, r, [(0,)])

    def trans(self, e1, e2):
        """From t = u and u = v derive t = v."""
        if e1 is None:
            return e2
        if e2 is None:
            return e1
        if e1.right != e2.left:
            raise TransformError("transitivity on mismatched equations")
        if e2.left == e2.right:
            return e1
        if fkey(e1) == fkey(e2):
            # t = t = t: nothing to do
            return e1
        return self.rewrite(e2, e1, [(1,)])

    def cong(self, t, child_eqs):
        """From equations between children of t derive t = t'."""
        if all(e is None for e in child_eqs):
            return None
        cur = self.refl(t)
        for i, e in enumerate(child_eqs):
            if e is None or e.left == e.right:
                continue
            cur = self.rewrite(e, cur, [(1, i)])
        return cur

    def fresh_fact(self, a, v) -> bool:
        """Make a # v available in the antecedent, if the context justifies it.

        a may be a name-symbol or a variable of name type.
        """
        phi = Fresh(a, v)
        if self.has(phi):
            return True
        ctx = self.seq.ctx
        try:
            ta = typecheck_term(ctx, a)
        except TypeError_:
            return False
        if isinstance(a, NameSym) and in_fresh_set(ctx, a, v):
            self.ctx_fresh(a, v)
            return True
        if not isinstance(v, NameSym) or ctx.name_type(v.name) is None:
            return False
        if ctx.name_type(v.name) == ta and in_fresh_set(ctx, v, a):
            # a # v from v # a: the case a = v is refuted by F3
            eq_branch = add_to(self.seq, (Eq(a, v),))
            st = Steps(eq_branch)
            vfa = st.ctx_fresh(v, a)
            st.rewrite(Eq(a, v), vfa, [(1,)])
            leaf = Derivation(st.seq, RuleApp("Ax", axiom=axiom_instances("F3", {"a": v})))
            closed = st.close(leaf)
            inst = axiom_instances("F4", {"a": a, "b": v})
            self.push(RuleApp("Ax", axiom=inst), phi, (), (closed,))
            return True
        if ctx.name_type(v.name) != ta:
            inst = axiom_instances("F2", {"a": a, "b": v})
            self.push(RuleApp("Ax", axiom=inst), phi)
            return True
        return False


class SwapNormalizer:
    """Pushes the swapping (a b) to the leaves, recording each step as a rule."""

    def __init__(self, st: Steps, a: NameSym, b: NameSym):
        self.st, self.a, self.b = st, a, b

    def is_pair(self, t) -> bool:
        return isinstance(t, Swap) and t.left == self.a and t.right == self.b

    def norm(self, s):
        """Return (nf, eq) with eq : s = nf in the antecedent, or None if nf is s."""
        st = self.st
        if self.is_pair(s):
            u1, e1 = self.norm(s.body)
            e0 = st.cong(s, [None, None, e1]) if e1 is not None else None
            v, e2 = self.push(u1)
            return v, st.trans(e0, e2)
        kids = term_children(s)
        if not kids:
            return s, None
        res = [self.norm(k) for k in kids]
        nf = rebuild_term(s, [r[0] for r in res])
        return nf, st.cong(s, [r[1] for r in res])

    def push(self, u):
        """u is normal; return (nf, eq) for (a b).u."""
        st, a, b = self.st, self.a, self.b
        t = Swap(a, b, u)
        if u == a:
            return b, st.axiom("S3", a=a, b=b)
        if u == b:
            e_ab = st.axiom("S3", a=a, b=b)
            e_twice = st.axiom("S2", a=a, b=b, x=a)
            return a, st.rewrite(e_ab, e_twice, [(0, 2)])
        if isinstance(u, Const):
            return u, st.axiom("E1", a=a, b=b, c=u)
        if isinstance(u, (Var, NameSym)):
            if st.fresh_fact(a, u) and st.fresh_fact(b, u):
                return u, st.axiom("F1", a=a, b=b, x=u)
            return t, None
        if self.is_pair(u):
            return u.body, st.axiom("S2", a=a, b=b, x=u.body)
        if isinstance(u, App):
            f, args = u.fn, u.args
        elif isinstance(u, Swap):
            f, args = "swap", term_children(u)
        else:
            f, args = "abs", term_children(u)
        e = st.axiom("E2", a=a, b=b, f=f, args=tuple(args))
        pushed = e.right
        res = [self.push(k) for k in args]
        nf = rebuild_term(pushed, [r[0] for r in res])
        return nf, st.trans(e, st.cong(pushed, [r[1] for r in res]))


def _relate_atom(st: Steps, a: NameSym, b: NameSym, src, dst):
    """With src in the antecedent, add dst; their arguments must agree after pushing (a b) down."""
    pred, sargs = atom_parts(src)
    pred2, dargs = atom_parts(dst)
    if pred != pred2 or len(sargs) != len(dargs):
        raise TransformError("atoms with different predicates cannot be related")
    norm = SwapNormalizer(st, a, b)
    cur = src
    for i, (s, u) in enumerate(zip(sargs, dargs)):
        if s == u:
            continue
        n1, e1 = norm.norm(s)
        n2, e2 = norm.norm(u)
        if n1 != n2:
            raise TransformError("arguments are not equal modulo the swapping")
        back = st.sym(e2) if e2 is not None else None
        e = st.trans(e1, back)
        if e is None or e.left == e.right:
            continue
        cur = st.rewrite(e, cur, [(i,)])
    return cur


# ---------------------------------------------------------- EVL / EVR

def ev_transform(d: Derivation, a, b, side: str, phi, mode: Mode = CLASSICAL) -> Derivation:
    """From a derivation with (a b).phi on a side, derive the sequent with phi instead."""
    side = _side(side)
    _cut_free(d, "ev_transform")
    target = swap_formula(a, b, phi)
    if not contains(formulas_on(d.conclusion, side), target):
        raise TransformError("the swapped formula is not present")
    return _ev(d, a, b, side, phi, mode)


def _ev(d: Derivation, a, b, side: str, phi, mode: Mode) -> Derivation:
    target = swap_formula(a, b, phi)
    if fkey(target) == fkey(phi):
        return d
    concl = swap_out(d.conclusion, side, target, (phi,))
    if is_atom(phi):
        if side == LEFT:
            pred, args = atom_parts(phi)
            inst = axiom_instances("E3", {"a": a, "b": b, "p": pred, "args": args})
            return Derivation(concl, RuleApp("Ax", axiom=inst), (weaken_all(d, (phi,), (), mode),))
        return _ev_atom_right(d, a, b, phi, mode)
    if is_principal(d, side, target):
        return _ev_principal(d, a, b, side, phi, concl, mode)
    prems = []
    for i, p in enumerate(d.premises):
        cl, cr = carries(mode, d, i)
        if (cl if side == LEFT else cr):
            prems.append(_ev(p, a, b, side, phi, mode))
        else:
            prems.append(p)
    return Derivation(concl, d.rule, tuple(prems))


def _ev_atom_right(d: Derivation, a, b, phi, mode: Mode) -> Derivation:
    target = swap_formula(a, b, phi)
    concl = swap_out(d.conclusion, RIGHT, target, (phi,))
    if d.rule.name == "hyp" and fkey(d.rule.principal) == fkey(target):
        pred, args = atom_parts(target)
        st = Steps(concl)
        inst = axiom_instances("E3", {"a": a, "b": b, "p": pred, "args": args})
        cur = st.push(RuleApp("Ax", axiom=inst), inst.conclusions[0])
        for i, t in enumerate(atom_parts(phi)[1]):
            e = st.axiom("S2", a=a, b=b, x=t)
            cur = st.rewrite(e, cur, [(i,)])
        return st.close(Derivation(st.seq, RuleApp("hyp", principal=phi)))
    prems = []
    for i, p in enumerate(d.premises):
        if carries(mode, d, i)[1]:
            prems.append(_ev_atom_right(p, a, b, phi, mode))
        else:
            prems.append(p)
    return Derivation(concl, d.rule, tuple(prems))


def _ev_principal(d, a, b, side, phi, concl, mode) -> Derivation:
    r = d.rule
    p = d.premises
    name = r.name
    new_rule = replace(r, principal=phi)
    ev = lambda der, s, f: _ev(der, a, b, s, f, mode)
    if name in ("andL", "andR", "orR"):
        if name == "andR":
            prems = (ev(p[0], RIGHT, phi.left), ev(p[1], RIGHT, phi.right))
        elif name == "andL":
            prems = (ev(ev(p[0], LEFT, phi.left), LEFT, phi.right),)
        else:
            prems = (ev(ev(p[0], RIGHT, phi.left), RIGHT, phi.right),)
    elif name in ("orR1", "orR2"):
        prems = (ev(p[0], RIGHT, phi.left if name == "orR1" else phi.right),)
    elif name == "orL":
        prems = (ev(p[0], LEFT, phi.left), ev(p[1], LEFT, phi.right))
    elif name == "impR":
        prems = (ev(ev(p[0], LEFT, phi.left), RIGHT, phi.right),)
    elif name == "impL":
        p0 = p[0]
        if carries(mode, d, 0)[1] is False and count(p0.conclusion.left, r.principal) == count(d.conclusion.left, r.principal):
            p0 = ev(p0, LEFT, phi)
        prems = (ev(p0, RIGHT, phi.left), ev(p[1], LEFT, phi.right))
    elif name in ("allL", "exR"):
        inst = subst(phi.body, Var(phi.var), r.witness)
        s = LEFT if name == "allL" else RIGHT
        p0 = p[0]
        if name == "allL" or mode.logic != Logic.SINGLE:
            p0 = ev(p0, s, phi)
        prems = (ev(p0, s, inst),)
    elif name in ("allR", "exL"):
        body = subst(phi.body, Var(phi.var), Var(r.eigen))
        prems = (ev(p[0], RIGHT if name == "allR" else LEFT, body),)
    elif name in ("newL", "newR"):
        body = subst(phi.body, NameSym(phi.name), NameSym(r.eigen))
        prems = (ev(p[0], LEFT if name == "newL" else RIGHT, body),)
    else:
        raise TransformError(f"unexpected principal rule {name}")
    return Derivation(concl, new_rule, prems)


# ---------------------------------------------------- swapping fresh names

def _swap_witness(a, b, t):
    return Swap(a, b, t)


def _replace(d: Derivation, side: str, old, new, a: NameSym, b: NameSym, mode: Mode,
             supply: NameSupply) -> Derivation:
    """Replace old by new on a side, where their atoms agree once (a b) is pushed down."""
    if fkey(old) == fkey(new):
        return d
    if type(old) is not type(new) and not (is_atom(old) and is_atom(new)):
        raise TransformError("formulas with different shapes cannot be related")
    concl = swap_out(d.conclusion, side, old, (new,))
    if is_atom(old):
        if side == LEFT:
            st = Steps(concl)
            _relate_atom(st, a, b, new, old)
            return st.close(weaken_all(d, [new] + st.added[:-1], (), mode))
        if d.rule.name == "hyp" and fkey(d.rule.principal) == fkey(old):
            st = Steps(concl)
            _relate_atom(st, a, b, old, new)
            return st.close(Derivation(st.seq, RuleApp("hyp", principal=new)))
    elif is_principal(d, side, old):
        return _replace_principal(d, side, old, new, a, b, concl, mode, supply)
    prems = []
    for i, p in enumerate(d.premises):
        cl, cr = carries(mode, d, i)
        if (cl if side == LEFT else cr):
            prems.append(_replace(p, side, old, new, a, b, mode, supply))
        else:
            prems.append(p)
    return Derivation(concl, d.rule, tuple(prems))


def _replace_principal(d, side, old, new, a, b, concl, mode, supply) -> Derivation:
    r, p, name = d.rule, d.premises, d.rule.name
    rep = lambda der, s, o, n: _replace(der, s, o, n, a, b, mode, supply)
    o = r.principal
    rule = replace(r, principal=new)
    if name == "andL":
        prems = (rep(rep(p[0], LEFT, o.left, new.left), LEFT, o.right, new.right),)
    elif name == "andR":
        prems = (rep(p[0], RIGHT, o.left, new.left), rep(p[1], RIGHT, o.right, new.right))
    elif name == "orR":
        prems = (rep(rep(p[0], RIGHT, o.left, new.left), RIGHT, o.right, new.right),)
    elif name in ("orR1", "orR2"):
        k = "left" if name == "orR1" else "right"
        prems = (rep(p[0], RIGHT, getattr(o, k), getattr(new, k)),)
    elif name == "orL":
        prems = (rep(p[0], LEFT, o.left, new.left), rep(p[1], LEFT, o.right, new.right))
    elif name == "impR":
        prems = (rep(rep(p[0], LEFT, o.left, new.left), RIGHT, o.right, new.right),)
    elif name == "impL":
        p0 = p[0]
        if count(p0.conclusion.left, o) == count(d.conclusion.left, o):
            p0 = rep(p0, LEFT, o, new)
        prems = (rep(p0, RIGHT, o.left, new.left), rep(p[1], LEFT, o.right, new.right))
    elif name in ("allL", "exR"):
        s = LEFT if name == "allL" else RIGHT
        t2 = _swap_witness(a, b, r.witness)
        o_inst = subst(o.body, Var(o.var), r.witness)
        n_inst = subst(new.body, Var(new.var), t2)
        p0 = p[0]
        if name == "allL" or mode.logic != Logic.SINGLE:
            p0 = rep(p0, s, o, new)
        prems = (rep(p0, s, o_inst, n_inst),)
        rule = replace(rule, witness=t2)
    elif name in ("allR", "exL"):
        s = RIGHT if name == "allR" else LEFT
        z = r.eigen
        z2 = fresh_for(supply, z, p[0])
        pctx = p[0].conclusion.ctx
        zpos = pctx.position(z)
        widened = Context(pctx.entries[:zpos] + (VarBind(z2, o.sort),) + pctx.entries[zpos:])
        p0 = weaken_ctx(p[0], widened, mode)
        p0 = subst_derivation(p0, z, Swap(a, b, Var(z2)), mode)
        o_inst = subst(o.body, Var(o.var), Swap(a, b, Var(z2)))
        n_inst = subst(new.body, Var(new.var), Var(z2))
        prems = (rep(p0, s, o_inst, n_inst),)
        rule = replace(rule, eigen=z2)
    elif name in ("newL", "newR"):
        s = LEFT if name == "newL" else RIGHT
        e = NameSym(r.eigen)
        prems = (rep(p[0], s, subst(o.body, NameSym(o.name), e), subst(new.body, NameSym(new.name), e)),)
    else:
        raise TransformError(f"unexpected principal rule {name}")
    return Derivation(concl, rule, prems)


def swap_fresh_names(d: Derivation, a, b, phi, side: str = LEFT, mode: Mode = CLASSICAL) -> Derivation:
    """Turn phi(b) into phi(a) when a and b are both fresh names with a declared first.

    phi is given as phi(a); the derivation must contain phi[b/a] on the side.
    """
    side = _side(side)
    _cut_free(d, "swap_fresh_names")
    a = a if isinstance(a, NameSym) else NameSym(a)
    b = b if isinstance(b, NameSym) else NameSym(b)
    if a == b:
        return d
    ctx = d.conclusion.ctx
    pa, pb = ctx.position(a.name), ctx.position(b.name)
    if pa < 0 or pb < 0 or not isinstance(ctx.entries[pa], FreshBind) or not isinstance(ctx.entries[pb], FreshBind):
        raise TransformError("both names must be fresh-bound in the context")
    if pa > pb:
        raise TransformError("the first name must be declared before the second")
    if ctx.entries[pa].sort != ctx.entries[pb].sort:
        raise TransformError("the two names have different types")
    if b.name in free_ids(phi)[1]:
        raise TransformError("phi(a) must not mention the second name")
    old = subst(phi, a, b)
    if not contains(formulas_on(d.conclusion, side), old):
        if fkey(old) == fkey(phi):
            return weaken_all(d, (phi,) if side == LEFT else (), (phi,) if side == RIGHT else (), mode)
        raise TransformError("phi(b) is not present in the sequent")
    new = swap_formula(a, b, phi)
    supply = supply_for(d, phi)
    d1 = _replace(d, side, old, new, a, b, mode, supply)
    return _ev(d1, a, b, side, phi, mode)


# ---------------------------------------------------------------- hyp*

def derive_hyp(ctx: Context, gamma, phi, delta, mode: Mode = CLASSICAL) -> Derivation:
    """Build a derivation of ctx ; gamma, phi |- phi, delta."""
    gamma, delta = tuple(gamma), tuple(delta)
    for f in gamma + (phi,) + delta:
        try:
            typecheck_formula(ctx, f, mode.sig)
        except TypeError_ as e:
            raise TransformError(f"ill-formed input: {e}") from None
    if mode.logic == Logic.SINGLE and delta:
        raise TransformError("single-conclusion sequents have one succedent formula")
    supply = supply_for(ctx, list(gamma) + [phi] + list(delta))
    return _hyp(ctx, gamma, phi, delta, mode, supply)


def _hyp(ctx, gamma, phi, delta, mode, supply) -> Derivation:
    seq = Sequent(ctx, gamma + (phi,), (phi,) + delta)
    single = mode.logic == Logic.SINGLE
    classical = mode.logic == Logic.CLASSICAL
    if is_atom(phi):
        return Derivation(seq, RuleApp("hyp", principal=phi))
    if isinstance(phi, Top):
        return Derivation(seq, RuleApp("topR", principal=phi))
    if isinstance(phi, Bot):
        return Derivation(seq, RuleApp("botL", principal=phi))
    if isinstance(phi, And):
        l, r = phi.left, phi.right
        s1 = Sequent(ctx, gamma + (l, r), (phi,) + delta)
        d0 = _hyp(ctx, gamma + (r,), l, delta, mode, supply)
        d1 = _hyp(ctx, gamma + (l,), r, delta, mode, supply)
        inner = Derivation(s1, RuleApp("andR", principal=phi), (d0, d1))
        return Derivation(seq, RuleApp("andL", principal=phi), (inner,))
    if isinstance(phi, Or):
        l, r = phi.left, phi.right
        if single:
            a0 = _hyp(ctx, gamma, l, (), mode, supply)
            a1 = _hyp(ctx, gamma, r, (), mode, supply)
            b0 = Derivation(Sequent(ctx, gamma + (l,), (phi,)), RuleApp("orR1", principal=phi), (a0,))
            b1 = Derivation(Sequent(ctx, gamma + (r,), (phi,)), RuleApp("orR2", principal=phi), (a1,))
            return Derivation(seq, RuleApp("orL", principal=phi), (b0, b1))
        d0 = _hyp(ctx, gamma, l, (r,) + delta, mode, supply)
        d1 = _hyp(ctx, gamma, r, (l,) + delta, mode, supply)
        inner = Derivation(Sequent(ctx, gamma + (phi,), (l, r) + delta), RuleApp("orL", principal=phi), (d0, d1))
        return Derivation(seq, RuleApp("orR", principal=phi), (inner,))
    if isinstance(phi, Imp):
        l, r = phi.left, phi.right
        if classical:
            body = delta
            d0 = _hyp(ctx, gamma, l, (r,) + delta, mode, supply)
            d1 = _hyp(ctx, gamma + (l,), r, delta, mode, supply)
        else:
            body = ()
            d0 = _hyp(ctx, gamma + (phi,), l, (), mode, supply)
            d1 = _hyp(ctx, gamma + (l,), r, (), mode, supply)
        inner = Derivation(Sequent(ctx, gamma + (phi, l), (r,) + body), RuleApp("impL", principal=phi), (d0, d1))
        return Derivation(seq, RuleApp("impR", principal=phi), (inner,))
    if isinstance(phi, (Forall, Exists)):
        z = supply.fresh(phi.var)
        ictx = ctx.add_var(z, phi.sort)
        inst = subst(phi.body, Var(phi.var), Var(z))
        if isinstance(phi, Forall):
            rest = delta if classical else ()
            top = _hyp(ictx, gamma + (phi,), inst, rest, mode, supply)
            mid = Derivation(Sequent(ictx, gamma + (phi,), (inst,) + rest),
                             RuleApp("allL", principal=phi, witness=Var(z)), (top,))
            return Derivation(seq, RuleApp("allR", principal=phi, eigen=z), (mid,))
        rest = () if single else (phi,) + delta
        top = _hyp(ictx, gamma, inst, rest, mode, supply)
        mid = Derivation(Sequent(ictx, gamma + (inst,), (phi,) + delta),
                         RuleApp("exR", principal=phi, witness=Var(z)), (top,))
        return Derivation(seq, RuleApp("exL", principal=phi, eigen=z), (mid,))
    if isinstance(phi, New):
        an = supply.fresh(phi.name)
        bn = supply.fresh(phi.name)
        ctx_a = ctx.add_fresh(an, phi.sort)
        ctx_ab = ctx_a.add_fresh(bn, phi.sort)
        pa = subst(phi.body, NameSym(phi.name), NameSym(an))
        pb = subst(phi.body, NameSym(phi.name), NameSym(bn))
        top = _hyp(ctx_ab, gamma, pb, delta, mode, supply)
        swapped = swap_fresh_names(top, NameSym(an), NameSym(bn), pa, LEFT, mode)
        mid = Derivation(Sequent(ctx_a, gamma + (pa,), (phi,) + delta),
                         RuleApp("newR", principal=phi, eigen=bn), (swapped,))
        return Derivation(seq, RuleApp("newL", principal=phi, eigen=an), (mid,))
    raise TransformError(f"cannot build hyp* for {phi!r}")


# ------------------------------------------------------------ inversion

INVERTIBLE = {
    "andL": LEFT, "orL": LEFT, "impL": LEFT, "impL_left": LEFT, "exL": LEFT, "newL": LEFT,
    "allR": RIGHT, "newR": RIGHT, "andR": RIGHT, "orR": RIGHT, "impR": RIGHT,
}


def _components(kind: str, chi, ext_id: Optional[str]) -> list:
    if kind == "andL":
        return [((chi.left, chi.right), ())]
    if kind == "orL":
        return [((chi.left,), ()), ((chi.right,), ())]
    if kind == "impL":
        return [((chi.right,), ())]
    if kind == "impL_left":
        return [((), (chi.left,))]
    if kind == "andR":
        return [((), (chi.left,)), ((), (chi.right,))]
    if kind == "orR":
        return [((), (chi.left, chi.right))]
    if kind == "impR":
        return [((chi.left,), (chi.right,))]
    if kind in ("exL", "allR"):
        inst = subst(chi.body, Var(chi.var), Var(ext_id))
        return [((inst,), ())] if kind == "exL" else [((), (inst,))]
    if kind in ("newL", "newR"):
        inst = subst(chi.body, NameSym(chi.name), NameSym(ext_id))
        return [((inst,), ())] if kind == "newL" else [((), (inst,))]
    raise TransformError(f"rule {kind} is not invertible here")


_SHAPE = {"andL": And, "orL": Or, "impL": Imp, "impL_left": Imp, "exL": Exists, "newL": New,
          "allR": Forall, "newR": New, "andR": And, "orR": Or, "impR": Imp}


def invert(d: Derivation, rule_id: str, principal, fresh: Optional[str] = None,
           mode: Mode = CLASSICAL):
    """Height-preserving inversion of a rule on the given principal formula.

    Returns one derivation, or a pair for orL and andR.  For exL, allR, newL
    and newR the new identifier is `fresh` (generated when omitted).
    """
    if rule_id not in INVERTIBLE:
        raise TransformError(f"rule {rule_id} is not invertible")
    side = INVERTIBLE[rule_id]
    _cut_free(d, "invert")
    if not isinstance(principal, _SHAPE[rule_id]):
        raise TransformError(f"{rule_id} cannot act on this formula")
    if not contains(formulas_on(d.conclusion, side), principal):
        raise TransformError("principal formula is not present")
    if rule_id == "impL_left" and mode.logic != Logic.CLASSICAL:
        raise TransformError("the left part of implication inversion is classical")
    if rule_id == "impR" and mode.logic != Logic.CLASSICAL:
        raise TransformError("implication-right inversion is classical")
    supply = supply_for(d, principal)
    ext = None
    if rule_id in ("exL", "allR", "newL", "newR"):
        if fresh is None:
            fresh = supply.fresh(principal.var if rule_id in ("exL", "allR") else principal.name)
        if d.conclusion.ctx.position(fresh) >= 0:
            raise TransformError(f"{fresh} is already in the context")
        supply.reserve([fresh])
        ext = (VarBind(fresh, principal.sort) if rule_id in ("exL", "allR")
               else FreshBind(fresh, principal.sort))
        d = rename_apart(d, {fresh})
    res = _inv(d, side, principal, rule_id, ext, mode, supply)
    return res[0] if len(res) == 1 else tuple(res)


def _inv(d, side, chi, kind, ext, mode, supply) -> list:
    ext_id = entry_id(ext) if ext is not None else None
    comps = _components(kind, chi, ext_id)
    k = len(comps)
    base_ctx = d.conclusion.ctx
    new_ctx = base_ctx.extend([ext]) if ext is not None else base_ctx
    r = d.rule
    base_kind = "impL" if kind == "impL_left" else kind
    if r.name == base_kind and is_principal(d, side, chi):
        return _inv_principal(d, side, chi, kind, ext, comps, new_ctx, mode, supply)
    per_premise = []
    for i, p in enumerate(d.premises):
        cl, cr = carries(mode, d, i)
        pctx = p.conclusion.ctx
        extra = pctx.entries[len(base_ctx.entries):]
        carried = cl if side == LEFT else cr
        if not carried:
            adj = p
            if ext is not None:
                adj = weaken_ctx(p, Context(new_ctx.entries + extra), mode)
            per_premise.append([adj] * k)
            continue
        if ext is None or not extra:
            per_premise.append(_inv(p, side, chi, kind, ext, mode, supply))
            continue
        if isinstance(ext, VarBind):
            sub = _inv(p, side, chi, kind, ext, mode, supply)
            target = Context(new_ctx.entries + extra)
            per_premise.append([weaken_ctx(s, target, mode) for s in sub])
            continue
        # a fresh name cannot move below later bindings: invert with a new
        # name, then swap it for the intended one and discard it with F
        other = fresh_for(supply, ext.name, p)
        sub = _inv(p, side, chi, kind, FreshBind(other, ext.sort), mode, supply)
        target = Context(new_ctx.entries + extra + (FreshBind(other, ext.sort),))
        outs = []
        for s in sub:
            s = weaken_ctx(s, target, mode)
            comp_side = LEFT if kind == "newL" else RIGHT
            comp_a = _components(kind, chi, ext.name)[0][0 if kind == "newL" else 1][0]
            s = swap_fresh_names(s, NameSym(ext.name), NameSym(other), comp_a, comp_side, mode)
            fseq = Sequent(Context(new_ctx.entries + extra), s.conclusion.left, s.conclusion.right)
            outs.append(Derivation(fseq, RuleApp("F", eigen=other, sort=ext.sort), (s,)))
        per_premise.append(outs)
    out = []
    for j in range(k):
        lefts, rights = comps[j]
        concl = swap_out(d.conclusion, side, chi, lefts if side == LEFT else rights, ctx=new_ctx)
        if side == LEFT and rights:
            concl = add_to(concl, (), rights)
        if side == RIGHT and lefts:
            concl = add_to(concl, lefts, ())
        out.append(Derivation(concl, r, tuple(pp[j] for pp in per_premise)))
    return out


def _inv_principal(d, side, chi, kind, ext, comps, new_ctx, mode, supply) -> list:
    r, p = d.rule, d.premises
    concl = d.conclusion
    if kind in ("andL", "orL", "andR", "orR"):
        return list(p)
    if kind == "impL":
        return [p[1]]
    if kind == "impL_left":
        p0 = p[0]
        kept = count(p0.conclusion.left, r.principal) == count(concl.left, r.principal)
        if not kept:
            return [p0]
        # p0 : G, chi |- phi1 ; invert the kept copy, then merge the two phi1
        inner = _inv(p0, LEFT, chi, "impL_left", None, mode, supply)[0]
        merged = contract(inner, chi.left, RIGHT, mode)
        return [weaken_all(merged, (), concl.right, mode)]
    if kind == "impR":
        p0 = p[0]
        rest = remove_one(concl.right, r.principal)
        if carries(mode, d, 0)[1]:
            return [p0]
        return [weaken_all(p0, (), rest, mode)]
    # eigen cases
    z = r.eigen
    renamed = rename_ids(p[0], {z: entry_id(ext)})
    if kind == "allR" and not carries(mode, d, 0)[1]:
        rest = remove_one(concl.right, r.principal)
        renamed = weaken_all(renamed, (), rest, mode)
    return [renamed]


# ----------------------------------------------------------- contraction

def contract(d: Derivation, phi, side: str = LEFT, mode: Mode = CLASSICAL) -> Derivation:
    """Remove one of two copies of phi on a side, preserving logical height."""
    side = _side(side)
    _cut_free(d, "contract")
    if count(formulas_on(d.conclusion, side), phi) < 2:
        raise TransformError("contraction needs two copies of the formula")
    supply = supply_for(d, phi)
    return _contract(d, side, phi, mode, supply)


def _contract(d, side, phi, mode, supply) -> Derivation:
    concl = swap_out(d.conclusion, side, phi, ())
    r = d.rule
    if not is_atom(phi) and is_principal(d, side, phi):
        return _contract_principal(d, side, phi, concl, mode, supply)
    if not d.premises:
        return Derivation(concl, r, ())
    if side == LEFT and is_atom(phi):
        fixed = _contract_nonlogical(d, phi, concl, mode, supply)
        if fixed is not None:
            return fixed
    prems = []
    for i, p in enumerate(d.premises):
        cl, cr = carries(mode, d, i)
        carried = cl if side == LEFT else cr
        if carried and count(formulas_on(p.conclusion, side), phi) >= 2:
            prems.append(_contract(p, side, phi, mode, supply))
        else:
            prems.append(p)
    return Derivation(concl, r, tuple(prems))


def _contract_nonlogical(d, phi, concl, mode, supply) -> Optional[Derivation]:
    """Nonlogical steps that consume both copies of the contracted atom."""
    r = d.rule
    have = count(d.conclusion.left, phi)
    if r.name == "Ax" and r.axiom.axiom == "F1":
        need = count(r.axiom.premises, phi)
        if need == 2 and have == 2:
            a, x = r.axiom.param("a"), r.axiom.param("x")
            inst = axiom_instances("S1", {"a": a, "x": x})
            prem = _contract(d.premises[0], LEFT, phi, mode, supply)
            return Derivation(concl, RuleApp("Ax", axiom=inst), (prem,))
    if r.name == "eqS" and have == 2 and fkey(r.equation) == fkey(phi) and fkey(r.principal) == fkey(phi):
        # the equation rewrites a second copy of itself; rebuild from one copy
        eq = phi
        u = eq.right
        prem = _contract(d.premises[0], LEFT, phi, mode, supply)
        inner_paths = [p[1:] for p in r.positions if p[0] == 1]
        st = Steps(concl)
        w = st.refl(u)
        if inner_paths:
            w = st.rewrite(eq, w, [(1,) + q for q in inner_paths])
        if (0,) not in r.positions:
            st.rewrite(w, eq, [(1,)])
        target = st.seq
        top = weaken_all(prem, [f for f in st.added[:-1]], (), mode)
        # the last added formula is the one the old premise introduced
        if not top.conclusion.same(target):
            raise TransformError("equation contraction did not line up")
        return st.close(top)
    return None


def _contract_principal(d, side, phi, concl, mode, supply) -> Derivation:
    r, p, name = d.rule, d.premises, d.rule.name
    c = lambda der, s, f: _contract(der, s, f, mode, supply)
    if name in ("topR", "botL"):
        return Derivation(concl, r, ())
    if name == "andL":
        x = invert(p[0], "andL", phi, mode=mode)
        x = c(c(x, LEFT, phi.left), LEFT, phi.right)
        return Derivation(concl, r, (x,))
    if name == "orL":
        a0, _ = invert(p[0], "orL", phi, mode=mode)
        _, b1 = invert(p[1], "orL", phi, mode=mode)
        return Derivation(concl, r, (c(a0, LEFT, phi.left), c(b1, LEFT, phi.right)))
    if name == "impL":
        p0 = p[0]
        if count(p0.conclusion.left, phi) == count(d.conclusion.left, phi):
            q0 = c(p0, LEFT, phi)
        else:
            q0 = c(invert(p0, "impL_left", phi, mode=mode), RIGHT, phi.left)
        q1 = c(invert(p[1], "impL", phi, mode=mode), LEFT, phi.right)
        return Derivation(concl, r, (q0, q1))
    if name in ("allL", "exR"):
        s = LEFT if name == "allL" else RIGHT
        return Derivation(concl, r, (c(p[0], s, phi),))
    if name in ("exL", "allR"):
        s = LEFT if name == "exL" else RIGHT
        if name == "allR" and not carries(mode, d, 0)[1]:
            return Derivation(concl, r, p)
        z = r.eigen
        y = fresh_for(supply, phi.var, p[0])
        x = invert(p[0], name, phi, fresh=y, mode=mode)
        x = subst_derivation(x, y, Var(z), mode)
        inst = subst(phi.body, Var(phi.var), Var(z))
        return Derivation(concl, r, (c(x, s, inst),))
    if name in ("newL", "newR"):
        s = LEFT if name == "newL" else RIGHT
        an = r.eigen
        bn = fresh_for(supply, phi.name, p[0])
        x = invert(p[0], name, phi, fresh=bn, mode=mode)
        body_a = subst(phi.body, NameSym(phi.name), NameSym(an))
        x = swap_fresh_names(x, NameSym(an), NameSym(bn), body_a, s, mode)
        x = c(x, s, body_a)
        pctx = p[0].conclusion.ctx
        fnode = Derivation(Sequent(pctx, x.conclusion.left, x.conclusion.right),
                           RuleApp("F", eigen=bn, sort=phi.sort), (x,))
        return Derivation(concl, r, (fnode,))
    if name == "andR":
        a0, _ = invert(p[0], "andR", phi, mode=mode)
        _, b1 = invert(p[1], "andR", phi, mode=mode)
        return Derivation(concl, r, (c(a0, RIGHT, phi.left), c(b1, RIGHT, phi.right)))
    if name == "orR":
        x = invert(p[0], "orR", phi, mode=mode)
        return Derivation(concl, r, (c(c(x, RIGHT, phi.left), RIGHT, phi.right),))
    if name == "impR":
        if not carries(mode, d, 0)[1]:
            return Derivation(concl, r, p)
        x = invert(p[0], "impR", phi, mode=mode)
        return Derivation(concl, r, (c(c(x, LEFT, phi.left), RIGHT, phi.right),))
    if name in ("orR1", "orR2"):
        return Derivation(concl, r, p)
    raise TransformError(f"unexpected principal rule {name}")


def fit(d: Derivation, target: Sequent, mode: Mode = CLASSICAL) -> Derivation:
    """Weaken and contract d until its conclusion is the target sequent."""
    if d.conclusion.ctx != target.ctx:
        raise TransformError("fit cannot change the context")
    for side in (LEFT, RIGHT):
        have = mset(formulas_on(d.conclusion, side))
        want = mset(formulas_on(target, side))
        for f in formulas_on(d.conclusion, side):
            k = fkey(f)
            while have[k] > want[k]:
                if have[k] < 2:
                    raise TransformError("fit would need to drop a formula")
                d = contract(d, f, side, mode)
                have[k] -= 1
        missing = []
        for f in formulas_on(target, side):
            k = fkey(f)
            if have[k] < want[k]:
                missing.append(f)
                have[k] += 1
        if missing:
            d = weaken_all(d, missing if side == LEFT else (), missing if side == RIGHT else (), mode)
    return Derivation(target, d.rule, d.premises)


# ------------------------------------------------------------------ cut

@dataclass
class CutStats:
    calls: int = 0
    max_depth: int = 0
    measures_ok: bool = True
    cases: Counter = field(default_factory=Counter)


def _measure(phi, d1, d2) -> tuple:
    return (formula_size(phi), height(d1) + height(d2))


def cut_admissible(d1: Derivation, d2: Derivation, phi, mode: Mode = CLASSICAL,
                   stats: Optional[CutStats] = None) -> Derivation:
    """Merge cut-free derivations of G |- D, phi and G', phi |- D' into G, G' |- D, D'."""
    if mode.logic != Logic.CLASSICAL:
        raise TransformError("cut elimination is implemented for the classical calculus")
    if d1.conclusion.ctx != d2.conclusion.ctx:
        raise TransformError("cut premises must share a context")
    if not contains(d1.conclusion.right, phi) or not contains(d2.conclusion.left, phi):
        raise TransformError("cut formula missing from a premise")
    stats = stats if stats is not None else CutStats()
    supply = supply_for(d1, d2, phi)
    mode = replace(mode, allow_cut=False)
    return _cut(d1, d2, phi, mode, supply, stats, None, 0)


def _target(d1, d2, phi) -> Sequent:
    s1, s2 = d1.conclusion, d2.conclusion
    return Sequent(s1.ctx, s1.left + remove_one(s2.left, phi), remove_one(s1.right, phi) + s2.right)


def _cut(d1, d2, phi, mode, supply, stats, parent, depth) -> Derivation:
    m = _measure(phi, d1, d2)
    if parent is not None and not m < parent:
        stats.measures_ok = False
        raise AssertionError(f"cut measure did not decrease: {m} after {parent}")
    stats.calls += 1
    stats.max_depth = max(stats.max_depth, depth)
    rec = lambda a, b, f: _cut(a, b, f, mode, supply, stats, m, depth + 1)
    target = _target(d1, d2, phi)
    s1, s2 = d1.conclusion, d2.conclusion
    G, D = s1.left, remove_one(s1.right, phi)
    G2, D2 = remove_one(s2.left, phi), s2.right

    # base cases
    if d1.rule.name == "hyp" and fkey(d1.rule.principal) == fkey(phi):
        stats.cases["base"] += 1
        return fit(weaken_all(d2, remove_one(G, phi), D, mode), target, mode)
    if d2.rule.name == "hyp" and fkey(d2.rule.principal) == fkey(phi):
        stats.cases["base"] += 1
        return fit(weaken_all(d1, G2, remove_one(D2, phi), mode), target, mode)
    # a leaf not acting on the cut formula is still a leaf of the merged sequent
    for leaf in (d1, d2):
        if not leaf.premises and check_rule(mode, target, leaf.rule, []) is None:
            stats.cases["base"] += 1
            return Derivation(target, leaf.rule, ())

    # left-commuting: phi is not principal in d1
    if not is_principal(d1, RIGHT, phi):
        stats.cases["left:" + d1.rule.name] += 1
        return _commute_left(d1, d2, phi, target, mode, supply, rec)
    # right-commuting: phi is not principal in d2
    if not is_principal(d2, LEFT, phi):
        stats.cases["right:" + d2.rule.name] += 1
        return _commute_right(d1, d2, phi, target, mode, supply, rec)
    stats.cases["principal:" + type(phi).__name__] += 1
    return _cut_principal(d1, d2, phi, target, mode, supply, rec)


def _commute_left(d1, d2, phi, target, mode, supply, rec) -> Derivation:
    s2 = d2.conclusion
    G2, D2 = remove_one(s2.left, phi), s2.right
    d2 = rename_apart(d2, {e for n in nodes(d1) for e in eigen_ids(n.rule)}, supply)
    prems = []
    for i, p in enumerate(d1.premises):
        cl, cr = carries(mode, d1, i)
        pctx = p.conclusion.ctx
        if cr and contains(p.conclusion.right, phi):
            q = d2 if pctx == d2.conclusion.ctx else weaken_ctx(d2, pctx, mode)
            prems.append(rec(p, q, phi))
        else:
            prems.append(weaken_all(p, G2 if cl else (), D2 if cr else (), mode))
    return Derivation(target, d1.rule, tuple(prems))


def _commute_right(d1, d2, phi, target, mode, supply, rec) -> Derivation:
    s1 = d1.conclusion
    G, D = s1.left, remove_one(s1.right, phi)
    d1 = rename_apart(d1, {e for n in nodes(d2) for e in eigen_ids(n.rule)}, supply)
    prems = []
    for i, p in enumerate(d2.premises):
        cl, cr = carries(mode, d2, i)
        pctx = p.conclusion.ctx
        if cl and contains(p.conclusion.left, phi):
            q = d1 if pctx == d1.conclusion.ctx else weaken_ctx(d1, pctx, mode)
            prems.append(rec(q, p, phi))
        else:
            prems.append(weaken_all(p, G if cl else (), D if cr else (), mode))
    return Derivation(target, d2.rule, tuple(prems))


def _cut_principal(d1, d2, phi, target, mode, supply, rec) -> Derivation:
    r1, r2 = d1.rule, d2.rule
    p1, p2 = d1.premises, d2.premises
    phi1 = r1.principal
    ctx = d1.conclusion.ctx
    if isinstance(phi, And):
        x = rec(p1[1], p2[0], phi1.right)
        y = rec(p1[0], x, phi1.left)
        return fit(y, target, mode)
    if isinstance(phi, Or):
        x = rec(p1[0], p2[0], phi1.left)
        y = rec(x, p2[1], phi1.right)
        return fit(y, target, mode)
    if isinstance(phi, Imp):
        q0 = p2[0]
        if count(q0.conclusion.left, r2.principal) == count(d2.conclusion.left, r2.principal):
            q0 = rec(d1, q0, phi)
        x = rec(p1[0], p2[1], phi1.right)
        y = rec(q0, x, phi1.left)
        return fit(y, target, mode)
    if isinstance(phi, Forall):
        x = rec(d1, p2[0], phi)
        inst1 = subst_derivation(p1[0], r1.eigen, r2.witness, mode)
        inst = subst(r2.principal.body, Var(r2.principal.var), r2.witness)
        y = rec(inst1, x, inst)
        return fit(y, target, mode)
    if isinstance(phi, Exists):
        x = rec(p1[0], d2, phi)
        inst2 = subst_derivation(p2[0], r2.eigen, r1.witness, mode)
        inst = subst(r1.principal.body, Var(r1.principal.var), r1.witness)
        y = rec(x, inst2, inst)
        return fit(y, target, mode)
    if isinstance(phi, New):
        cn = fresh_for(supply, phi.name, p1[0], p2[0])
        e1 = rename_ids(p1[0], {r1.eigen: cn})
        e2 = rename_ids(p2[0], {r2.eigen: cn})
        body = subst(r1.principal.body, NameSym(r1.principal.name), NameSym(cn))
        x = rec(e1, e2, body)
        inner = Sequent(ctx.add_fresh(cn, phi.sort), target.left, target.right)
        x = fit(x, inner, mode)
        return Derivation(target, RuleApp("F", eigen=cn, sort=phi.sort), (x,))
    raise TransformError(f"no principal cut case for {phi!r}")


def eliminate_cuts(d: Derivation, mode: Mode = CLASSICAL, trace: Optional[list] = None,
                   stats: Optional[CutStats] = None) -> Derivation:
    """Replace uppermost cuts one by one until none remain."""
    stats = stats if stats is not None else CutStats()

    def go(n: Derivation) -> Derivation:
        prems = tuple(go(p) for p in n.premises)
        if n.rule.name != "cut":
            if prems == n.premises:
                return n
            return Derivation(n.conclusion, n.rule, prems)
        a, b = prems
        phi = n.rule.principal
        if trace is not None:
            trace.append((formula_size(phi), height(a), height(b)))
        out = cut_admissible(a, b, phi, mode, stats)
        return Derivation(n.conclusion, out.rule, out.premises)

    return go(d)

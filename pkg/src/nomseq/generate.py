"""Random checked derivations, built forwards from leaves.

Every step applies a rule to derivations already built, using weakening to
line up side formulas, so the output is valid by construction.  Callers
still recheck it; the generator is test machinery, not part of the kernel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .calculus import (
    Derivation, Logic, Mode, RuleApp, Sequent, axiom_instances,
    check_derivation, remove_one,
)
from .context import Context, FreshBind, VarBind, in_fresh_set
from .syntax import (
    Abs, AbsType, And, App, Atom, Bot, Const, DataType, Eq, Exists, Forall,
    Fresh, Imp, NameSupply, NameSym, NameType, New, Or, Swap, Top, Var,
    free_ids, is_constraint, make_atom, atom_parts, substitute, test_signature,
)
from .transform import derive_hyp, weaken_all, weaken_ctx

TEST_MODE = Mode(Logic.CLASSICAL, sig=test_signature())


@dataclass
class GenConfig:
    depth: int = 6
    max_side: int = 7
    term_depth: int = 2
    leaf_bias: float = 0.25
    allow_cut: bool = False


class Generator:
    def __init__(self, rng: random.Random, mode: Mode = TEST_MODE, config: Optional[GenConfig] = None):
        self.rng = rng
        self.mode = mode
        self.sig = mode.sig
        self.cfg = config or GenConfig()
        self.single = mode.logic == Logic.SINGLE
        self.classical = mode.logic == Logic.CLASSICAL

    # ------------------------------------------------------ terms
    def fresh(self, ctx: Context, hint: str) -> str:
        return NameSupply(ctx.ids()).fresh(hint)

    def terms_of(self, ctx: Context, ty):
        out = []
        for e in ctx.entries:
            if isinstance(e, VarBind) and e.sort == ty:
                out.append(Var(e.var))
            if isinstance(e, FreshBind) and e.sort == ty:
                out.append(NameSym(e.name))
        return out

    def name_terms(self, ctx: Context):
        by_type = {}
        for nt in sorted(self.sig.name_types):
            ts = self.terms_of(ctx, NameType(nt))
            if ts:
                by_type[NameType(nt)] = ts
        return by_type

    def term(self, ctx: Context, ty, depth: Optional[int] = None):
        rng = self.rng
        depth = self.cfg.term_depth if depth is None else depth
        names = self.name_terms(ctx)
        if isinstance(ty, AbsType):
            a = self.term(ctx, ty.name_type, 0)
            if a is None:
                return None
            body = self.term(ctx, ty.body, max(depth - 1, 0))
            return None if body is None else Abs(a, body)
        options = list(self.terms_of(ctx, ty))
        if isinstance(ty, DataType):
            options += [Const(c) for c, t in self.sig.constants.items() if t == ty]
        if depth > 0 and rng.random() < 0.5:
            choices = []
            for f, (args, res) in self.sig.functions.items():
                if res == ty:
                    choices.append(("app", f, args))
            swaps = [nt for nt, ts in names.items() if ts]
            if swaps:
                choices.append(("swap", rng.choice(swaps), None))
            if choices:
                kind, f, args = rng.choice(choices)
                if kind == "app":
                    kids = [self.term(ctx, a, depth - 1) for a in args]
                    if all(k is not None for k in kids):
                        return App(f, tuple(kids))
                else:
                    ts = names[f]
                    body = self.term(ctx, ty, depth - 1)
                    if body is not None:
                        return Swap(rng.choice(ts), rng.choice(ts), body)
        if not options:
            return None
        return rng.choice(options)

    def atom(self, ctx: Context):
        rng = self.rng
        for _ in range(10):
            kind = rng.choice(["rel", "rel", "eq", "fresh"])
            if kind == "rel" and self.sig.relations:
                p = rng.choice(sorted(self.sig.relations))
                args = [self.term(ctx, t) for t in self.sig.relations[p]]
                if all(a is not None for a in args):
                    return Atom(p, tuple(args))
            elif kind == "eq":
                ty = rng.choice(self.types(ctx))
                t, u = self.term(ctx, ty), self.term(ctx, ty)
                if t is not None and u is not None:
                    return Eq(t, u)
            else:
                names = self.name_terms(ctx)
                if names:
                    nt = rng.choice(sorted(names, key=lambda n: n.name))
                    a = rng.choice(names[nt])
                    t = self.term(ctx, rng.choice(self.types(ctx)))
                    if t is not None:
                        return Fresh(a, t)
        return Top()

    def types(self, ctx: Context):
        out = [DataType(d) for d in sorted(self.sig.data_types)]
        out += [nt for nt in self.name_terms(ctx)]
        return out

    def side(self, ctx: Context, k: Optional[int] = None):
        k = self.rng.randint(0, 2) if k is None else k
        out = []
        for _ in range(k):
            a = self.atom(ctx)
            if self.rng.random() < 0.2:
                a = self.rng.choice([And, Or, Imp])(a, self.atom(ctx))
            out.append(a)
        return tuple(out)

    # ------------------------------------------------------ leaves
    def leaf(self, ctx: Context) -> Derivation:
        rng = self.rng
        kinds = ["hyp", "hyp", "hyp", "topR", "botL"]
        names = [t for ts in self.name_terms(ctx).values() for t in ts]
        if names:
            kinds.append("F3")
        kind = rng.choice(kinds)
        right = () if self.single else self.side(ctx)
        if kind == "hyp":
            a = self.atom(ctx)
            if isinstance(a, Top):
                kind = "topR"
            else:
                seq = Sequent(ctx, self.side(ctx) + (a,), (a,) + right)
                return Derivation(seq, RuleApp("hyp", principal=a))
        if kind == "topR":
            seq = Sequent(ctx, self.side(ctx), (Top(),) + right)
            return Derivation(seq, RuleApp("topR", principal=Top()))
        one = (self.atom(ctx),) if self.single else right
        if kind == "botL":
            seq = Sequent(ctx, self.side(ctx) + (Bot(),), one)
            return Derivation(seq, RuleApp("botL", principal=Bot()))
        a = rng.choice(names)
        inst = axiom_instances("F3", {"a": a})
        seq = Sequent(ctx, self.side(ctx) + (Fresh(a, a),), one)
        return Derivation(seq, RuleApp("Ax", axiom=inst))

    # ------------------------------------------------------ helpers
    def wk(self, d: Derivation, lefts=(), rights=()) -> Derivation:
        return weaken_all(d, lefts, rights, self.mode)

    def too_big(self, seq: Sequent) -> bool:
        return len(seq.left) > self.cfg.max_side or len(seq.right) > self.cfg.max_side

    def pick(self, fs):
        return self.rng.randrange(len(fs)) if fs else None

    # ------------------------------------------------------ main
    def derivation(self, ctx: Context, depth: Optional[int] = None) -> Derivation:
        depth = self.cfg.depth if depth is None else depth
        if depth <= 0 or self.rng.random() < self.cfg.leaf_bias:
            return self.leaf(ctx)
        steps = [
            self.and_l, self.or_r, self.imp_r, self.all_l, self.ex_r, self.all_r,
            self.ex_l, self.new_r, self.new_l, self.fresh_rule, self.and_r,
            self.or_l, self.imp_l, self.eq_r, self.eq_s, self.axiom, self.ctx_fresh,
            self.a2, self.a3,
        ]
        if self.cfg.allow_cut:
            steps += [self.cut, self.cut]
        for _ in range(6):
            step = self.rng.choice(steps)
            d = step(ctx, depth - 1)
            if d is not None and not self.too_big(d.conclusion):
                return d
        return self.leaf(ctx)

    # unary logical steps
    def and_l(self, ctx, depth):
        p = self.derivation(ctx, depth)
        left = p.conclusion.left
        if len(left) < 2:
            return None
        i, j = self.rng.sample(range(len(left)), 2)
        phi = And(left[i], left[j])
        rest = tuple(f for k, f in enumerate(left) if k not in (i, j))
        seq = Sequent(ctx, rest + (phi,), p.conclusion.right)
        return Derivation(seq, RuleApp("andL", principal=phi), (p,))

    def or_r(self, ctx, depth):
        p = self.derivation(ctx, depth)
        right = p.conclusion.right
        if not right:
            return None
        if self.single:
            phi = Or(right[0], self.atom(ctx)) if self.rng.random() < 0.5 else Or(self.atom(ctx), right[0])
            name = "orR1" if phi.left is right[0] else "orR2"
            return Derivation(Sequent(ctx, p.conclusion.left, (phi,)), RuleApp(name, principal=phi), (p,))
        if len(right) < 2:
            return None
        i, j = self.rng.sample(range(len(right)), 2)
        phi = Or(right[i], right[j])
        rest = tuple(f for k, f in enumerate(right) if k not in (i, j))
        return Derivation(Sequent(ctx, p.conclusion.left, (phi,) + rest), RuleApp("orR", principal=phi), (p,))

    def imp_r(self, ctx, depth):
        p = self.derivation(ctx, depth)
        left, right = p.conclusion.left, p.conclusion.right
        i = self.pick(left)
        if i is None:
            return None
        if len(right) == 0 or (not self.classical and len(right) != 1):
            return None
        j = self.rng.randrange(len(right))
        phi = Imp(left[i], right[j])
        lrest = left[:i] + left[i + 1:]
        rrest = right[:j] + right[j + 1:]
        if not self.classical and not self.single:
            rrest = self.side(ctx, self.rng.randint(0, 1))
        return Derivation(Sequent(ctx, lrest, (phi,) + rrest), RuleApp("impR", principal=phi), (p,))

    def _abstract(self, ctx, phi):
        """Pick a variable or name occurring in phi and abstract it; returns (var, sort, body, witness)."""
        vs, ns = free_ids(phi)
        cands = [(Var(v), ctx.var_type(v)) for v in sorted(vs) if ctx.var_type(v) is not None]
        cands += [(NameSym(n), ctx.name_type(n)) for n in sorted(ns) if ctx.name_type(n) is not None]
        y = self.fresh(ctx, "y")
        if not cands or self.rng.random() < 0.15:
            ty = self.rng.choice(self.types(ctx))
            t = self.term(ctx, ty, 1)
            if t is None:
                return None
            return y, ty, phi, t
        t, ty = self.rng.choice(cands)
        body = substitute(phi, {t: Var(y)})
        return y, ty, body, t

    def all_l(self, ctx, depth):
        p = self.derivation(ctx, depth)
        left = p.conclusion.left
        i = self.pick(left)
        if i is None:
            return None
        got = self._abstract(ctx, left[i])
        if got is None:
            return None
        y, ty, body, t = got
        phi = Forall(y, ty, body)
        p = self.wk(p, (phi,))
        seq = Sequent(ctx, left[:i] + left[i + 1:] + (phi,), p.conclusion.right)
        return Derivation(seq, RuleApp("allL", principal=phi, witness=t), (p,))

    def ex_r(self, ctx, depth):
        p = self.derivation(ctx, depth)
        right = p.conclusion.right
        if not right:
            return None
        j = self.rng.randrange(len(right))
        got = self._abstract(ctx, right[j])
        if got is None:
            return None
        y, ty, body, t = got
        phi = Exists(y, ty, body)
        rest = right[:j] + right[j + 1:]
        if not self.single:
            p = self.wk(p, (), (phi,))
        seq = Sequent(ctx, p.conclusion.left, (phi,) + rest)
        return Derivation(seq, RuleApp("exR", principal=phi, witness=t), (p,))

    def _eigen_step(self, ctx, depth, var: bool, side: str):
        rng = self.rng
        if var:
            ty = rng.choice([DataType(d) for d in sorted(self.sig.data_types)] + [NameType(n) for n in sorted(self.sig.name_types)])
            z = self.fresh(ctx, "z")
            inner = ctx.add_var(z, ty)
        else:
            ty = NameType(rng.choice(sorted(self.sig.name_types)))
            z = self.fresh(ctx, "b")
            inner = ctx.add_fresh(z, ty)
        p = self.derivation(inner, depth)
        seq = p.conclusion
        fs = seq.left if side == "L" else seq.right
        key = Var(z) if var else NameSym(z)
        cands = []
        for k, f in enumerate(fs):
            others = [g for m, g in enumerate(fs) if m != k] + list(seq.right if side == "L" else seq.left)
            if all(z not in (free_ids(g)[0] | free_ids(g)[1]) for g in others):
                cands.append(k)
        if not cands:
            return None
        k = rng.choice(cands)
        bound = NameSupply(set(inner.ids()) | {z}).fresh("y" if var else "c")
        body = substitute(fs[k], {key: Var(bound) if var else NameSym(bound)})
        return p, z, ty, k, bound, body

    def all_r(self, ctx, depth):
        got = self._eigen_step(ctx, depth, True, "R")
        if got is None:
            return None
        p, z, ty, k, y, body = got
        phi = Forall(y, ty, body)
        right = p.conclusion.right
        rest = right[:k] + right[k + 1:]
        if not self.classical and not self.single:
            if rest:
                return None
            rest = self.side(ctx, self.rng.randint(0, 1))
        seq = Sequent(ctx, p.conclusion.left, (phi,) + rest)
        return Derivation(seq, RuleApp("allR", principal=phi, eigen=z), (p,))

    def ex_l(self, ctx, depth):
        got = self._eigen_step(ctx, depth, True, "L")
        if got is None:
            return None
        p, z, ty, k, y, body = got
        phi = Exists(y, ty, body)
        left = p.conclusion.left
        seq = Sequent(ctx, left[:k] + left[k + 1:] + (phi,), p.conclusion.right)
        return Derivation(seq, RuleApp("exL", principal=phi, eigen=z), (p,))

    def new_r(self, ctx, depth):
        got = self._eigen_step(ctx, depth, False, "R")
        if got is None:
            return None
        p, z, ty, k, c, body = got
        phi = New(c, ty, body)
        right = p.conclusion.right
        seq = Sequent(ctx, p.conclusion.left, (phi,) + right[:k] + right[k + 1:])
        return Derivation(seq, RuleApp("newR", principal=phi, eigen=z), (p,))

    def new_l(self, ctx, depth):
        got = self._eigen_step(ctx, depth, False, "L")
        if got is None:
            return None
        p, z, ty, k, c, body = got
        phi = New(c, ty, body)
        left = p.conclusion.left
        seq = Sequent(ctx, left[:k] + left[k + 1:] + (phi,), p.conclusion.right)
        return Derivation(seq, RuleApp("newL", principal=phi, eigen=z), (p,))

    def fresh_rule(self, ctx, depth):
        ty = NameType(self.rng.choice(sorted(self.sig.name_types)))
        z = self.fresh(ctx, "b")
        p = self.derivation(ctx.add_fresh(z, ty), depth)
        seq = p.conclusion
        if any(z in (free_ids(f)[1]) for f in seq.left + seq.right):
            return None
        return Derivation(Sequent(ctx, seq.left, seq.right), RuleApp("F", eigen=z, sort=ty), (p,))

    # binary logical steps
    def _merge2(self, ctx, depth, side1: str, side2: str):
        p1 = self.derivation(ctx, depth)
        p2 = self.derivation(ctx, depth)
        f1 = p1.conclusion.left if side1 == "L" else p1.conclusion.right
        f2 = p2.conclusion.left if side2 == "L" else p2.conclusion.right
        if not f1 or not f2:
            return None
        i, j = self.rng.randrange(len(f1)), self.rng.randrange(len(f2))
        return p1, p2, i, j, f1[i], f2[j]

    def and_r(self, ctx, depth):
        if self.single:
            p1, p2 = self.derivation(ctx, depth), self.derivation(ctx, depth)
            phi = And(p1.conclusion.right[0], p2.conclusion.right[0])
            l1, l2 = p1.conclusion.left, p2.conclusion.left
            q1, q2 = self.wk(p1, l2), self.wk(p2, l1)
            return Derivation(Sequent(ctx, l1 + l2, (phi,)), RuleApp("andR", principal=phi), (q1, q2))
        got = self._merge2(ctx, depth, "R", "R")
        if got is None:
            return None
        p1, p2, i, j, a, b = got
        phi = And(a, b)
        r1 = remove_one(p1.conclusion.right, a)
        r2 = remove_one(p2.conclusion.right, b)
        l1, l2 = p1.conclusion.left, p2.conclusion.left
        q1 = self.wk(p1, l2, r2)
        q2 = self.wk(p2, l1, r1)
        seq = Sequent(ctx, l1 + l2, (phi,) + r1 + r2)
        return Derivation(seq, RuleApp("andR", principal=phi), (q1, q2))

    def or_l(self, ctx, depth):
        if self.single or self.rng.random() < 0.3:
            p = self.derivation(ctx, depth)
            left = p.conclusion.left
            i = self.pick(left)
            if i is None:
                return None
            a, b = left[i], self.atom(ctx)
            phi = Or(a, b) if self.rng.random() < 0.5 else Or(b, a)
            q1 = self.wk(p, (phi.left,))
            q2 = self.wk(p, (phi.right,))
            seq = Sequent(ctx, left + (phi,), p.conclusion.right)
            return Derivation(seq, RuleApp("orL", principal=phi), (q1, q2))
        got = self._merge2(ctx, depth, "L", "L")
        if got is None:
            return None
        p1, p2, i, j, a, b = got
        phi = Or(a, b)
        l1 = remove_one(p1.conclusion.left, a)
        l2 = remove_one(p2.conclusion.left, b)
        r1, r2 = p1.conclusion.right, p2.conclusion.right
        q1 = self.wk(p1, l2, r2)
        q2 = self.wk(p2, l1, r1)
        seq = Sequent(ctx, l1 + l2 + (phi,), r1 + r2)
        return Derivation(seq, RuleApp("orL", principal=phi), (q1, q2))

    def imp_l(self, ctx, depth):
        got = self._merge2(ctx, depth, "R", "L")
        if got is None:
            return None
        p1, p2, i, j, a, b = got
        phi = Imp(a, b)
        if self.classical:
            r1 = remove_one(p1.conclusion.right, a)
            l2 = remove_one(p2.conclusion.left, b)
            l1, r2 = p1.conclusion.left, p2.conclusion.right
            q1 = self.wk(p1, l2, r2)
            q2 = self.wk(p2, l1, r1)
            seq = Sequent(ctx, l1 + l2 + (phi,), r1 + r2)
            return Derivation(seq, RuleApp("impL", principal=phi), (q1, q2))
        if len(p1.conclusion.right) != 1:
            return None
        l1 = p1.conclusion.left
        l2 = remove_one(p2.conclusion.left, b)
        q1 = self.wk(p1, l2 + (phi,))
        q2 = self.wk(p2, l1)
        seq = Sequent(ctx, l1 + l2 + (phi,), p2.conclusion.right)
        return Derivation(seq, RuleApp("impL", principal=phi), (q1, q2))

    def cut(self, ctx, depth):
        roll = self.rng.random()
        if roll < 0.35:
            # random right premise, hyp* on the left
            p2 = self.derivation(ctx, depth)
            left = p2.conclusion.left
            if not left:
                return None
            phi = p2.rule.principal if p2.rule.name in ("andL", "orL", "impL", "exL", "allL", "newL") \
                else left[self.rng.randrange(len(left))]
            extra_r = () if self.single else self.side(ctx, 1)
            p1 = derive_hyp(ctx, self.side(ctx, 1), phi, extra_r, self.mode)
        else:
            p1 = self.derivation(ctx, depth)
            right = p1.conclusion.right
            if not right:
                return None
            phi = right[self.rng.randrange(len(right))]
            if roll < 0.75:
                extra_r = () if self.single else self.side(ctx, 1)
                p2 = derive_hyp(ctx, self.side(ctx, 1), phi, extra_r, self.mode)
            else:
                p2 = self.wk(self.derivation(ctx, depth), (phi,))
        right = p1.conclusion.right
        r1 = remove_one(right, phi)
        l2 = remove_one(p2.conclusion.left, phi)
        seq = Sequent(ctx, p1.conclusion.left + l2, r1 + p2.conclusion.right)
        if self.single and len(seq.right) != 1:
            return None
        return Derivation(seq, RuleApp("cut", principal=phi), (p1, p2))

    # nonlogical steps
    def _with(self, p, need, adds):
        """Conclusion p + need; premises p + need + each added formula."""
        base = self.wk(p, need)
        prems = tuple(self.wk(base, (q,)) for q in adds)
        return base.conclusion, prems

    def eq_r(self, ctx, depth):
        p = self.derivation(ctx, depth)
        t = self.term(ctx, self.rng.choice(self.types(ctx)))
        if t is None:
            return None
        seq, prems = self._with(p, (), (Eq(t, t),))
        return Derivation(seq, RuleApp("eqR", principal=Eq(t, t)), prems)

    def eq_s(self, ctx, depth):
        p = self.derivation(ctx, depth)
        ty = self.rng.choice(self.types(ctx))
        t, u = self.term(ctx, ty, 1), self.term(ctx, ty, 1)
        if t is None or u is None:
            return None
        from .calculus import positions_of, replace_at
        for _ in range(5):
            a = self.atom(ctx)
            if isinstance(a, Top):
                continue
            pos = positions_of(a, t)
            if not pos:
                pred, args = atom_parts(a)
                idx = [k for k, s in enumerate(args) if self._type_of(ctx, s) == ty]
                if not idx:
                    continue
                k = self.rng.choice(idx)
                args = list(args)
                args[k] = t
                a = make_atom(pred, args)
                pos = positions_of(a, t)
            pos = [q for q in pos if not any(q[:len(r)] == r and q != r for r in pos)]
            chosen = tuple(self.rng.sample(pos, self.rng.randint(1, len(pos))))
            out = a
            for q in chosen:
                out = replace_at(out, q, u)
            eq = Eq(t, u)
            seq, prems = self._with(p, (eq, a), (out,))
            return Derivation(seq, RuleApp("eqS", principal=a, equation=eq, positions=chosen), prems)
        return None

    def _type_of(self, ctx, t):
        from .context import typecheck_term
        return typecheck_term(ctx, t, self.sig)

    def axiom(self, ctx, depth):
        rng = self.rng
        names = self.name_terms(ctx)
        if not names:
            return None
        nt = rng.choice(sorted(names, key=lambda n: n.name))
        ns = names[nt]
        a, b = rng.choice(ns), rng.choice(ns)
        ty = rng.choice(self.types(ctx))
        x = self.term(ctx, ty, 1)
        delta = DataType(sorted(self.sig.data_types)[0])
        which = rng.choice(["S1", "S2", "S3", "E1", "E2", "E3", "F1", "F4", "A1", "F2"])
        if which == "S1":
            params = {"a": a, "x": x}
        elif which in ("S2", "F1"):
            params = {"a": a, "b": b, "x": x}
        elif which in ("S3", "F4"):
            params = {"a": a, "b": b}
        elif which == "E1":
            consts = sorted(self.sig.constants)
            if not consts:
                return None
            params = {"a": a, "b": b, "c": Const(rng.choice(consts))}
        elif which == "E2":
            f = rng.choice(sorted(self.sig.functions) + ["swap", "abs"])
            if f == "swap":
                args = (rng.choice(ns), rng.choice(ns), x)
            elif f == "abs":
                args = (rng.choice(ns), x)
            else:
                args = tuple(self.term(ctx, s, 1) for s in self.sig.functions[f][0])
            params = {"a": a, "b": b, "f": f, "args": args}
        elif which == "E3":
            at = self.atom(ctx)
            if isinstance(at, Top):
                return None
            pred, args = atom_parts(at)
            params = {"a": a, "b": b, "p": pred, "args": args}
        elif which == "F2":
            others = [n for n in names if n != nt]
            if not others:
                return None
            params = {"a": a, "b": rng.choice(names[others[0]])}
        else:
            y = self.term(ctx, delta, 1)
            xx = self.term(ctx, delta, 1)
            params = {"a": a, "b": b, "x": xx, "y": y}
        if any(v is None for v in params.values()) or (which == "E2" and any(v is None for v in params["args"])):
            return None
        inst = axiom_instances(which, params, ctx, self.sig)
        p = self.derivation(ctx, depth)
        seq, prems = self._with(p, inst.premises, inst.conclusions)
        return Derivation(seq, RuleApp("Ax", axiom=inst), prems)

    def ctx_fresh(self, ctx, depth):
        fresh = [e for e in ctx.entries if isinstance(e, FreshBind)]
        if not fresh:
            return None
        e = self.rng.choice(fresh)
        before = Context(ctx.entries[:ctx.position(e.name)])
        t = self.term(before, self.rng.choice(self.types(before)), 1) if self.types(before) else None
        if t is None:
            t = Const(sorted(self.sig.constants)[0]) if self.sig.constants else None
        if t is None:
            return None
        phi = Fresh(NameSym(e.name), t)
        assert in_fresh_set(ctx, phi.name, t)
        p = self.derivation(ctx, depth)
        seq, prems = self._with(p, (), (phi,))
        return Derivation(seq, RuleApp("ctxfresh", principal=phi), prems)

    def a2(self, ctx, depth):
        names = self.name_terms(ctx)
        if not names:
            return None
        nt = self.rng.choice(sorted(names, key=lambda n: n.name))
        a, b = self.rng.choice(names[nt]), self.rng.choice(names[nt])
        delta = DataType(sorted(self.sig.data_types)[0])
        t, u = self.term(ctx, delta, 1), self.term(ctx, delta, 1)
        if t is None or u is None:
            return None
        phi = Eq(Abs(a, t), Abs(b, u))
        p = self.derivation(ctx, depth)
        base = self.wk(p, (phi,))
        q1 = self.wk(base, (Eq(a, b), Eq(t, u)))
        q2 = self.wk(base, (Fresh(a, u), Eq(t, Swap(a, b, u))))
        return Derivation(base.conclusion, RuleApp("A2", principal=phi), (q1, q2))

    def a3(self, ctx, depth):
        names = self.name_terms(ctx)
        if not names:
            return None
        nt = self.rng.choice(sorted(names, key=lambda n: n.name))
        delta = DataType(sorted(self.sig.data_types)[0])
        t = self.term(ctx, AbsType(nt, delta), 1)
        if t is None:
            return None
        supply = NameSupply(ctx.ids())
        av, xv = supply.fresh("a"), supply.fresh("x")
        p = self.derivation(ctx, depth)
        inner = ctx.add_var(av, nt).add_var(xv, delta)
        q = self.wk(weaken_ctx(p, inner, self.mode), (Eq(t, Abs(Var(av), Var(xv))),))
        return Derivation(p.conclusion, RuleApp("A3", witness=t, eigen=xv, eigen2=av), (q,))


class RefutationGenerator(Generator):
    """Derivations of Σ;Γ ⇒ ⊥ with Γ constraints, using only nonlogical rules.

    Leaves are F3 (a # a on the left); every step is an axiom or an
    equality, freshness or abstraction rule, which only grow the left side.
    Contexts must declare at least one name (symbol or name-typed variable).
    """

    def atom(self, ctx: Context):
        for _ in range(10):
            a = super().atom(ctx)
            if is_constraint(a):
                return a
        names = [t for ts in self.name_terms(ctx).values() for t in ts]
        return Eq(names[0], names[0])

    def side(self, ctx: Context, k: Optional[int] = None):
        k = self.rng.randint(0, 2) if k is None else k
        return tuple(self.atom(ctx) for _ in range(k))

    def leaf(self, ctx: Context) -> Derivation:
        names = [t for ts in self.name_terms(ctx).values() for t in ts]
        if not names:
            raise ValueError("refutations need a name in the context")
        a = self.rng.choice(names)
        inst = axiom_instances("F3", {"a": a})
        seq = Sequent(ctx, self.side(ctx) + (Fresh(a, a),), (Bot(),))
        return Derivation(seq, RuleApp("Ax", axiom=inst))

    def derivation(self, ctx: Context, depth: Optional[int] = None) -> Derivation:
        depth = self.cfg.depth if depth is None else depth
        if depth <= 0 or self.rng.random() < self.cfg.leaf_bias:
            return self.leaf(ctx)
        steps = [self.eq_r, self.eq_s, self.axiom, self.axiom, self.ctx_fresh, self.a2,
                 self.fresh_rule]
        for _ in range(6):
            d = self.rng.choice(steps)(ctx, depth - 1)
            if d is not None and not self.too_big(d.conclusion):
                return d
        return self.leaf(ctx)

    def axiom(self, ctx, depth):
        d = super().axiom(ctx, depth)
        # E3 over a user relation would put a non-constraint on the left
        if d is not None and not all(is_constraint(f) for f in d.conclusion.left):
            return None
        return d


def refutation_corpus(seed: int, n: int, mode: Mode = TEST_MODE,
                      config: Optional[GenConfig] = None) -> list:
    """n checked derivations of Σ;Γ ⇒ ⊥ with Γ constraints, deterministic in the seed."""
    rng = random.Random(seed)
    gen = RefutationGenerator(rng, mode, config or GenConfig(depth=6, max_side=6, leaf_bias=0.1))
    out = []
    while len(out) < n:
        ctx = initial_context(rng, mode.sig)
        if not gen.name_terms(ctx):
            continue
        d = gen.derivation(ctx)
        rep = check_derivation(mode, d)
        if not rep.ok:
            raise AssertionError(f"generator produced an invalid derivation: {rep.violations[:3]}")
        out.append(d)
    return out


def initial_context(rng: random.Random, sig=None) -> Context:
    sig = sig or test_signature()
    choices = [
        Context(),
        Context((VarBind("x", DataType("delta")),)),
        Context((VarBind("x", DataType("delta")), FreshBind("a", NameType("nu")))),
        Context((FreshBind("a", NameType("nu")), VarBind("x", DataType("delta")), FreshBind("b", NameType("nu")))),
        Context((VarBind("x", DataType("delta")), VarBind("n", NameType("nu")))),
    ]
    return rng.choice(choices)


def random_derivation(rng: random.Random, mode: Mode = TEST_MODE, config: Optional[GenConfig] = None,
                      ctx: Optional[Context] = None) -> Derivation:
    gen = Generator(rng, mode, config)
    return gen.derivation(ctx if ctx is not None else initial_context(rng, mode.sig))


def corpus(seed: int, n: int, mode: Mode = TEST_MODE, config: Optional[GenConfig] = None) -> list:
    """n random derivations that pass the checker, deterministic in the seed."""
    rng = random.Random(seed)
    out = []
    check_mode = mode.with_cut(config.allow_cut) if config else mode
    while len(out) < n:
        d = random_derivation(rng, mode, config)
        rep = check_derivation(check_mode, d)
        if not rep.ok:
            raise AssertionError(f"generator produced an invalid derivation: {rep.violations[:3]}")
        out.append(d)
    return out


def principal_new_cut(rng: random.Random, mode: Mode = TEST_MODE, config: Optional[GenConfig] = None,
                      ctx: Optional[Context] = None, tries: int = 200) -> Derivation:
    """A cut on a ∇ formula introduced by newR on the left and newL on the right."""
    gen = Generator(rng, mode, config)
    for _ in range(tries):
        c = ctx if ctx is not None else initial_context(rng, mode.sig)
        p1 = gen.new_r(c, gen.cfg.depth)
        if p1 is None:
            continue
        phi = p1.rule.principal
        if phi.name not in free_ids(phi.body)[1]:
            continue  # vacuous binder; want the bound name to matter
        extra_r = () if gen.single else gen.side(c, 1)
        p2 = derive_hyp(c, gen.side(c, 1), phi, extra_r, mode)
        if p2.rule.name != "newL":
            continue
        seq = Sequent(c, p1.conclusion.left + remove_one(p2.conclusion.left, phi),
                      remove_one(p1.conclusion.right, phi) + p2.conclusion.right)
        return Derivation(seq, RuleApp("cut", principal=phi), (p1, p2))
    raise RuntimeError("no principal ∇ cut found; raise tries or depth")


def cut_corpus(seed: int, n: int, max_cuts: int = 3, mode: Mode = TEST_MODE,
               config: Optional[GenConfig] = None, principal_new: int = 3) -> list:
    """n checked derivations with 1..max_cuts cuts each.

    The first principal_new entries are principal ∇ cuts; the rest come from
    the random generator with cuts enabled.
    """
    from .calculus import cut_count
    cfg = config or GenConfig(depth=5, allow_cut=True)
    rng = random.Random(seed)
    cut_mode = mode.with_cut()
    out = []
    while len(out) < min(principal_new, n):
        d = principal_new_cut(rng, mode, cfg)
        if 1 <= cut_count(d) <= max_cuts and check_derivation(cut_mode, d).ok:
            out.append(d)
    while len(out) < n:
        d = random_derivation(rng, mode, cfg)
        if 1 <= cut_count(d) <= max_cuts and check_derivation(cut_mode, d).ok:
            out.append(d)
    return out


def enumerate_formulas(depth: int, scope: tuple = ()):
    """Every formula up to the given connective depth over ∧ ∨ ⊃ ∀ ∃ ∇.

    Leaves are fixed per scope so the enumeration stays finite: p(x) at the
    top, p(y) under a ∀/∃ binding y, and b # x under a ∇ binding b.  The
    free variable x:δ must be in the context the formulas are used in.
    """
    yield _scope_leaf(scope)
    if depth == 0:
        return
    subs = list(enumerate_formulas(depth - 1, scope))
    for a in subs:
        for b in subs:
            yield And(a, b)
            yield Or(a, b)
            yield Imp(a, b)
    i = len(scope)
    y, b = f"y{i}", f"b{i}"
    for body in enumerate_formulas(depth - 1, scope + (("var", y),)):
        yield Forall(y, DataType("delta"), body)
        yield Exists(y, DataType("delta"), body)
    for body in enumerate_formulas(depth - 1, scope + (("name", b),)):
        yield New(b, NameType("nu"), body)


def _scope_leaf(scope):
    if not scope:
        return make_atom("p", (Var("x"),))
    kind, v = scope[-1]
    return make_atom("p", (Var(v),)) if kind == "var" else Fresh(NameSym(v), Var("x"))


# ------------------------------------------------------------ ground terms

def random_ground_term(rng: random.Random, ty, depth: int, names: dict, sig=None):
    """A random ground term of type ty and height at most depth.

    names maps name-symbol ids to their NameType.  Returns None when the
    type has no inhabitant within the bound.
    """
    sig = sig or test_signature()
    if isinstance(ty, NameType):
        pool = sorted(n for n, t in names.items() if t == ty)
        return NameSym(rng.choice(pool)) if pool else None
    if isinstance(ty, AbsType):
        if depth < 2:
            return None
        a = random_ground_term(rng, ty.name_type, 1, names, sig)
        body = random_ground_term(rng, ty.body, rng.randint(1, depth - 1), names, sig)
        return None if a is None or body is None else Abs(a, body)
    consts = sorted(c for c, t in sig.constants.items() if t == ty)
    fns = sorted(f for f, (_, res) in sig.functions.items() if res == ty)
    if depth < 2 or not fns or (consts and rng.random() < 0.3):
        return Const(rng.choice(consts)) if consts else None
    f = rng.choice(fns)
    args = [random_ground_term(rng, a, rng.randint(1, depth - 1), names, sig) for a in sig.functions[f][0]]
    return None if any(x is None for x in args) else App(f, tuple(args))


def alpha_variant(rng: random.Random, t, names: dict):
    """A term nominally equal to the ground term t, renaming some abstractions.

    ⟨a⟩s becomes ⟨c⟩(a c)·s for a name c of a's type that is fresh for s.
    """
    from .model import ground_fresh, ground_swap
    if isinstance(t, App):
        return App(t.fn, tuple(alpha_variant(rng, x, names) for x in t.args))
    if isinstance(t, Abs):
        body = alpha_variant(rng, t.body, names)
        a = t.name
        spare = [NameSym(n) for n, ty in sorted(names.items())
                 if ty == names[a.name] and NameSym(n) != a and ground_fresh(NameSym(n), body)]
        if spare and rng.random() < 0.7:
            c = rng.choice(spare)
            return Abs(c, ground_swap(a, c, body))
        return Abs(a, body)
    return t


# ------------------------------------------------------------ NL formulas

def random_nl_formula(rng: random.Random, depth: int, sig=None, scope: Optional[dict] = None):
    """A random formula on the variable-binding side: ∇ binds name-typed variables.

    scope maps variables to types; bound names are drawn from a small pool,
    so shadowing happens.  No name-symbols appear.
    """
    from .syntax import NewVar, rich_signature
    sig = sig or rich_signature()
    scope = dict(scope or {"x": DataType("delta"), "n": NameType(sorted(sig.name_types)[0])})
    if depth <= 0 or rng.random() < 0.2:
        return _nl_atom(rng, scope, sig)
    kind = rng.choice(["and", "or", "imp", "all", "ex", "new", "new"])
    if kind in ("and", "or", "imp"):
        op = {"and": And, "or": Or, "imp": Imp}[kind]
        return op(random_nl_formula(rng, depth - 1, sig, scope), random_nl_formula(rng, depth - 1, sig, scope))
    v = rng.choice(["u", "v", "w", "n"])
    if kind == "new":
        ty = NameType(rng.choice(sorted(sig.name_types)))
        return NewVar(v, ty, random_nl_formula(rng, depth - 1, sig, {**scope, v: ty}))
    ty = rng.choice([DataType(d) for d in sorted(sig.data_types)] + [NameType(n) for n in sorted(sig.name_types)])
    q = Forall if kind == "all" else Exists
    return q(v, ty, random_nl_formula(rng, depth - 1, sig, {**scope, v: ty}))


def _nl_term(rng, ty, depth, scope, sig):
    vs = sorted(v for v, t in scope.items() if t == ty)
    if isinstance(ty, NameType):
        return Var(rng.choice(vs)) if vs else None
    if isinstance(ty, AbsType):
        a = _nl_term(rng, ty.name_type, 0, scope, sig)
        b = _nl_term(rng, ty.body, depth - 1, scope, sig)
        return None if a is None or b is None else Abs(a, b)
    if depth > 0 and rng.random() < 0.3:
        names = [v for v, t in scope.items() if isinstance(t, NameType)]
        if names:
            pick = rng.choice(sorted(names))
            a, b = Var(pick), Var(rng.choice(sorted(v for v in names if scope[v] == scope[pick])))
            body = _nl_term(rng, ty, depth - 1, scope, sig)
            if body is not None:
                return Swap(a, b, body)
    fns = sorted(f for f, (_, res) in sig.functions.items() if res == ty)
    if depth > 0 and fns and rng.random() < 0.5:
        f = rng.choice(fns)
        args = [_nl_term(rng, a, depth - 1, scope, sig) for a in sig.functions[f][0]]
        if all(x is not None for x in args):
            return App(f, tuple(args))
    consts = sorted(c for c, t in sig.constants.items() if t == ty)
    opts = [Var(v) for v in vs] + [Const(c) for c in consts]
    return rng.choice(opts) if opts else None


def _nl_atom(rng, scope, sig):
    for _ in range(10):
        kind = rng.choice(["rel", "eq", "fresh"])
        if kind == "rel":
            p = rng.choice(sorted(sig.relations))
            args = [_nl_term(rng, t, 2, scope, sig) for t in sig.relations[p]]
            if all(a is not None for a in args):
                return Atom(p, tuple(args))
        elif kind == "eq":
            ty = DataType(rng.choice(sorted(sig.data_types)))
            return Eq(_nl_term(rng, ty, 2, scope, sig), _nl_term(rng, ty, 2, scope, sig))
        else:
            names = sorted(v for v, t in scope.items() if isinstance(t, NameType))
            if names:
                a = rng.choice(names)
                t = _nl_term(rng, DataType(rng.choice(sorted(sig.data_types))), 2, scope, sig)
                if t is not None:
                    return Fresh(Var(a), t)
    return Top()

"""Shared test machinery: seeds, corpora and the transformation sweep."""

from __future__ import annotations

import os
import random
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

from nomseq import transform as T
from nomseq.calculus import Logic, Mode, check_derivation, height, logical_height
from nomseq.context import Context, FreshBind, VarBind
from nomseq.generate import Generator, corpus
from nomseq.syntax import (
    And, DataType, Exists, Forall, Imp, NameSym, NameType, New, Or, Var, swap_formula,
    test_signature,
)

SEED = int(os.environ.get("NOMSEQ_SEED", "0") or 0)
SIG = test_signature()
MODES = {
    "classical": Mode(Logic.CLASSICAL, sig=SIG),
    "intuitionistic": Mode(Logic.INTUITIONISTIC, sig=SIG),
    "single": Mode(Logic.SINGLE, sig=SIG),
}


@lru_cache(maxsize=None)
def shared_corpus(mode_name: str, n: int, seed: int = SEED) -> tuple:
    return tuple(corpus(seed, n, MODES[mode_name]))


def report(criterion: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {title}"
    print(line + (f" ({detail})" if detail else ""))


@dataclass
class Sweep:
    """Results of applying every transformation to a corpus."""
    applied: Counter = field(default_factory=Counter)
    unsound: list = field(default_factory=list)       # (transform, violations)
    height_law: list = field(default_factory=list)    # (transform, before, after)
    errors: list = field(default_factory=list)        # (transform, message)


def _left_kinds(f, logic):
    kinds = {And: ["andL"], Or: ["orL"], Imp: ["impL"], Exists: ["exL"], New: ["newL"]}.get(type(f), [])
    if isinstance(f, Imp) and logic == Logic.CLASSICAL:
        kinds = kinds + ["impL_left"]
    return kinds


def _right_kinds(f, logic):
    kinds = {Forall: ["allR"], New: ["newR"]}.get(type(f), [])
    if logic == Logic.CLASSICAL:
        kinds = kinds + {And: ["andR"], Or: ["orR"], Imp: ["impR"]}.get(type(f), [])
    return kinds


def sweep(derivations, mode: Mode, seed: int = SEED) -> Sweep:
    """Run weaken, weaken_ctx, subst, EV, invert, contract and hyp* on each derivation.

    Height-preserving transforms must keep height; the others must not raise
    logical height.  Every output is rechecked in mode.
    """
    rng = random.Random(seed)
    gen = Generator(rng, mode)
    res = Sweep()
    single = mode.logic == Logic.SINGLE

    def checked(name, out, inp, law=None):
        res.applied[name] += 1
        r = check_derivation(mode, out)
        if not r.ok:
            res.unsound.append((name, r.violations[:2]))
            return
        if law == "height" and height(out) != height(inp):
            res.height_law.append((name, height(inp), height(out)))
        if law == "logical" and logical_height(out) > logical_height(inp):
            res.height_law.append((name, logical_height(inp), logical_height(out)))

    def attempt(name, fn):
        try:
            fn()
        except T.TransformError as e:
            res.errors.append((name, str(e)))

    for d in derivations:
        s = d.conclusion
        ctx = s.ctx
        phi = gen.atom(ctx)

        def weakenings():
            checked("weaken", T.weaken(d, phi, "left", mode), d, "height")
            if not single:
                checked("weaken", T.weaken(d, phi, "right", mode), d, "height")
        attempt("weaken", weakenings)

        def ctx_weakenings():
            supply = T.supply_for(d)
            bigger = ctx.add_fresh(supply.fresh("a"), NameType("nu"))
            checked("weaken_ctx", T.weaken_ctx(d, bigger, mode), d, "height")
            front = Context((VarBind(supply.fresh("w"), DataType("delta")),) + ctx.entries)
            checked("weaken_ctx", T.weaken_ctx(d, front, mode), d, "height")
        attempt("weaken_ctx", ctx_weakenings)

        for e in ctx.entries:
            if isinstance(e, VarBind):
                prefix = Context(ctx.entries[:ctx.position(e.var)])
                t = gen.term(prefix, e.sort)
                if t is not None:
                    attempt("subst_derivation",
                            lambda e=e, t=t: checked("subst_derivation",
                                                     T.subst_derivation(d, e.var, t, mode), d, "height"))

        names = [e.name for e in ctx.entries if isinstance(e, FreshBind)]
        names += [e.var for e in ctx.entries if isinstance(e, VarBind) and e.sort == NameType("nu")]
        if names:
            def as_term(n):
                return NameSym(n) if ctx.name_type(n) else Var(n)
            a, b = as_term(rng.choice(names)), as_term(rng.choice(names))
            pool = list(s.left + s.right) or [gen.atom(ctx)]
            chi = gen.side(ctx, 1)[0] if rng.random() < 0.5 else rng.choice(pool)

            def ev():
                dl = T.weaken(d, swap_formula(a, b, chi), "left", mode)
                checked("ev_transform", T.ev_transform(dl, a, b, "left", chi, mode), dl, "logical")
                if not single:
                    dr = T.weaken(d, swap_formula(a, b, chi), "right", mode)
                    checked("ev_transform", T.ev_transform(dr, a, b, "right", chi, mode), dr, "logical")
            attempt("ev_transform", ev)

        for side, fs in (("left", s.left), ("right", s.right)):
            for f in fs:
                kinds = _left_kinds(f, mode.logic) if side == "left" else _right_kinds(f, mode.logic)
                for k in kinds:
                    def inv(k=k, f=f):
                        out = T.invert(d, k, f, mode=mode)
                        for o in out if isinstance(out, tuple) else (out,):
                            checked("invert", o, d, "logical")
                    attempt("invert", inv)
                if side == "right" and single:
                    continue

                def con(f=f, side=side):
                    dd = T.weaken(d, f, side, mode)
                    checked("contract", T.contract(dd, f, side, mode), dd, "logical")
                attempt("contract", con)
                attempt("derive_hyp", lambda f=f: checked("derive_hyp", T.derive_hyp(ctx, (), f, (), mode), d))
    return res

import random
from pathlib import Path

import pytest

from nomseq import transform as T
from nomseq.calculus import (
    CLASSICAL, INTUITIONISTIC, Logic, Mode, RuleApp, Sequent, check_derivation, contains, count,
    cut_count, height, logical_height, node, nodes,
)
from nomseq.generate import principal_new_cut
from nomseq.notation import parse_context, parse_formula as F, parse_sequent, parse_term
from nomseq.proofio import load_derivation
from nomseq.syntax import NameSym, swap_formula

from support import MODES, SEED, shared_corpus, sweep

GOLDEN = Path(__file__).parent / "golden"
CUT = CLASSICAL.with_cut()
a, b = NameSym("a"), NameSym("b")


def hyp(text):
    seq = parse_sequent(text)
    return node(seq, RuleApp("hyp", principal=seq.right[0]))


def checks(d, mode=CLASSICAL):
    r = check_derivation(mode, d)
    assert r.ok, r.violations
    return r


def cf4():
    return load_derivation((GOLDEN / "cf4_axiom.proof").read_text(encoding="utf-8"))


# ---------------------------------------------------------------- weakening

def test_weaken_hyp_by_top():
    d = T.weaken(hyp("x:delta ; p(x) |- p(x)"), F("top"), "left")
    assert checks(d).height == 1
    assert contains(d.conclusion.left, F("top"))


def test_weaken_keeps_height():
    d = cf4()
    out = T.weaken(d, F("forall y:delta. p(y)"), "right")
    checks(out)
    assert height(out) == height(d)


def test_weaken_rejects_unbound_variables():
    with pytest.raises(T.TransformError):
        T.weaken(hyp("x:delta ; p(x) |- p(x)"), F("p(z)"), "left")


def test_weaken_in_single_mode_rejects_right():
    with pytest.raises(T.TransformError):
        T.weaken(hyp("x:delta ; p(x) |- p(x)"), F("top"), "right", Mode(Logic.SINGLE))


def test_weaken_ctx_identity():
    d = cf4()
    assert T.weaken_ctx(d, d.conclusion.ctx) is d


def test_weaken_ctx_extensions():
    d = hyp("x:delta ; p(x) |- p(x)")
    out = T.weaken_ctx(d, parse_context("x:delta, y:delta"))
    checks(out)
    big = T.weaken_ctx(cf4(), parse_context("# 'c:nu"))
    checks(big)
    assert height(big) == height(cf4())


def test_weaken_ctx_needs_a_stronger_context():
    with pytest.raises(T.TransformError):
        T.weaken_ctx(hyp("x:delta ; p(x) |- p(x)"), parse_context("y:delta"))


# ---------------------------------------------------------------- substitution

def test_subst_into_hyp():
    out = T.subst_derivation(hyp("x:delta ; p(x) |- p(x)"), "x", parse_term("c"))
    checks(out)
    assert out.rule.name == "hyp"
    assert out.conclusion.same(parse_sequent(". ; p(c) |- p(c)"))


def test_subst_keeps_fresh_name_rule():
    inner = cf4().premises[0]
    assert inner.rule.name == "F"
    out = T.subst_derivation(inner, "x1", parse_term("f(c,d)"))
    checks(out)
    assert out.rule.name == "F" and height(out) == height(inner)


def test_subst_rejects_wrong_type():
    with pytest.raises(T.TransformError):
        T.subst_derivation(hyp("x:delta, n:nu ; p(x) |- p(x)"), "x", parse_term("n"))


# ---------------------------------------------------------------- equivariance

SWAP_CTX = "x:delta # 'a:nu # 'b:nu"


def test_ev_left_on_hyp():
    d = hyp(f"{SWAP_CTX} ; p(('a 'b).x) |- p(('a 'b).x)")
    out = T.ev_transform(d, a, b, "left", F("p(x)"))
    checks(out)
    assert logical_height(out) == 1
    assert out.conclusion.same(parse_sequent(f"{SWAP_CTX} ; p(x) |- p(('a 'b).x)"))


def test_ev_on_top_is_trivial():
    d = T.weaken(hyp(f"{SWAP_CTX} ; p(x) |- p(x)"), F("top"), "left")
    assert T.ev_transform(d, a, b, "left", F("top")) is d


def test_ev_right_through_implication():
    phi = F("p(x) => p(x)")
    target = swap_formula(a, b, phi)
    concl = Sequent(parse_context(SWAP_CTX), (), (target,))
    inner = hyp(f"{SWAP_CTX} ; p(('a 'b).x) |- p(('a 'b).x)")
    d = node(concl, RuleApp("impR", principal=target), inner)
    checks(d)
    out = T.ev_transform(d, a, b, "right", phi)
    checks(out)
    assert logical_height(out) <= logical_height(d)
    assert out.conclusion.right == (phi,)


def test_swap_fresh_names_on_hyp():
    d = hyp("# 'a:nu # 'b:nu ; r('b) |- r('b)")
    out = T.swap_fresh_names(d, "a", "b", F("r('a)"), "left")
    checks(out)
    assert contains(out.conclusion.left, F("r('a)"))


def test_swap_fresh_names_identity_and_closed_formula():
    d = hyp("# 'a:nu # 'b:nu ; p(c) |- p(c)")
    assert T.swap_fresh_names(d, "a", "a", F("p(c)")) is d
    out = T.swap_fresh_names(d, "a", "b", F("p(c)"))
    checks(out)
    assert out.conclusion.same(d.conclusion)


# ---------------------------------------------------------------- hyp*

def test_derive_hyp_atom_is_one_node():
    ctx = parse_context("x:delta")
    d = T.derive_hyp(ctx, (), F("p(x)"), ())
    assert d.rule.name == "hyp" and height(d) == 1


def test_derive_hyp_fresh_quantifier():
    phi = F("new 'a:nu. r('a)")
    d = T.derive_hyp(parse_context(""), (), phi, ())
    checks(d)
    assert d.conclusion.same(Sequent(parse_context(""), (phi,), (phi,)))
    assert {"newL", "newR"} <= {n.rule.name for n in nodes(d)}


def test_derive_hyp_conjunction():
    phi = F("q('a, x) & r('a)")
    ctx = parse_context("x:delta # 'a:nu")
    d = T.derive_hyp(ctx, (), phi, ())
    checks(d)
    assert d.rule.name in ("andL", "andR")


def test_derive_hyp_intuitionistic_and_single():
    phi = F("forall x:delta. (p(x) | p(c)) => exists y:delta. p(y)")
    for mode in (INTUITIONISTIC, Mode(Logic.SINGLE)):
        checks(T.derive_hyp(parse_context(""), (), phi, (), mode), mode)


# ---------------------------------------------------------------- inversion

def test_invert_and_left():
    phi = F("p(c) & p(x)")
    d = T.weaken(hyp("x:delta ; p(x) |- p(x)"), phi, "left")
    out = T.invert(d, "andL", phi)
    checks(out)
    assert count(out.conclusion.left, F("p(c)")) == 1
    assert logical_height(out) <= logical_height(d)


def test_invert_new_left_at_the_root_returns_the_premise():
    phi = F("new 'a:nu. r('a)")
    d = T.derive_hyp(parse_context(""), (), phi, ())
    assert d.rule.name == "newL"
    out = T.invert(d, "newL", phi, fresh=d.rule.eigen)
    assert out == d.premises[0]


def test_invert_new_left_under_forall_right():
    phi = F("new 'a:nu. r('a)")
    ctx_y = parse_context("y:delta")
    inner = T.weaken(T.derive_hyp(ctx_y, (), phi, ()), F("p(y)"), "right")
    goal = F("forall y:delta. p(y)")
    root = Sequent(parse_context(""), (phi,), (phi, goal))
    d = node(root, RuleApp("allR", principal=goal, eigen="y"), inner)
    checks(d)
    out = T.invert(d, "newL", phi)
    checks(out)
    assert out.rule.name == "allR"
    assert logical_height(out) <= logical_height(d)


def test_invert_rejects_non_invertible_rules():
    with pytest.raises(T.TransformError):
        T.invert(hyp("x:delta ; p(x) |- p(x)"), "allL", F("p(x)"))


# ---------------------------------------------------------------- contraction

def test_contract_duplicated_side_formula():
    d = T.weaken(T.weaken(hyp("x:delta ; p(x) |- p(x)"), F("p(c)"), "left"), F("p(c)"), "left")
    out = T.contract(d, F("p(c)"), "left")
    checks(out)
    assert count(out.conclusion.left, F("p(c)")) == 1


def test_contract_fresh_quantifier():
    phi = F("new 'a:nu. r('a)")
    d = T.weaken(T.derive_hyp(parse_context(""), (), phi, ()), phi, "left")
    out = T.contract(d, phi, "left")
    checks(out)
    assert count(out.conclusion.left, phi) == 1
    assert logical_height(out) <= logical_height(d)


def test_contract_needs_two_copies():
    with pytest.raises(T.TransformError):
        T.contract(hyp("x:delta ; p(x) |- p(x)"), F("p(x)"), "left")


# ---------------------------------------------------------------- cut

def test_cut_with_atomic_hyp_on_the_left():
    d1 = hyp("x:delta ; p(x) |- p(x)")
    d2 = T.derive_hyp(parse_context("x:delta"), (F("p(x)"),), F("p(c) & p(c)"), ())
    out = T.cut_admissible(d1, d2, F("p(x)"))
    checks(out)
    assert cut_count(out) == 0
    assert out.conclusion.same(Sequent(d1.conclusion.ctx, d2.conclusion.left, d2.conclusion.right))


def test_principal_fresh_quantifier_cut():
    d = principal_new_cut(random.Random(SEED), MODES["classical"])
    stats = T.CutStats()
    out = T.cut_admissible(d.premises[0], d.premises[1], d.rule.principal, MODES["classical"], stats)
    checks(out, MODES["classical"])
    assert stats.cases["principal:New"] >= 1 and stats.measures_ok
    assert out.conclusion.same(d.conclusion)


def test_left_commuting_fresh_quantifier_cut():
    phi = F("new 'a:nu. r('a)")
    ctx = parse_context("x:delta")
    d1 = T.weaken(T.derive_hyp(ctx, (), phi, ()), F("p(x)"), "right")
    assert d1.rule.name == "newL"
    d2 = T.derive_hyp(ctx, (F("p(x)"),), F("p(c) & p(c)"), ())
    stats = T.CutStats()
    out = T.cut_admissible(d1, d2, F("p(x)"), CLASSICAL, stats)
    checks(out)
    assert stats.cases["left:newL"] >= 1


def test_cut_elimination_is_classical_only():
    d1 = hyp("x:delta ; p(x) |- p(x)")
    with pytest.raises(T.TransformError):
        T.cut_admissible(d1, d1, F("p(x)"), INTUITIONISTIC)


def test_eliminate_cuts_leaves_cut_free_input():
    d = cf4()
    assert T.eliminate_cuts(d, CUT) == d


def test_eliminate_one_hyp_cut():
    left = hyp("x:delta ; p(x) |- p(x)")
    d = node(left.conclusion, RuleApp("cut", principal=F("p(x)")), left, left)
    trace = []
    out = T.eliminate_cuts(d, CUT, trace)
    checks(out)
    assert cut_count(out) == 0 and len(trace) == 1


def test_eliminate_nested_golden_cuts():
    rows = [line.split("\t") for line in (GOLDEN / "MANIFEST.tsv").read_text().splitlines()[1:]]
    nested = [r[0] for r in rows if int(r[1]) >= 2]
    assert nested
    mode = MODES["classical"].with_cut()
    for name in nested[:3]:
        d = load_derivation((GOLDEN / name).read_text(encoding="utf-8"), mode.sig)
        trace = []
        out = T.eliminate_cuts(d, mode, trace)
        checks(out, MODES["classical"])
        assert len(trace) == cut_count(d)
        assert out.conclusion.same(d.conclusion)


# ---------------------------------------------------------------- every mode

@pytest.mark.parametrize("mode_name", ["intuitionistic", "single"])
def test_sweep_in_other_modes(mode_name):
    res = sweep(shared_corpus(mode_name, 200), MODES[mode_name])
    assert sum(res.applied.values()) > 1000
    assert not res.unsound, res.unsound[:3]
    assert not res.height_law, res.height_law[:3]

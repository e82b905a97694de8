from pathlib import Path

import pytest

from nomseq.calculus import (
    CLASSICAL, INTUITIONISTIC, NONLOGICAL_RULES, AxiomError, Logic, Mode, RuleApp, Sequent,
    axiom_instances, check_derivation, check_rule, cut_count, height, logical_height, node, nodes,
)
from nomseq.context import Context
from nomseq.generate import refutation_corpus
from nomseq.notation import parse_context, parse_formula, parse_sequent, parse_term
from nomseq.proofio import load_derivation
from nomseq.syntax import Bot, Eq, Fresh, NameSym, Swap, is_constraint

from support import MODES, SEED, shared_corpus

GOLDEN = Path(__file__).parent / "golden"
a, b = NameSym("a"), NameSym("b")


def hyp(text):
    seq = parse_sequent(text)
    return node(seq, RuleApp("hyp", principal=seq.right[0]))


# ---------------------------------------------------------------- single rules

def test_hyp_rule():
    d = hyp("x:delta ; p(x) |- p(x)")
    assert check_rule(CLASSICAL, d.conclusion, d.rule, []) is None


def test_new_right_checks_the_schema_only():
    phi = parse_formula("new 'a:nu. 'a # 'a")
    concl = Sequent(Context(), (), (phi,))
    prem = parse_sequent("# 'a:nu ; |- 'a # 'a")
    rule = RuleApp("newR", principal=phi, eigen="a")
    assert check_rule(CLASSICAL, concl, rule, [prem]) is None


def test_f4_instance_splits_into_two_premises():
    ctx = parse_context("# 'a:nu # 'b:nu")
    inst = axiom_instances("F4", {"a": a, "b": b}, ctx)
    concl = Sequent(ctx, (), (parse_formula("top"),))
    prems = [Sequent(ctx, (Fresh(a, b),), concl.right), Sequent(ctx, (Eq(a, b),), concl.right)]
    assert check_rule(CLASSICAL, concl, RuleApp("Ax", axiom=inst), prems) is None
    assert check_rule(CLASSICAL, concl, RuleApp("Ax", axiom=inst), prems[:1]) is not None


def test_rule_with_ill_formed_premise_is_rejected():
    concl = parse_sequent("x:delta ; |- p(x) | p(x)")
    prem = parse_sequent("x:delta ; |- p(x), p(z)")
    rule = RuleApp("orR", principal=concl.right[0])
    assert check_rule(CLASSICAL, concl, rule, [prem]) is not None


# ---------------------------------------------------------------- whole derivations

def test_single_hyp_measures():
    r = check_derivation(CLASSICAL, hyp("x:delta ; p(x) |- p(x)"))
    assert r.ok and r.height == 1 and r.logical_height == 1


def test_golden_fresh_name_derivation_checks():
    d = load_derivation((GOLDEN / "cf4_axiom.proof").read_text(encoding="utf-8"))
    r = check_derivation(CLASSICAL, d)
    assert r.ok
    assert height(d) == 5 and logical_height(d) == 3


def test_cut_needs_permission():
    left = hyp("x:delta ; p(x) |- p(x)")
    right = hyp("x:delta ; p(x) |- p(x)")
    phi = parse_formula("p(x)")
    d = node(parse_sequent("x:delta ; p(x) |- p(x)"), RuleApp("cut", principal=phi), left, right)
    r = check_derivation(CLASSICAL, d)
    assert not r.ok and r.violations[0][0] == ()
    assert check_derivation(CLASSICAL.with_cut(), d).ok
    assert cut_count(d) == 1


def test_single_conclusion_mode_rejects_two_succedents():
    d = hyp("x:delta ; p(x) |- p(x), p(c)")
    assert check_derivation(CLASSICAL, d).ok
    assert not check_derivation(Mode(Logic.SINGLE), d).ok


def test_checking_is_idempotent():
    for d in shared_corpus("classical", 50):
        first = check_derivation(MODES["classical"], d)
        assert first == check_derivation(MODES["classical"], d)


# ---------------------------------------------------------------- axiom schemes

def test_s3_instance():
    inst = axiom_instances("S3", {"a": a, "b": b})
    assert inst.premises == ()
    assert inst.conclusions == (Eq(Swap(a, b, a), b),)


def test_f2_needs_distinct_name_types():
    ctx = parse_context("# 'a:nu # 'b:nu")
    with pytest.raises(AxiomError):
        axiom_instances("F2", {"a": a, "b": b}, ctx)
    ok = axiom_instances("F2", {"a": a, "b": b}, parse_context("# 'a:nu # 'b:nu2"))
    assert ok.conclusions == (Fresh(a, b),)


def test_e3_with_freshness():
    a1, x = parse_term("'c"), parse_term("x")
    inst = axiom_instances("E3", {"a": a, "b": b, "p": "fresh", "args": (a1, x)})
    assert inst.premises == (Fresh(a1, x),)
    assert inst.conclusions == (Fresh(Swap(a, b, a1), Swap(a, b, x)),)


def test_unknown_axiom():
    with pytest.raises(AxiomError):
        axiom_instances("Z9", {})


# ---------------------------------------------------------------- modes and consistency

def test_classical_accepts_intuitionistic_derivations():
    for d in shared_corpus("intuitionistic", 200):
        assert check_derivation(MODES["intuitionistic"], d).ok
        assert check_derivation(MODES["classical"], d).ok


def test_intuitionistic_rejects_some_classical_derivations():
    rejected = sum(not check_derivation(MODES["intuitionistic"], d).ok
                   for d in shared_corpus("classical", 200))
    assert rejected > 0


def _refutes(d):
    s = d.conclusion
    return s.right == (Bot(),) and all(is_constraint(f) for f in s.left) and cut_count(d) == 0


def test_refutations_use_only_nonlogical_rules():
    refutations = refutation_corpus(SEED, 100, MODES["classical"])
    assert len(refutations) == 100
    for d in refutations:
        assert _refutes(d)
        assert {n.rule.name for n in nodes(d)} <= NONLOGICAL_RULES


def test_refutations_in_the_random_corpus_are_nonlogical():
    for d in shared_corpus("classical", 500):
        if _refutes(d):
            assert {n.rule.name for n in nodes(d)} <= NONLOGICAL_RULES


def test_intuitionistic_rejects_classical_implication():
    d = load_derivation((GOLDEN / "excluded_middle.proof").read_text(encoding="utf-8"))
    assert check_derivation(CLASSICAL, d).ok
    assert not check_derivation(INTUITIONISTIC, d).ok

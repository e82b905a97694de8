import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from nomseq.calculus import Sequent, nodes
from nomseq.context import Context, VarBind
from nomseq.generate import random_nl_formula
from nomseq.notation import (
    ParseError, parse_context, parse_formula, parse_sequent, parse_term, parse_type, show_context,
    show_formula, show_sequent, show_term, unicode_formula, unicode_sequent, unicode_term,
)
from nomseq.proofio import load_derivation
from nomseq.syntax import (
    Abs, AbsType, And, App, Atom, DataType, Imp, NameSym, NameType, New, Or, Swap, Var,
    rich_signature,
)
from nomseq.syntax import test_signature as small_signature
from nomseq.translate import to_nlseq

GOLDEN = Path(__file__).parent / "golden"
NU, DELTA = NameType("nu"), DataType("delta")
p_x = Atom("p", (Var("x"),))


def test_parse_fresh_quantifier():
    phi = parse_formula("new 'a:nu. 'a # x")
    assert isinstance(phi, New) and phi.sort == NU


def test_parse_sequent():
    s = parse_sequent("x:delta ; p(x) |- p(x)")
    assert s == Sequent(Context((VarBind("x", DELTA),)), (p_x,), (p_x,))


def test_parse_swap_term():
    t = parse_term("( 'a 'b ).f(x,'a)")
    assert t == Swap(NameSym("a"), NameSym("b"), App("f", (Var("x"), NameSym("a"))))


def test_parse_types():
    assert parse_type("[nu]delta") == AbsType(NU, DELTA)
    assert parse_term("<'a>x") == Abs(NameSym("a"), Var("x"))


def test_precedence():
    assert parse_formula("p(x) & p(c) | p(d)") == Or(And(p_x, Atom("p", (parse_term("c"),))),
                                                     Atom("p", (parse_term("d"),)))
    chain = parse_formula("p(x) => p(x) => p(x)")
    assert chain == Imp(p_x, Imp(p_x, p_x))
    q = parse_formula("forall x:delta. p(x) & p(x)")
    assert isinstance(q.body, And)


@pytest.mark.parametrize("text", ["p(x", "new a:nu 'a # x", "p(x) &", "forall x. p(x)", "'a # ", "top top"])
def test_parse_errors_carry_a_position(text):
    with pytest.raises(ParseError) as info:
        parse_formula(text)
    assert info.value.line == 1 and info.value.col >= 1


def test_keywords_are_not_terms():
    with pytest.raises(ParseError):
        parse_term("top")


def test_unicode_rendering():
    phi = parse_formula("forall x:delta. new 'a:nu. 'a # x")
    assert unicode_formula(phi) == "∀x:δ.∇ã:ν.ã # x"
    assert unicode_term(parse_term("('a 'b).<'a>x")) == "(ã b̃)·⟨ã⟩x"
    assert unicode_sequent(parse_sequent(". ; |- top")) == "·; ⇒ ⊤"


def test_show_context_round_trip():
    ctx = parse_context("x:delta # 'a:nu, y:delta # 'b:nu2")
    assert parse_context(show_context(ctx)) == ctx


@given(st.integers(0, 2**32))
def test_formula_printing_round_trips(seed):
    phi = to_nlseq(random_nl_formula(random.Random(seed), 5, rich_signature()))
    text = show_formula(phi)
    assert parse_formula(text) == phi
    assert show_formula(parse_formula(text)) == text


def test_print_parse_print_on_the_golden_corpus():
    sig = small_signature()
    for path in sorted(GOLDEN.glob("cut_*.proof")):
        d = load_derivation(path.read_text(encoding="utf-8"), sig)
        for n in nodes(d):
            text = show_sequent(n.conclusion)
            assert show_sequent(parse_sequent(text, sig)) == text
            for f in n.conclusion.left + n.conclusion.right:
                for t in getattr(f, "args", ()):
                    assert show_term(parse_term(show_term(t), sig)) == show_term(t)

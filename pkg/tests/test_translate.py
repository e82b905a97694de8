import random

import pytest
from hypothesis import given, strategies as st

from nomseq.calculus import CLASSICAL, INTUITIONISTIC, Logic, Mode, check_derivation, nodes
from nomseq.context import Context, FreshBind, VarBind, in_fresh_set
from nomseq.generate import random_nl_formula
from nomseq.notation import parse_context, parse_formula, show_formula
from nomseq.syntax import (
    App, Atom, DataType, Forall, Fresh, NameSym, NameType, New, NewVar, Var, alpha_eq,
    rich_signature,
)
from nomseq.translate import (
    NameVarBijection, QuantifierInstance, TranslateError, ctx_constraints, ctx_to_nl,
    default_quantifier_instances, derive_freshness_lemma, derive_nl_axiom,
    derive_quantifier_direction, nl_axioms, quantifier_formula, to_nl, to_nlseq,
)

NU, NU2, DELTA = NameType("nu"), NameType("nu2"), DataType("delta")
RICH = rich_signature()
x, y = Var("x"), Var("y")


def axiom(label, which="classical"):
    return next(ax for ax in nl_axioms(RICH, which) if ax.label == label)


# ---------------------------------------------------------------- the translations

def test_to_nlseq_examples():
    pab = NewVar("a", NU, NewVar("b", NU2, Atom("p", (Var("a"), Var("b")))))
    assert to_nlseq(pab) == New("a", NU, New("b", NU2, Atom("p", (NameSym("a"), NameSym("b")))))
    assert to_nlseq(Atom("p", (x,))) == Atom("p", (x,))
    phi = Forall("x", DELTA, NewVar("a", NU, Fresh(Var("a"), x)))
    assert to_nlseq(phi) == parse_formula("forall x:delta. new 'a:nu. 'a # x")


def test_to_nl_inverts_the_examples():
    for text in ["new 'a:nu. new 'b:nu2. q('a, c)", "p(x)", "forall x:delta. new 'a:nu. 'a # x"]:
        phi = parse_formula(text)
        assert to_nlseq(to_nl(phi)) == phi


def test_to_nl_with_explicit_map():
    phi = parse_formula("'a # x")
    assert to_nl(phi, {"n": "a"}) == Fresh(Var("n"), x)
    with pytest.raises(TranslateError):
        to_nl(parse_formula("'b # x"), {"n": "a"})


def test_to_nlseq_rejects_name_symbols():
    with pytest.raises(TranslateError):
        to_nlseq(parse_formula("'a # x"))


def test_bijection_round_trip():
    iota = NameVarBijection({"u": "a"}, auto=False)
    assert iota.var_for("a") == "u"
    assert iota.name_for("u") == "a"
    with pytest.raises(TranslateError):
        NameVarBijection({"u": "a", "v": "a"})


@given(st.integers(0, 2**32))
def test_round_trip_property(seed):
    phi = random_nl_formula(random.Random(seed), 5, RICH)
    assert alpha_eq(to_nl(to_nlseq(phi)), phi)


# ---------------------------------------------------------------- contexts

def test_ctx_constraints_examples():
    assert ctx_constraints(parse_context("x:delta # 'a:nu")) == (Fresh(Var("a"), x),)
    assert ctx_constraints(Context()) == ()
    got = ctx_constraints(parse_context("x:delta # 'a:nu, y:delta # 'b:nu2"))
    want = {Fresh(Var("a"), x), Fresh(Var("b"), x), Fresh(Var("b"), y), Fresh(Var("b"), Var("a"))}
    assert set(got) == want and len(got) == 4


def test_ctx_to_nl_turns_names_into_variables():
    out = ctx_to_nl(parse_context("x:delta # 'a:nu"))
    assert out.entries == (VarBind("x", DELTA), VarBind("a", NU))


def random_context(rng):
    entries = []
    for i in range(rng.randint(0, 5)):
        ident = f"{rng.choice('xyzabc')}{i}"
        if rng.random() < 0.5:
            entries.append(FreshBind(ident, rng.choice([NU, NU2])))
        else:
            entries.append(VarBind(ident, rng.choice([DELTA, NU])))
    return Context(tuple(entries))


def _as_term(ctx, ident):
    return NameSym(ident) if ctx.name_type(ident) else Var(ident)


@given(st.integers(0, 2**32))
def test_constraints_lie_in_the_fresh_set(seed):
    ctx = random_context(random.Random(seed))
    for c in ctx_constraints(ctx):
        assert in_fresh_set(ctx, c.name.name, _as_term(ctx, c.body.name))


@given(st.integers(0, 2**32))
def test_constraints_grow_by_one_fresh_name(seed):
    ctx = random_context(random.Random(seed))
    bigger = ctx.add_fresh("n9", NU)
    expected = set(ctx_constraints(ctx)) | {Fresh(Var("n9"), Var(w)) for w in ctx.ids()}
    assert set(ctx_constraints(bigger)) == expected


# ---------------------------------------------------------------- axioms

def test_axiom_instances_read_as_expected():
    assert show_formula(axiom("CS3[nu]").formula) == "forall a:nu. forall a1:nu. (a a1).a = a1"
    assert show_formula(axiom("IF2[nu]", "intuitionistic").formula) == "forall a:nu. a # a => bot"
    q = quantifier_formula(QuantifierInstance("a", NU, Atom("q", (Var("a"), x)), (("x", DELTA),)))
    new_side, exists_side = "(new a:nu. q(a,x))", "(exists a:nu. a # x & q(a,x))"
    assert show_formula(q) == (f"forall x:delta. ({new_side} => {exists_side}) & "
                               f"({exists_side} => {new_side})")


def test_axiom_derivations_for_examples():
    for label in ("CF4[nu;delta]", "CS1[nu,delta]", "CA1[nu,delta]"):
        ax = axiom(label)
        d = derive_nl_axiom(ax, Mode(Logic.CLASSICAL, False, RICH))
        assert check_derivation(CLASSICAL, d).ok, label
        assert d.conclusion.right == (to_nlseq(ax.formula),)


def test_quantifier_instance_directions():
    for q in default_quantifier_instances(RICH):
        forward = derive_quantifier_direction(q, "forward")
        reverse = derive_quantifier_direction(q, "reverse")
        assert check_derivation(CLASSICAL, forward).ok
        assert check_derivation(CLASSICAL, reverse).ok
        assert "newL" in {n.rule.name for n in nodes(forward)}


def test_quantifier_instance_rejects_stray_variables():
    q = QuantifierInstance("a", NU, Atom("q", (Var("a"), y)), (("x", DELTA),))
    with pytest.raises(TranslateError):
        quantifier_formula(q)


def test_intuitionistic_set_checks_intuitionistically():
    mode = Mode(Logic.INTUITIONISTIC, False, RICH)
    for ax in nl_axioms(RICH, "intuitionistic"):
        if ax.scheme in ("IF2", "IF3", "IF4", "IF5"):
            assert check_derivation(INTUITIONISTIC, derive_nl_axiom(ax, mode)).ok, ax.label


def test_unknown_axiom_set():
    with pytest.raises(TranslateError):
        nl_axioms(RICH, "linear")


# ---------------------------------------------------------------- freshness lemmas

XS = (("x1", DELTA), ("x2", DELTA))


def test_freshness_propagates_through_function_symbols():
    d = derive_freshness_lemma(App("f", (Var("x1"), Var("x2"))), NU, XS)
    assert check_derivation(CLASSICAL, d).ok


def test_freshness_of_a_listed_variable():
    d = derive_freshness_lemma(Var("x1"), NU, XS)
    assert check_derivation(CLASSICAL, d).ok


def test_freshness_lemma_rejects_name_symbols():
    with pytest.raises(TranslateError):
        derive_freshness_lemma(App("g", (NameSym("b"), Var("x1"))), NU, XS)


def test_fresh_quantifier_readings_agree():
    phi = Atom("q", (Var("a"), Var("x1")))
    d = derive_freshness_lemma(phi, NU, XS)
    assert check_derivation(CLASSICAL, d).ok

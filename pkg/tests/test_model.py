import random

import pytest
from hypothesis import given, strategies as st

from nomseq.calculus import AXIOM_PARAMS
from nomseq.context import Context, in_fresh_set
from nomseq.generate import Generator, alpha_variant, random_ground_term
from nomseq.model import (
    Interpretation, ModelError, ground_eq, ground_fresh, ground_swap, ground_terms, interpret,
    sat_search, satisfies, satisfies_ctx, search_nonlogical, term_model_names, validate_scheme,
)
from nomseq.notation import parse_context, parse_formula, parse_sequent, parse_term
from nomseq.syntax import (
    Abs, App, Const, DataType, Eq, Fresh, NameSym, NameType, Var, rich_signature,
)
from nomseq.translate import default_types

a, b, c_ = NameSym("a"), NameSym("b"), NameSym("c")
c = Const("c")
x = Var("x")
NU = NameType("nu")
RICH = rich_signature()
NAMES = term_model_names(3, RICH)


def f(*args):
    return App("f", args)


def random_term(rng, depth=4):
    return random_ground_term(rng, rng.choice(default_types(RICH)), depth, NAMES, RICH)


# ---------------------------------------------------------------- ground operations

def test_ground_swap_examples():
    assert ground_swap(a, b, a) == b
    assert ground_swap(a, b, c) == c
    assert ground_swap(a, b, Abs(c_, f(a, b))) == Abs(c_, f(b, a))


def test_ground_fresh_examples():
    assert ground_fresh(a, Abs(a, a))
    assert not ground_fresh(a, a)
    assert not ground_fresh(a, f(c, Abs(b, a)))


def test_ground_eq_examples():
    assert ground_eq(Abs(a, a), Abs(b, b))
    assert ground_eq(a, a)
    assert not ground_eq(Abs(a, b), Abs(b, a))


def test_interpret_examples():
    assert interpret({"x": c}, parse_term("('a 'b).x")) == c
    assert interpret({}, Abs(a, c)) == Abs(a, c)
    assert interpret({"x": a}, parse_term("('a 'b).x")) == b


def test_satisfies_examples():
    assert satisfies({"x": c}, Fresh(a, x))
    assert not satisfies({}, Fresh(a, a))
    assert not satisfies({"x": a}, [Fresh(a, x), Eq(x, x)])


def test_satisfies_ctx_examples():
    assert satisfies_ctx({"x": c}, parse_context("x:delta # 'a:nu"))
    assert not satisfies_ctx({"x": a}, parse_context("x:nu # 'a:nu"))
    assert satisfies_ctx({}, Context())


def test_sat_search_examples():
    assert sat_search(Context(), [Eq(a, a)], 1, 0) == Interpretation()
    vars_ab = parse_context("a:nu, b:nu")
    for depth in (0, 2):
        for extra in (0, 2):
            assert sat_search(vars_ab, [parse_formula("a # a")], depth, extra) is None
    assert sat_search(parse_context("x:nu # 'a:nu"), [parse_formula("'a = x")], 2, 1) is None


def test_sat_search_finds_a_witness():
    theta = sat_search(parse_context("x:nu, y:nu"), [parse_formula("x # y")], 1, 2)
    assert theta is not None
    assert satisfies(theta, parse_formula("x # y"))


def test_sat_search_rejects_logical_formulas():
    with pytest.raises(ModelError):
        sat_search(Context(), [parse_formula("p(c)")], 1, 0)


def test_ground_terms_are_ordered_by_height():
    terms = ground_terms(DataType("delta"), 1, {"a0": NU})
    assert terms[:2] == [Const("c"), Const("d")]
    assert len(set(terms)) == len(terms)


def test_search_nonlogical_finds_a_small_refutation():
    seq = parse_sequent("# 'a:nu ; 'a # 'a |- bot")
    d = search_nonlogical(seq, 2)
    assert d is not None


# ---------------------------------------------------------------- algebra

@given(st.integers(0, 2**32))
def test_swap_is_an_involution(seed):
    rng = random.Random(seed)
    t = random_term(rng, 5)
    n1, n2 = NameSym(rng.choice(["a0", "a1", "a2"])), NameSym(rng.choice(["a0", "a1", "a2"]))
    assert ground_swap(n1, n2, ground_swap(n1, n2, t)) == t
    assert ground_swap(n1, n1, t) == t


@given(st.integers(0, 2**32))
def test_equality_and_freshness_are_equivariant(seed):
    rng = random.Random(seed)
    t = random_term(rng, 5)
    u = alpha_variant(rng, t, NAMES)
    n1, n2 = NameSym(rng.choice(["b0", "b1"])), NameSym(rng.choice(["b0", "b2"]))
    m = NameSym(rng.choice(sorted(NAMES)))
    assert ground_eq(t, u)
    assert ground_eq(ground_swap(n1, n2, t), ground_swap(n1, n2, u))
    assert ground_fresh(m, t) == ground_fresh(ground_swap(n1, n2, m), ground_swap(n1, n2, t))


@given(st.integers(0, 2**32))
def test_abstraction_equality_inverts(seed):
    rng = random.Random(seed)
    body = random_ground_term(rng, DataType("delta"), 3, NAMES, RICH)
    n1 = NameSym(rng.choice(["a0", "a1", "a2"]))
    left = Abs(n1, body)
    right = alpha_variant(rng, left, NAMES) if rng.random() < 0.7 else \
        Abs(NameSym(rng.choice(["a0", "a1", "a2"])), random_ground_term(rng, DataType("delta"), 3, NAMES, RICH))
    if not ground_eq(left, right):
        return
    n2, u = right.name, right.body
    if n1 == n2:
        assert ground_eq(body, u)
    else:
        assert ground_fresh(n1, u) and ground_eq(body, ground_swap(n1, n2, u))


SIGMA = parse_context("x:delta # 'a:nu, n:nu, y:delta # 'b:nu")


@given(st.integers(0, 2**32))
def test_context_freshness_holds_under_satisfying_interpretations(seed):
    rng = random.Random(seed)
    theta = {
        "x": random_ground_term(rng, DataType("delta"), 3, {"a": NU, "b": NU, "e": NU}, RICH),
        "n": NameSym(rng.choice(["a", "b", "e"])),
        "y": random_ground_term(rng, DataType("delta"), 3, {"a": NU, "b": NU, "e": NU}, RICH),
    }
    if not satisfies_ctx(theta, SIGMA, RICH):
        return
    gen = Generator(rng)
    for _ in range(5):
        t = gen.term(SIGMA, rng.choice([DataType("delta"), NU]), 3)
        for name in ("a", "b"):
            if t is not None and in_fresh_set(SIGMA, name, t):
                assert satisfies(theta, Fresh(NameSym(name), t))


# ---------------------------------------------------------------- axiom validity

@pytest.mark.parametrize("axiom", sorted(set(AXIOM_PARAMS) - {"E2", "E3", "A1"}))
def test_small_schemes_hold_at_depth_two(axiom):
    n, cex = validate_scheme(axiom, depth=2, per_type=2, sig=RICH)
    assert n > 0 and cex is None

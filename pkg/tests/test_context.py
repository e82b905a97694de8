import itertools
import random

import pytest
from hypothesis import given, strategies as st

from nomseq.context import (
    Context, FreshBind, TypeError_, VarBind, check_context, ctx_leq, in_fresh_set, typecheck_formula,
    typecheck_term,
)
from nomseq.generate import Generator
from nomseq.notation import parse_context, parse_formula, parse_term
from nomseq.syntax import AbsType, DataType, Fresh, NameSym, NameType, Var, subst

NU, NU2, DELTA = NameType("nu"), NameType("nu2"), DataType("delta")
SIGMA = parse_context("x:delta # 'a:nu, y:delta # 'b:nu2")


def test_context_syntax_round_trip():
    assert SIGMA.entries == (VarBind("x", DELTA), FreshBind("a", NU), VarBind("y", DELTA),
                             FreshBind("b", NU2))


@pytest.mark.parametrize("name, term, expected", [
    ("a", "x", True),
    ("b", "f(x,y)", True),
    ("b", "'a", True),
    ("a", "y", False),
    ("a", "'a", False),
    ("a", "c", True),
])
def test_in_fresh_set(name, term, expected):
    assert in_fresh_set(SIGMA, name, parse_term(term)) is expected


def test_ctx_leq_examples():
    assert ctx_leq(parse_context("# 'a:nu, x:delta"), parse_context("x:delta # 'a:nu, y:delta"))
    assert ctx_leq(SIGMA, SIGMA)
    assert not ctx_leq(parse_context("x:delta # 'a:nu"), parse_context("# 'a:nu, x:delta"))


def test_ctx_leq_weakening_on_the_right():
    assert ctx_leq(SIGMA, SIGMA.add_var("z", DELTA))
    assert ctx_leq(SIGMA, SIGMA.add_fresh("c", NU))


def test_typecheck_term_examples():
    assert typecheck_term(parse_context("x:delta"), parse_term("f(x,x)")) == DELTA
    assert typecheck_term(parse_context("# 'a:nu, x:delta"), parse_term("<'a>x")) == AbsType(NU, DELTA)
    with pytest.raises(TypeError_):
        typecheck_term(Context(), parse_term("('a 'b).c"))


def test_typecheck_formula_examples():
    assert typecheck_formula(Context(), parse_formula("new 'a:nu. 'a # 'a"))
    with pytest.raises(TypeError_):
        typecheck_formula(parse_context("x:delta"), parse_formula("x # x"))
    assert typecheck_formula(Context(), parse_formula("forall x:delta. new 'a:nu. 'a # x"))


def test_check_context_rejects_duplicates():
    with pytest.raises(TypeError_):
        check_context(parse_context("x:delta, x:delta"))


def test_in_fresh_set_implies_well_typed_freshness():
    terms = ["x", "y", "'a", "'b", "c", "f(x,y)", "g('a,x)", "<'a>x"]
    for name, term in itertools.product(["a", "b"], terms):
        t = parse_term(term)
        if in_fresh_set(SIGMA, name, t):
            assert typecheck_formula(SIGMA, Fresh(NameSym(name), t))


# ---------------------------------------------------------------- the order on contexts

def small_contexts():
    """Every context over x:delta, y:delta, a:nu, b:nu using each id at most once."""
    entries = [VarBind("x", DELTA), VarBind("y", DELTA), FreshBind("a", NU), FreshBind("b", NU),
               VarBind("a", NU)]
    seen = set()
    for k in range(4):
        for combo in itertools.permutations(entries, k):
            ids = [e.var if isinstance(e, VarBind) else e.name for e in combo]
            if len(set(ids)) == len(ids) and combo not in seen:
                seen.add(combo)
                yield Context(combo)


def reference_leq(weak: Context, strong: Context) -> bool:
    """Typing facts included, and every freshness fact of weak present in strong."""
    for e in weak.entries:
        if isinstance(e, VarBind) and strong.var_type(e.var) != e.sort:
            return False
        if isinstance(e, FreshBind) and strong.name_type(e.name) != e.sort:
            return False
    for i, e in enumerate(weak.entries):
        if not isinstance(e, FreshBind):
            continue
        if not in_fresh_set(strong, e.name, parse_term("c")):
            return False
        for prior in weak.entries[:i]:
            t = Var(prior.var) if isinstance(prior, VarBind) else NameSym(prior.name)
            if not in_fresh_set(strong, e.name, t):
                return False
    return True


def test_ctx_leq_agrees_with_the_set_definition():
    contexts = list(small_contexts())
    assert len(contexts) > 50
    for weak, strong in itertools.product(contexts, repeat=2):
        assert ctx_leq(weak, strong) == reference_leq(weak, strong), (weak, strong)


def test_ctx_leq_is_a_preorder():
    contexts = list(small_contexts())
    for s in contexts:
        assert ctx_leq(s, s)
    rng = random.Random(3)
    for _ in range(3000):
        s1, s2, s3 = (rng.choice(contexts) for _ in range(3))
        if ctx_leq(s1, s2) and ctx_leq(s2, s3):
            assert ctx_leq(s1, s3)


# ---------------------------------------------------------------- typing lemmas

BASE = parse_context("x:delta # 'a:nu, n:nu, y:delta # 'b:nu")


@given(st.integers(0, 2**32))
def test_term_weakening(seed):
    rng = random.Random(seed)
    gen = Generator(rng)
    ty = rng.choice([DELTA, NU, AbsType(NU, DELTA)])
    t = gen.term(BASE, ty, rng.randint(0, 4))
    if t is None:
        return
    bigger = Context((VarBind("w", DELTA),) + BASE.entries).add_fresh("d", NU).add_var("z", NU)
    assert ctx_leq(BASE, bigger)
    assert typecheck_term(BASE, t) == typecheck_term(bigger, t) == ty


@given(st.integers(0, 2**32))
def test_term_substitution_preserves_types(seed):
    rng = random.Random(seed)
    gen = Generator(rng)
    ty = rng.choice([DELTA, NU, AbsType(NU, DELTA)])
    t = gen.term(BASE, ty, rng.randint(0, 4))
    if t is None:
        return
    prefix = Context(BASE.entries[:BASE.position("y")])
    u = gen.term(prefix, DELTA, rng.randint(0, 3))
    out = subst(t, Var("y"), u)
    assert typecheck_term(BASE.without("y"), out) == ty

import random

from nomseq.calculus import check_derivation, cut_count, nodes, size
from nomseq.generate import (
    corpus, cut_corpus, enumerate_formulas, random_ground_term, random_nl_formula,
)
from nomseq.model import is_ground, term_model_names
from nomseq.proofio import dump_derivation
from nomseq.syntax import DataType, NewVar, formula_depth, rich_signature

from support import MODES

RICH = rich_signature()


def test_corpus_is_deterministic_in_the_seed():
    one = [dump_derivation(d) for d in corpus(11, 20, MODES["classical"])]
    two = [dump_derivation(d) for d in corpus(11, 20, MODES["classical"])]
    assert one == two
    assert one != [dump_derivation(d) for d in corpus(12, 20, MODES["classical"])]


def test_corpus_members_check():
    for name, mode in MODES.items():
        for d in corpus(5, 30, mode):
            assert check_derivation(mode, d).ok, name


def test_cut_corpus_shape():
    ds = cut_corpus(3, 8, mode=MODES["classical"])
    assert len(ds) == 8
    for d in ds[:3]:
        assert d.rule.name == "cut" and type(d.rule.principal).__name__ == "New"
    for d in ds:
        assert 1 <= cut_count(d) <= 3
        assert check_derivation(MODES["classical"].with_cut(), d).ok


def test_enumeration_counts():
    # 1 leaf; then leaf + 3 binary squares + 3 quantifiers over the previous level
    counts = [sum(1 for _ in enumerate_formulas(k)) for k in range(3)]
    assert counts == [1, 7, 169]


def test_random_ground_terms_are_ground_and_bounded():
    rng = random.Random(1)
    names = term_model_names(2, RICH)
    for _ in range(500):
        t = random_ground_term(rng, DataType("delta"), 4, names, RICH)
        assert is_ground(t)


def test_random_nl_formulas_use_variable_binders():
    rng = random.Random(2)
    phis = [random_nl_formula(rng, 5, RICH) for _ in range(200)]
    assert all(formula_depth(p) <= 5 for p in phis)
    assert any(isinstance(n, NewVar) for p in phis for n in _subformulas(p))


def _subformulas(phi):
    yield phi
    for attr in ("left", "right", "body"):
        sub = getattr(phi, attr, None)
        if sub is not None and hasattr(sub, "__dataclass_fields__") and not _is_term(sub):
            yield from _subformulas(sub)


def _is_term(x):
    return type(x).__name__ in ("Var", "NameSym", "Const", "App", "Swap", "Abs")


def test_nodes_visits_every_node():
    for d in corpus(4, 10, MODES["classical"]):
        assert sum(1 for _ in nodes(d)) == size(d)

from pathlib import Path

import pytest

from nomseq.calculus import check_derivation
from nomseq.proofio import (
    ProofFormatError, Str, dump_derivation, load_derivation, read_sexp, write_sexp,
)
from nomseq.syntax import test_signature as small_signature

from support import MODES, shared_corpus

GOLDEN = Path(__file__).parent / "golden"


def test_sexp_round_trip():
    tree = ["rule", "hyp", ["concl", Str("x:delta ; p(x) |- p(x)")], ["data"]]
    assert read_sexp(write_sexp(tree)) == tree


@pytest.mark.parametrize("mode_name", ["classical", "intuitionistic", "single"])
def test_derivations_survive_dump_and_load(mode_name):
    sig = MODES[mode_name].sig
    for d in shared_corpus(mode_name, 100):
        text = dump_derivation(d)
        back = load_derivation(text, sig)
        assert check_derivation(MODES[mode_name], back).ok
        assert dump_derivation(back) == text


def test_golden_files_are_in_normal_form():
    sig = small_signature()
    for path in sorted(GOLDEN.glob("cut_*.proof")):
        text = path.read_text(encoding="utf-8")
        assert dump_derivation(load_derivation(text, sig)) == text


@pytest.mark.parametrize("text", [
    "",
    "(rule",
    "(rule hyp)",
    '(rule nosuch (concl ". ; |- top"))',
    '(rule hyp (concl "x:delta ; p(x) |- p(x)") (data (principal "p(x")))',
    '(rule hyp (concl ". ; |- top")) extra',
])
def test_malformed_files_are_rejected(text):
    with pytest.raises(ProofFormatError):
        load_derivation(text)

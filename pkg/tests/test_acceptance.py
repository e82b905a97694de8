"""One test per acceptance criterion; each prints a PASS/FAIL line (run with -s to see them)."""

import random
import time
from pathlib import Path

import pytest

from nomseq import transform as T
from nomseq.calculus import (
    AXIOM_PARAMS, CLASSICAL, Logic, Mode, Sequent, check_derivation, cut_count, fkey, nodes,
)
from nomseq.context import Context, VarBind, typecheck_formula
from nomseq.generate import (
    alpha_variant, enumerate_formulas, random_ground_term, random_nl_formula, refutation_corpus,
)
from nomseq.model import (
    ground_eq, ground_fresh, ground_swap, sat_search, search_nonlogical, term_model_names,
    validate_scheme,
)
from nomseq.notation import unicode_formula
from nomseq.proofio import load_derivation
from nomseq.syntax import (
    Atom, Bot, DataType, NameSym, NameType, NewVar, Signature, Var, alpha_eq, rich_signature,
)
from nomseq.translate import (
    default_quantifier_instances, default_types, derive_nl_axiom, derive_quantifier_direction,
    nl_axioms, to_nl, to_nlseq,
)

from support import MODES, SEED, SIG, report, shared_corpus, sweep

GOLDEN = Path(__file__).parent / "golden"
RICH = rich_signature()


@pytest.fixture(scope="module")
def classical_sweep():
    corpus = shared_corpus("classical", 500)
    start = time.perf_counter()
    res = sweep(corpus, MODES["classical"])
    return corpus, res, time.perf_counter() - start


def test_criterion_01_transform_soundness(classical_sweep):
    corpus, res, elapsed = classical_sweep
    wanted = {"weaken", "weaken_ctx", "subst_derivation", "ev_transform", "invert", "contract",
              "derive_hyp"}
    ok = (len(corpus) >= 500 and not res.unsound and wanted <= set(res.applied)
          and elapsed < 60)
    report(1, "transformations sound on the random corpus", ok,
           f"{len(corpus)} derivations, {sum(res.applied.values())} outputs, "
           f"{len(res.unsound)} unsound, {elapsed:.1f}s")
    assert len(corpus) >= 500
    assert wanted <= set(res.applied), res.applied
    assert not res.unsound, res.unsound[:3]
    assert elapsed < 60


def test_criterion_02_height_laws(classical_sweep):
    _, res, _ = classical_sweep
    ok = not res.height_law
    report(2, "height and logical-height laws", ok, f"{len(res.height_law)} violations")
    assert not res.height_law, res.height_law[:3]


def golden_proofs():
    return sorted(GOLDEN.glob("cut_*.proof"))


def test_criterion_03_golden_cut_elimination():
    start = time.perf_counter()
    mode = Mode(Logic.CLASSICAL, True, SIG)
    strict = Mode(Logic.CLASSICAL, False, SIG)
    failures, principal_new = [], 0
    files = golden_proofs()
    for path in files:
        d = load_derivation(path.read_text(encoding="utf-8"), SIG)
        if not 1 <= cut_count(d) <= 3 or not check_derivation(mode, d).ok:
            failures.append((path.name, "malformed input"))
            continue
        stats = T.CutStats()
        out = T.eliminate_cuts(d, mode, None, stats)
        principal_new += stats.cases["principal:New"] > 0
        if cut_count(out) or not check_derivation(strict, out).ok:
            failures.append((path.name, "not cut-free or does not check"))
        elif not out.conclusion.same(d.conclusion):
            failures.append((path.name, "conclusion changed"))
        elif not stats.measures_ok:
            failures.append((path.name, "measure increased"))
    elapsed = time.perf_counter() - start
    ok = len(files) >= 30 and not failures and principal_new > 0 and elapsed < 30
    report(3, "golden cut corpus eliminates", ok,
           f"{len(files)} proofs, {principal_new} with a principal new cut, {elapsed:.2f}s")
    assert len(files) >= 30
    assert not failures, failures
    assert principal_new > 0
    assert elapsed < 30


@pytest.mark.slow
def test_criterion_04_hyp_completeness():
    mode = Mode(Logic.CLASSICAL, False, SIG)
    ctx = Context((VarBind("x", DataType("delta")),))
    failures, n = [], 0
    for phi in enumerate_formulas(3):
        n += 1
        d = T.derive_hyp(ctx, (), phi, (), mode)
        if not check_derivation(mode, d).ok or not d.conclusion.same(Sequent(ctx, (phi,), (phi,))):
            failures.append(phi)
    report(4, "hyp* for every formula of connective depth <= 3", not failures,
           f"{n} formulas, {len(failures)} failures")
    assert n > 80000
    assert not failures, failures[:3]


def test_criterion_05_term_model_validity():
    start = time.perf_counter()
    total, bad = 0, {}
    for axiom in AXIOM_PARAMS:
        n, cex = validate_scheme(axiom, depth=3, per_type=3, sig=RICH)
        total += n
        if cex is not None:
            bad[axiom] = cex
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    report(5, "every axiom scheme holds in the term model", ok,
           f"{len(AXIOM_PARAMS)} schemes, {total} ground instances, {elapsed:.1f}s")
    assert not bad, bad
    assert elapsed < 120


def test_criterion_06_model_algebra():
    rng = random.Random(SEED)
    names = term_model_names(3, RICH)
    by_type = {}
    for n, ty in names.items():
        by_type.setdefault(ty, []).append(NameSym(n))
    types = default_types(RICH)
    failures = []
    for _ in range(10_000):
        ty = rng.choice(types)
        t = random_ground_term(rng, ty, 5, names, RICH)
        u = alpha_variant(rng, t, names)
        w = alpha_variant(rng, u, names)
        nt = rng.choice(sorted(by_type, key=lambda ty: ty.name))
        a, b = rng.choice(by_type[nt]), rng.choice(by_type[nt])
        c = rng.choice([x for xs in by_type.values() for x in xs])
        checks = {
            "involution": ground_swap(a, b, ground_swap(a, b, t)) == t,
            "S1": ground_eq(ground_swap(a, a, t), t),
            "reflexive": ground_eq(t, t),
            "symmetric": ground_eq(t, u) and ground_eq(u, t),
            "transitive": ground_eq(t, w),
            "eq-equivariant": ground_eq(ground_swap(a, b, t), ground_swap(a, b, u)),
            "fresh-equivariant": ground_fresh(c, t) == ground_fresh(ground_swap(a, b, c), ground_swap(a, b, t)),
            "fresh-respects-eq": ground_fresh(c, t) == ground_fresh(c, u),
        }
        failures += [(k, t) for k, v in checks.items() if not v]
    report(6, "swapping, equality and freshness on ground terms", not failures,
           f"10000 terms, {len(failures)} failures")
    assert not failures, failures[:3]


def test_criterion_07_partial_consistency():
    refutations = refutation_corpus(SEED, 200, MODES["classical"])
    witnessed = []
    for d in refutations:
        s = d.conclusion
        if sat_search(s.ctx, s.left, 3, 2, SIG) is not None:
            witnessed.append(s)
    empty = search_nonlogical(Sequent(Context(), (), (Bot(),)), 4, SIG)
    ok = len(refutations) == 200 and not witnessed and empty is None
    report(7, "refutable constraint sets have no model; the empty sequent has no refutation", ok,
           f"{len(refutations)} refutations, {len(witnessed)} with a witness")
    assert len(refutations) == 200
    assert not witnessed, witnessed[:3]
    assert empty is None


def test_criterion_08_axiom_derivations():
    problems = []
    for which, logic in (("classical", Logic.CLASSICAL), ("intuitionistic", Logic.INTUITIONISTIC)):
        mode = Mode(logic, False, RICH)
        for ax in nl_axioms(RICH, which):
            d = derive_nl_axiom(ax, mode)
            r = check_derivation(mode, d)
            if not r.ok or d.conclusion.left or d.conclusion.right != (to_nlseq(ax.formula),):
                problems.append(ax.label)
    qs = default_quantifier_instances(RICH)
    for q in qs:
        for direction in ("forward", "reverse"):
            if not check_derivation(CLASSICAL, derive_quantifier_direction(q, direction)).ok:
                problems.append(f"quantifier {direction}")
    ok = not problems and len(qs) == 3
    report(8, "every axiom instance derives in its calculus", ok, f"{len(problems)} failures")
    assert len(qs) == 3
    assert not problems, problems


def test_criterion_09_translation():
    rng = random.Random(SEED)
    bad = []
    for _ in range(1000):
        phi = random_nl_formula(rng, 5, RICH)
        back = to_nl(to_nlseq(phi))
        if not alpha_eq(back, phi):
            bad.append(phi)
    nu, nu2 = NameType("nu"), NameType("nu2")
    sig = Signature(name_types={"nu", "nu2"}, relations={"p": (nu, nu2)})
    phi = NewVar("a", nu, NewVar("b", nu2, Atom("p", (Var("a"), Var("b")))))
    shown = unicode_formula(to_nlseq(phi))
    ok = not bad and shown == "∇ã:ν.∇b̃:ν′.p(ã,b̃)"
    report(9, "translations are mutually inverse", ok, f"1000 formulas, {len(bad)} failures; {shown}")
    typecheck_formula(Context(), phi, sig)
    assert not bad, bad[:3]
    assert shown == "∇ã:ν.∇b̃:ν′.p(ã,b̃)"


def _derive(label, which):
    ax = next(a for a in nl_axioms(RICH, which) if a.label == label)
    return derive_nl_axiom(ax, Mode(Logic.CLASSICAL if which == "classical" else Logic.INTUITIONISTIC,
                                    False, RICH))


def _uses_f4(d):
    return any(n.rule.name == "Ax" and n.rule.axiom.axiom == "F4" for n in nodes(d))


def test_criterion_10_mode_separation():
    classical = Mode(Logic.CLASSICAL, False, RICH)
    intuitionistic = Mode(Logic.INTUITIONISTIC, False, RICH)
    cf2 = _derive("CF2[nu]", "classical")
    if3 = _derive("IF3[nu]", "intuitionistic")
    em = load_derivation((GOLDEN / "excluded_middle.proof").read_text(encoding="utf-8"), RICH)
    results = {
        "CF2 classical": check_derivation(classical, cf2).ok,
        "CF2 not intuitionistic": not check_derivation(intuitionistic, cf2).ok,
        "CF2 uses F4": _uses_f4(cf2),
        "IF3 intuitionistic": check_derivation(intuitionistic, if3).ok,
        "IF3 uses F4": _uses_f4(if3),
        "LEM classical": check_derivation(classical, em).ok,
        "LEM not intuitionistic": not check_derivation(intuitionistic, em).ok,
    }
    failed = [k for k, v in results.items() if not v]
    report(10, "classical and intuitionistic modes separate", not failed,
           "all checks hold" if not failed else ", ".join(failed))
    assert not failed
    assert fkey(cf2.conclusion.right[0]) == fkey(to_nlseq(
        next(a for a in nl_axioms(RICH, "classical") if a.label == "CF2[nu]").formula))

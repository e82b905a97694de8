"""Derive every nominal logic axiom instance and report which calculus accepts it.

Classical instances are checked in the classical calculus and, for
comparison, in the intuitionistic one; the intuitionistic set is checked
intuitionistically.  Run from anywhere:

    python3 demos/axioms_in_both_logics.py
"""

from collections import Counter

from nomseq.calculus import Logic, Mode, check_derivation
from nomseq.syntax import rich_signature
from nomseq.translate import derive_nl_axiom, nl_axioms


def main():
    sig = rich_signature()
    classical = Mode(Logic.CLASSICAL, False, sig)
    intuitionistic = Mode(Logic.INTUITIONISTIC, False, sig)

    by_scheme = Counter()
    classical_only = []
    for ax in nl_axioms(sig, "classical"):
        d = derive_nl_axiom(ax, classical)
        assert check_derivation(classical, d).ok, ax.label
        by_scheme[ax.scheme] += 1
        if not check_derivation(intuitionistic, d).ok:
            classical_only.append(ax.label)
    print("classical instances:", ", ".join(f"{k} x{v}" for k, v in sorted(by_scheme.items())))
    print("derivations needing classical reasoning:", ", ".join(classical_only) or "none")

    ok = sum(check_derivation(intuitionistic, derive_nl_axiom(ax, intuitionistic)).ok
             for ax in nl_axioms(sig, "intuitionistic"))
    print(f"intuitionistic instances checked: {ok}/{len(nl_axioms(sig, 'intuitionistic'))}")


if __name__ == "__main__":
    main()

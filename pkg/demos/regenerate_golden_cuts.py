"""Rewrite tests/golden/: 36 proofs with 1-3 cuts and a manifest of their shape.

The corpus is deterministic in the seed, so rerunning this should leave the
files unchanged.  Run from the repository root:

    python3 demos/regenerate_golden_cuts.py
"""

import sys
from pathlib import Path

from nomseq.calculus import cut_count, height, logical_height, size
from nomseq.generate import cut_corpus
from nomseq.proofio import dump_derivation

SEED = 2026
COUNT = 36


def main(out_dir="tests/golden"):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["# name\tcuts\tnodes\theight\tlogical_height\troot_cut_formula"]
    for i, d in enumerate(cut_corpus(SEED, COUNT)):
        name = f"cut_{i:02d}.proof"
        (out / name).write_text(dump_derivation(d), encoding="utf-8")
        kind = type(d.rule.principal).__name__ if d.rule.name == "cut" else "-"
        rows.append(f"{name}\t{cut_count(d)}\t{size(d)}\t{height(d)}\t{logical_height(d)}\t{kind}")
    (out / "MANIFEST.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {COUNT} proofs to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])

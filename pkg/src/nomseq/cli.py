"""Command-line front end: check, cutelim, translate, sat, axioms, typecheck.

Reports are line-oriented "key: value" text.  Exit codes: 0 success,
1 logical failure (violations, no witness, ill-typed), 2 usage, parse or
I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .calculus import Logic, Mode, check_derivation, cut_count, height, logical_height, size
from .context import TypeError_, check_context, typecheck_formula
from .model import ModelError, sat_search
from .notation import (
    ParseError, parse_context, parse_formula, show_formula, show_term, unicode_formula,
    unicode_sequent, unicode_term,
)
from .proofio import ProofFormatError, dump_derivation, load_derivation
from .syntax import SyntaxError_, rich_signature, test_signature
from .transform import CutStats, TransformError, eliminate_cuts
from .translate import (
    TranslateError, derive_nl_axiom, nl_axioms, to_nl, to_nlseq,
)

OK, FAIL, USAGE = 0, 1, 2

SIGNATURES = {"rich": rich_signature, "test": test_signature}
LOGICS = {"classical": Logic.CLASSICAL, "intuitionistic": Logic.INTUITIONISTIC,
          "single": Logic.SINGLE}


class UsageError(Exception):
    pass


class Out:
    """Collects report lines; porcelain output omits the display-only lines."""

    def __init__(self, porcelain: bool, stream=None):
        self.porcelain = porcelain
        self.stream = stream or sys.stdout

    def kv(self, key: str, value) -> None:
        print(f"{key}: {value}", file=self.stream)

    def show(self, key: str, value) -> None:
        if not self.porcelain:
            self.kv(key, value)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _text_arg(value: str) -> str:
    """An inline argument, or the contents of a file when prefixed with @."""
    return _read(value[1:]) if value.startswith("@") else value


def _mode(args, allow_cut=False) -> Mode:
    return Mode(LOGICS[args.mode], allow_cut, SIGNATURES[args.signature]())


def _path(p) -> str:
    return "/".join(map(str, p)) or "root"


# ---------------------------------------------------------------- commands

def cmd_check(args, out: Out) -> int:
    mode = _mode(args, args.allow_cut)
    d = load_derivation(_read(args.proof), mode.sig)
    r = check_derivation(mode, d)
    out.kv("status", "ok" if r.ok else "violations")
    out.kv("height", r.height)
    out.kv("logical_height", r.logical_height)
    out.kv("nodes", size(d))
    out.kv("cuts", cut_count(d))
    out.show("conclusion", unicode_sequent(d.conclusion))
    for path, rule, msg in sorted(r.violations, key=lambda v: v[0]):
        out.kv("violation", f"{_path(path)} {rule}: {msg}")
    return OK if r.ok else FAIL


def cmd_cutelim(args, out: Out) -> int:
    mode = _mode(args, True)
    if mode.logic != Logic.CLASSICAL:
        raise UsageError("cut elimination is implemented for the classical calculus")
    d = load_derivation(_read(args.proof), mode.sig)
    r = check_derivation(mode, d)
    if not r.ok:
        out.kv("status", "violations")
        for path, rule, msg in sorted(r.violations, key=lambda v: v[0]):
            out.kv("violation", f"{_path(path)} {rule}: {msg}")
        return FAIL
    trace, stats = [], CutStats()
    result = eliminate_cuts(d, mode, trace, stats)
    strict = Mode(mode.logic, False, mode.sig)
    r2 = check_derivation(strict, result)
    ok = r2.ok and cut_count(result) == 0 and result.conclusion.same(d.conclusion) and stats.measures_ok
    text = dump_derivation(result)
    report = out
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot write {args.output}: {e.strerror}") from None
    else:
        sys.stdout.write(text)
        report = Out(out.porcelain, sys.stderr)
    if args.trace:
        for s, h1, h2 in trace:
            report.kv("cut", f"size={s} h1={h1} h2={h2}")
    report.kv("status", "ok" if ok else "failed")
    report.kv("cuts_eliminated", len(trace))
    report.kv("height", f"{height(d)} -> {height(result)}")
    report.kv("logical_height", f"{logical_height(d)} -> {logical_height(result)}")
    report.kv("recursive_calls", stats.calls)
    report.kv("measure_decreasing", "yes" if stats.measures_ok else "no")
    return OK if ok else FAIL


def cmd_translate(args, out: Out) -> int:
    sig = SIGNATURES[args.signature]()
    phi = parse_formula(_text_arg(args.formula), sig)
    res = to_nlseq(phi) if args.dir == "to-nlseq" else to_nl(phi)
    out.kv("formula", show_formula(res))
    out.show("display", unicode_formula(res))
    return OK


def cmd_sat(args, out: Out) -> int:
    sig = SIGNATURES[args.signature]()
    ctx = parse_context(_text_arg(args.ctx), sig)
    check_context(ctx, sig)
    gamma = []
    for c in args.constraints:
        gamma.append(parse_formula(_text_arg(c), sig))
    theta = sat_search(ctx, gamma, args.depth, args.extra_names, sig)
    if theta is None:
        out.kv("status", "no-witness")
        out.kv("bound", f"depth={args.depth} extra_names={args.extra_names}")
        return FAIL
    out.kv("status", "witness")
    for x, t in theta.values:
        out.kv("assign", f"{x} := {show_term(t)}")
        out.show("display", f"{x} ↦ {unicode_term(t)}")
    for n, ty in theta.names:
        out.kv("extra_name", f"'{n}:{ty.name}")
    return OK


def cmd_axioms(args, out: Out) -> int:
    sig = SIGNATURES[args.signature]()
    which = args.mode
    if which == "single":
        raise UsageError("axiom sets are classical or intuitionistic")
    axs = nl_axioms(sig, which) if args.signature == "rich" else nl_axioms(sig, which, quantifier_instances=[])
    mode = Mode(LOGICS[which], False, sig)
    failures = 0
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    for ax in axs:
        phi = to_nlseq(ax.formula)
        if not args.derive:
            out.kv(ax.label, show_formula(phi))
            out.show("display", unicode_formula(phi))
            continue
        d = derive_nl_axiom(ax, mode)
        r = check_derivation(mode, d)
        good = r.ok and d.conclusion.right == (phi,) and not d.conclusion.left
        failures += not good
        out.kv(ax.label, f"{'ok' if good else 'FAILED'} height={r.height} logical_height={r.logical_height}")
        if args.out_dir:
            name = ax.label.replace("[", "_").replace("]", "").replace(",", "_").replace(";", "_")
            name = "".join(ch for ch in name if ch.isalnum() or ch in "_-")
            Path(args.out_dir, name + ".proof").write_text(dump_derivation(d), encoding="utf-8")
    out.kv("axioms", len(axs))
    if args.derive:
        out.kv("status", "ok" if failures == 0 else "failed")
    return OK if failures == 0 else FAIL


def cmd_typecheck(args, out: Out) -> int:
    sig = SIGNATURES[args.signature]()
    ctx = parse_context(_text_arg(args.ctx), sig)
    phi = parse_formula(_text_arg(args.formula), sig)
    try:
        check_context(ctx, sig)
        typecheck_formula(ctx, phi, sig)
    except TypeError_ as e:
        out.kv("status", "ill-typed")
        out.kv("error", str(e))
        return FAIL
    out.kv("status", "ok")
    out.show("display", unicode_formula(phi))
    return OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--porcelain", action="store_true", default=argparse.SUPPRESS,
                        help="stable key: value output only")
    common.add_argument("--signature", choices=sorted(SIGNATURES), default=argparse.SUPPRESS,
                        help="symbol signature for parsing and typing (default: rich)")
    p = argparse.ArgumentParser(prog="nomseq", parents=[common],
                                description="Proof kernel for a nominal sequent calculus.")
    sub = p.add_subparsers(dest="command", required=True)
    add = sub.add_parser

    def sub_parser(name, **kw):
        return add(name, parents=[common], **kw)

    c = sub_parser("check", help="check a proof file")
    c.add_argument("proof", help="proof file, or - for stdin")
    c.add_argument("--mode", choices=sorted(LOGICS), default="classical")
    c.add_argument("--allow-cut", action="store_true")
    c.set_defaults(run=cmd_check)

    c = sub_parser("cutelim", help="eliminate cuts from a proof file")
    c.add_argument("proof")
    c.add_argument("-o", "--output", help="write the cut-free proof here instead of stdout")
    c.add_argument("--trace", action="store_true", help="one line per eliminated cut")
    c.add_argument("--mode", choices=["classical"], default="classical")
    c.set_defaults(run=cmd_cutelim)

    c = sub_parser("translate", help="translate a formula between the two binder readings")
    c.add_argument("formula", help="formula text, or @file")
    c.add_argument("--dir", choices=["to-nlseq", "to-nl"], default="to-nlseq")
    c.set_defaults(run=cmd_translate)

    c = sub_parser("sat", help="bounded search for a ground model of constraints")
    c.add_argument("--ctx", default=".", help="context text (default: empty)")
    c.add_argument("constraints", nargs="*", help="equality or freshness constraints")
    c.add_argument("--depth", type=_bounded(0, 6), default=2)
    c.add_argument("--extra-names", type=_bounded(0, 5), default=2)
    c.set_defaults(run=cmd_sat)

    c = sub_parser("axioms", help="list or derive the nominal logic axioms")
    c.add_argument("--mode", choices=["classical", "intuitionistic"], default="classical")
    c.add_argument("--derive", action="store_true", help="derive and check each axiom")
    c.add_argument("--out-dir", help="with --derive, write each derivation as a proof file")
    c.set_defaults(run=cmd_axioms)

    c = sub_parser("typecheck", help="typecheck a formula in a context")
    c.add_argument("formula")
    c.add_argument("--ctx", default=".")
    c.set_defaults(run=cmd_typecheck)
    return p


def _bounded(lo: int, hi: int):
    def conv(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"must be between {lo} and {hi}")
        return v
    return conv


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    # defaults applied here: set_defaults would leak into the shared parent actions
    args.porcelain = getattr(args, "porcelain", False)
    args.signature = getattr(args, "signature", "rich")
    out = Out(args.porcelain)
    try:
        return args.run(args, out)
    except (UsageError, ParseError, ProofFormatError, SyntaxError_, TranslateError, ModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except TypeError_ as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except TransformError as e:
        print(f"error: {e}", file=sys.stderr)
        return FAIL
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error
        sys.stderr.close()
        return OK


def seed_from_env(default: int = 0) -> int:
    """The sampling seed: NOMSEQ_SEED when set, else the default."""
    raw = os.environ.get("NOMSEQ_SEED")
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return default


if __name__ == "__main__":
    sys.exit(main())

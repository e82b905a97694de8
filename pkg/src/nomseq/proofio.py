"""Reading and writing derivations as s-expressions.

    (rule <name> (concl "<sequent>") (data <field>...) (prem <proof>)...)

Fields: (principal "<formula>"), (witness "<term>"), (eigen <id>),
(eigen2 <id>), (sort "<type>"), (equation "<formula>"),
(positions (i j ...) ...), (axiom <id> (<key> <value>)...).
Formulas, terms, types and sequents are quoted in the ASCII concrete syntax.
"""

from __future__ import annotations

import re

from .calculus import AxiomError, Derivation, RuleApp, ALL_RULES, instance_from_params
from .context import DEFAULT_SIGNATURE
from .notation import (
    ParseError, parse_formula, parse_sequent, parse_term, parse_type, show_formula,
    show_sequent, show_term, show_type,
)
from .syntax import Signature


class ProofFormatError(ValueError):
    pass


# ------------------------------------------------------------ s-expressions

_SEXP = re.compile(r'\s*(?:(?P<open>\()|(?P<close>\))|"(?P<str>(?:[^"\\]|\\.)*)"|(?P<atom>[^\s()"]+))')


class Str(str):
    """A quoted string, kept apart from bare atoms."""


def read_sexp(text: str):
    pos = 0
    stack = [[]]
    while True:
        m = _SEXP.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ProofFormatError(f"unreadable input at offset {pos}")
            break
        pos = m.end()
        if m.group("open"):
            stack.append([])
        elif m.group("close"):
            if len(stack) == 1:
                raise ProofFormatError(f"unbalanced ')' at offset {m.start()}")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group("str") is not None:
            stack[-1].append(Str(re.sub(r"\\(.)", r"\1", m.group("str"))))
        else:
            stack[-1].append(m.group("atom"))
    if len(stack) != 1:
        raise ProofFormatError("unbalanced '(': input ended inside a list")
    if len(stack[0]) != 1:
        raise ProofFormatError(f"expected one proof, found {len(stack[0])} top-level items")
    return stack[0][0]


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _flat(x) -> str:
    if isinstance(x, Str):
        return _quote(x)
    if isinstance(x, str):
        return x
    return "(" + " ".join(_flat(y) for y in x) + ")"


def write_sexp(x, indent: int = 0, width: int = 100) -> str:
    """Print x, breaking lists that do not fit on one line after their atoms."""
    pad = "  " * indent
    flat = _flat(x)
    if isinstance(x, str) or len(flat) + len(pad) <= width or not any(isinstance(y, list) for y in x):
        return pad + flat
    head = [y for y in x if not isinstance(y, list)]
    lines = [pad + "(" + " ".join(_flat(y) for y in head)]
    lines += [write_sexp(y, indent + 1, width) for y in x if isinstance(y, list)]
    lines[-1] += ")"
    return "\n".join(lines)


# ------------------------------------------------------------ derivations

def _param_sexp(key, value):
    if key in ("f", "p"):
        return [key, value]
    if key == "args":
        return [key] + [Str(show_term(t)) for t in value]
    return [key, Str(show_term(value))]


def derivation_to_sexp(d: Derivation) -> list:
    r = d.rule
    data = ["data"]
    if r.principal is not None:
        data.append(["principal", Str(show_formula(r.principal))])
    if r.witness is not None:
        data.append(["witness", Str(show_term(r.witness))])
    if r.eigen is not None:
        data.append(["eigen", r.eigen])
    if r.eigen2 is not None:
        data.append(["eigen2", r.eigen2])
    if r.sort is not None:
        data.append(["sort", Str(show_type(r.sort))])
    if r.equation is not None:
        data.append(["equation", Str(show_formula(r.equation))])
    if r.positions:
        data.append(["positions"] + [[str(i) for i in p] for p in r.positions])
    if r.axiom is not None:
        data.append(["axiom", r.axiom.axiom] + [_param_sexp(k, v) for k, v in r.axiom.params])
    out = ["rule", r.name, ["concl", Str(show_sequent(d.conclusion))], data]
    out += [["prem", derivation_to_sexp(p)] for p in d.premises]
    return out


def dump_derivation(d: Derivation) -> str:
    return write_sexp(derivation_to_sexp(d)) + "\n"


def _expect(cond, msg):
    if not cond:
        raise ProofFormatError(msg)


def _text(x, what):
    _expect(isinstance(x, str), f"{what} must be a string")
    return str(x)


def _parse(fn, text, sig, what):
    try:
        return fn(text, sig)
    except ParseError as e:
        raise ProofFormatError(f"bad {what}: {e}") from None


def sexp_to_derivation(x, sig: Signature = DEFAULT_SIGNATURE, path: tuple = ()) -> Derivation:
    where = "/".join(map(str, path)) or "root"
    _expect(isinstance(x, list) and len(x) >= 3 and x[0] == "rule", f"{where}: expected (rule <name> ...)")
    name = _text(x[1], "rule name")
    _expect(name in ALL_RULES, f"{where}: unknown rule {name}")
    concl = None
    fields = {}
    prems = []
    for item in x[2:]:
        _expect(isinstance(item, list) and item, f"{where}: malformed item {item!r}")
        tag = item[0]
        if tag == "concl":
            _expect(len(item) == 2, f"{where}: concl takes one sequent")
            concl = _parse(parse_sequent, _text(item[1], "sequent"), sig, "sequent")
        elif tag == "data":
            fields = _read_data(item[1:], sig, where)
        elif tag == "prem":
            _expect(len(item) == 2, f"{where}: prem takes one proof")
            prems.append(sexp_to_derivation(item[1], sig, path + (len(prems),)))
        else:
            raise ProofFormatError(f"{where}: unknown item {tag}")
    _expect(concl is not None, f"{where}: missing conclusion")
    return Derivation(concl, RuleApp(name, **fields), tuple(prems))


def _read_data(items, sig, where) -> dict:
    out = {}
    for it in items:
        _expect(isinstance(it, list) and it, f"{where}: malformed data field")
        key = it[0]
        if key in ("principal", "equation"):
            out[key] = _parse(parse_formula, _text(it[1], key), sig, key)
        elif key == "witness":
            out[key] = _parse(parse_term, _text(it[1], key), sig, key)
        elif key in ("eigen", "eigen2"):
            out[key] = _text(it[1], key)
        elif key == "sort":
            out[key] = _parse(parse_type, _text(it[1], key), sig, key)
        elif key == "positions":
            try:
                out[key] = tuple(tuple(int(i) for i in p) for p in it[1:])
            except (TypeError, ValueError):
                raise ProofFormatError(f"{where}: positions must be integer lists") from None
        elif key == "axiom":
            params = {}
            for kv in it[2:]:
                _expect(isinstance(kv, list) and len(kv) >= 1, f"{where}: malformed axiom parameter")
                k = kv[0]
                if k in ("f", "p"):
                    params[k] = _text(kv[1], k)
                elif k == "args":
                    params[k] = tuple(_parse(parse_term, _text(v, "term"), sig, "term") for v in kv[1:])
                else:
                    params[k] = _parse(parse_term, _text(kv[1], k), sig, "term")
            try:
                out[key] = instance_from_params(_text(it[1], "axiom"), params, None, sig)
            except AxiomError as e:
                raise ProofFormatError(f"{where}: {e}") from None
        else:
            raise ProofFormatError(f"{where}: unknown data field {key}")
    return out


def load_derivation(text: str, sig: Signature = DEFAULT_SIGNATURE) -> Derivation:
    return sexp_to_derivation(read_sexp(text), sig)

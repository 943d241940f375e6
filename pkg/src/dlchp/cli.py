"""Command-line front end: parse, operate, print.

Exit codes: 0 success, 1 clash / failed proof / counterexample,
2 usage or parse error, 3 proof relative to hypotheses or tainted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sets as S
from .axioms import axiom_ids, decls as registry_decls, get_axiom, registry, trace_simplify, UnknownAxiom
from .kernel import check_proof, parse_script
from .oracle import FragmentError, Oracle, OracleConfig, parse_state, show_value, validate_on_samples
from .statics import statics
from .syntax import SortError, is_formula, is_program
from .textio import ParseError, Parser, parse_bindings, parse_decls, parse_with_decls, show, show_set, show_unicode
from .usubst import Clash, SubstitutionError, Taboo, usub_formula, usub_program, usub_term, validate_substitution

KINDS = ("formula", "term", "program", "set")


class UsageError(Exception):
    pass


class Output:
    def __init__(self, args):
        self.canonical = getattr(args, "canonical", False)
        self.unicode = getattr(args, "unicode", False)
        self.lines: list[str] = []
        self.record: dict = {}

    def ast(self, x) -> str:
        return show_unicode(x) if self.unicode and not self.canonical else show(x)

    def line(self, text: str = ""):
        self.lines.append(text)

    def field(self, key: str, value, label: str | None = None):
        self.record[key] = value
        self.lines.append(f"{label or key}: {value}")

    def render(self) -> str:
        if self.canonical:
            return json.dumps(self.record, sort_keys=True, ensure_ascii=False)
        return "\n".join(self.lines)


def _read(spec: str, is_file: bool) -> tuple[str, str]:
    if is_file or spec == "-":
        if spec == "-":
            return sys.stdin.read(), "<stdin>"
        return Path(spec).read_text(encoding="utf-8"), spec
    return spec, "<arg>"


def _base_decls(args):
    d = registry_decls().copy()
    for f in getattr(args, "decls", None) or []:
        d = parse_decls(Path(f).read_text(encoding="utf-8"), d)
    return d


def _guess_kind(text: str, decls) -> str:
    for kind in ("formula", "program", "term"):
        try:
            parse_with_decls(kind, text, decls)
            return kind
        except ParseError:
            continue
    return "formula"


def _parse_input(args, kinds=KINDS):
    text, src = _read(args.input, args.file)
    d = _base_decls(args)
    kind = args.kind or _guess_kind(text, d)
    if kind not in kinds:
        raise UsageError(f"--kind must be one of {', '.join(kinds)}")
    x, d = parse_with_decls(kind, text, d, src)
    return kind, x, d


# -- commands -----------------------------------------------------------------------


def cmd_parse(args, out: Output) -> int:
    kind, x, _ = _parse_input(args)
    if kind == "set":
        out.record = {"kind": kind, "text": show_set(x)}
        out.line(show_set(x))
    else:
        out.record = {"kind": kind, "text": show(x)}
        out.line(out.ast(x))
    return 0


def cmd_statics(args, out: Output) -> int:
    kind, x, _ = _parse_input(args, ("formula", "term", "program"))
    r = statics(x)
    out.record["kind"] = kind
    out.field("fv", show_set(r.fv))
    if kind == "program":
        out.field("bv", show_set(r.bv))
        out.field("mbv", show_set(r.mbv))
    out.field("cn", show_set(r.cn))
    return 0


def _set_arg(text: str | None, universe: str, decls):
    if text is None:
        return S.empty(universe)
    p = Parser(text, decls, "<flag>")
    s = p.set_expr(universe)
    p.expect_eof()
    s = S.normalize(s)
    if not S.is_ground(s):
        raise UsageError(f"set {text!r} is not ground")
    return s


def cmd_subst(args, out: Output) -> int:
    text, src = _read(args.substitution, True)
    p = Parser(text, _base_decls(args), src)
    p.declarations()
    sigma = parse_bindings(p, stop=())
    p.expect_eof()
    d = p.decls
    etext, esrc = _read(args.input, args.file)
    kind = args.kind or _guess_kind(etext, d)
    x, d = parse_with_decls(kind, etext, d, esrc)
    sigma = validate_substitution(sigma, d)
    Z = Taboo(_set_arg(args.taboo_vars, S.VARS, d), _set_arg(args.taboo_chans, S.CHANS, d))
    B = _set_arg(args.context, S.VARS, d)
    try:
        if kind == "program":
            res, W = usub_program(sigma, Z, B, x)
            taboo = f"{show_set(W.vars)} ; {show_set(W.chans)}"
            out.record = {"result": show(res), "output_taboo": taboo}
            out.line(out.ast(res))
            out.line(f"output taboo: {taboo}")
        else:
            res = usub_formula(sigma, Z, x) if kind == "formula" else usub_term(sigma, Z, x)
            out.record = {"result": show(res)}
            out.line(out.ast(res))
    except Clash as e:
        out.record = {"clash": {"phase": e.phase, "symbol": e.symbol, "site": e.site,
                                "atoms": [show_set(a) for a in e.atoms]}}
        out.line(str(e))
        return 1
    return 0


def cmd_axiom(args, out: Output) -> int:
    if args.list or args.id is None:
        ids = axiom_ids(args.group) if args.group else list(registry())
        out.record["axioms"] = {i: show(get_axiom(i).conclusion) for i in ids}
        for i in ids:
            out.line(f"{i}: {out.ast(get_axiom(i).conclusion)}")
        return 0
    e = get_axiom(args.id)
    out.record = {"id": e.id, "kind": e.kind, "group": e.group,
                  "premises": [show(p) for p in e.premises], "conclusion": show(e.conclusion)}
    for k, prem in enumerate(e.premises, 1):
        out.line(f"premise {k}: {out.ast(prem)}")
    out.line(out.ast(e.conclusion))
    return 0


def cmd_simplify(args, out: Output) -> int:
    args.kind = "term"
    _, x, _ = _parse_input(args, ("term",))
    r = trace_simplify(x)
    out.record = {"input": show(x), "result": show(r)}
    out.line(out.ast(r))
    return 0


def cmd_check(args, out: Output) -> int:
    text, src = _read(args.proof, True)
    script = parse_script(text, _base_decls(args), src)
    rep = check_proof(script)
    out.record = {
        "status": rep.summary(), "exit": rep.exit_code, "failed_step": rep.failed_step,
        "reason": rep.reason or None, "conclusion": show(rep.conclusion) if rep.conclusion else None,
        "hypotheses": {h: show(rep.formulas[h]) for h in rep.hypotheses},
        "premises": {h: show(rep.formulas[h]) for h in rep.premises},
        "tainted": list(rep.tainted), "uses": list(rep.axioms_used),
    }
    out.lines = rep.render().splitlines()
    if args.verbose:
        for sid, f in rep.formulas.items():
            out.line(f"  {sid}: {out.ast(f)}")
    return rep.exit_code


def _oracle(args) -> Oracle:
    def nums(text):
        return tuple(text.split(",")) if text else None

    kw = {"fuel": args.fuel, "seed": args.seed}
    for part in filter(None, (args.domains or "").split(";")):
        sort, _, values = part.partition("=")
        key = {"real": "real_domain", "int": "int_domain", "chan": "channels"}.get(sort.strip())
        if key is None or not values.strip():
            raise UsageError(f"bad domain {part.strip()!r}; expected real=..., int=... or chan=...")
        vals = tuple(v.strip() for v in values.split(","))
        kw[key] = tuple(int(v) for v in vals) if key == "int_domain" else vals
    if args.reals:
        kw["real_domain"] = nums(args.reals)
    if args.channels:
        kw["channels"] = tuple(args.channels.split(","))
    return Oracle(cfg=OracleConfig(**kw))


def cmd_oracle(args, out: Output) -> int:
    args.kind = args.kind if args.oracle_cmd == "eval" else "formula"
    kind, x, d = _parse_input(args, ("formula", "term", "program"))
    orc = _oracle(args)
    if args.oracle_cmd == "eval":
        v = parse_state(args.state or "", d)
        if is_formula(x):
            val = orc.eval_formula(v, x)
            out.record = {"value": val}
            out.line("true" if val else "false")
        elif is_program(x):
            runs = sorted(orc.denote(v, x), key=repr)
            out.record = {"runs": [[show_value(t), repr(w) if w is not None else None] for t, w in runs]}
            for t, w in runs:
                out.line(f"{show_value(t)} -> {w if w is not None else 'unfinished'}")
        else:
            val = orc.eval_term(v, x)
            out.record = {"value": show_value(val)}
            out.line(show_value(val))
        return 0
    fv = statics(x).fv
    if not S.is_ground(fv) or isinstance(S.normalize(fv), S.Cofinite):
        raise UsageError("free variables of the formula are not finite (space predicates?)")
    variables = [a for a in S.normalize(fv).atoms if a.sort in ("real", "int", "trace", "chan") and not a.primed]
    rep = validate_on_samples(x, variables, orc, args.samples)
    out.record = {"valid": rep.valid, "checked": rep.checked,
                  "counterexample": repr(rep.counterexample) if rep.counterexample else None}
    out.line(str(rep))
    if orc.unstable:
        out.line(f"note: {len(orc.unstable)} loop(s) did not stabilize within fuel")
    return 0 if rep.valid else 1


# -- argument parsing -----------------------------------------------------------------


def _input_args(p, kinds=KINDS):
    p.add_argument("input", help="text, or a path with -f, or - for stdin")
    p.add_argument("-f", "--file", action="store_true", help="treat INPUT as a file path")
    p.add_argument("--kind", choices=kinds, help="syntactic category (guessed when omitted)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decls", action="append", metavar="FILE", help="extra declarations")
    common.add_argument("--canonical", action="store_true", help="machine-readable JSON output")
    common.add_argument("--unicode", action="store_true", help="display with mathematical symbols")
    common.add_argument("-o", "--output", metavar="FILE", help="write the result to FILE")

    ap = argparse.ArgumentParser(prog="dlchp", description="Uniform substitution proof checking.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="echo the canonical form")
    _input_args(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("statics", parents=[common], help="free/bound variables and channels")
    _input_args(p, ("formula", "term", "program"))
    p.set_defaults(fn=cmd_statics)

    p = sub.add_parser("subst", parents=[common], help="apply a substitution under a taboo")
    p.add_argument("--taboo-vars", metavar="SET")
    p.add_argument("--taboo-chans", metavar="SET")
    p.add_argument("--context", metavar="SET", help="variables bound by parallel siblings")
    p.add_argument("substitution", help="substitution file (may start with declarations)")
    _input_args(p, ("formula", "term", "program"))
    p.set_defaults(fn=cmd_subst)

    p = sub.add_parser("axiom", parents=[common], help="print an axiom or rule")
    p.add_argument("id", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--group", choices=("calculus", "trace", "set", "imported", "rule"))
    p.set_defaults(fn=cmd_axiom)

    p = sub.add_parser("simplify", parents=[common], help="normalize a trace term")
    p.add_argument("input")
    p.add_argument("-f", "--file", action="store_true")
    p.set_defaults(fn=cmd_simplify, kind="term")

    p = sub.add_parser("check", parents=[common], help="check a proof script")
    p.add_argument("proof")
    p.add_argument("-v", "--verbose", action="store_true", help="list every step's formula")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("oracle", help="evaluate on the discrete semantics")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)
    for name, helptext in (("eval", "evaluate in one state"), ("validate", "check on sampled states")):
        q = osub.add_parser(name, parents=[common], help=helptext)
        _input_args(q, ("formula", "term", "program"))
        q.add_argument("--fuel", type=int, default=4, help="loop unrolling bound")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--reals", metavar="LIST", help="comma-separated real domain")
        q.add_argument("--channels", metavar="LIST", help="comma-separated channel domain")
        q.add_argument("--domains", metavar="SPEC", help="e.g. 'real=0,1,2; int=0,1; chan=ch,dh'")
        if name == "eval":
            q.add_argument("--state", metavar="ASSIGNMENTS", help="e.g. x=1, h=[(ch,4,0)]")
        else:
            q.add_argument("--samples", type=int, default=None)
        q.set_defaults(fn=cmd_oracle)
    return ap


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    out = Output(args)
    try:
        code = args.fn(args, out)
    except (ParseError, SortError, SubstitutionError, UsageError, S.SetError) as e:
        print(f"error: {e}", file=stderr)
        return 2
    except UnknownAxiom as e:
        print(f"error: unknown axiom {e.args[0]}", file=stderr)
        return 2
    except FragmentError as e:
        print(f"error: outside the oracle fragment: {e}", file=stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=stderr)
        return 2
    text = out.render() + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

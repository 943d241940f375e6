"""Proof checker: replays scripts whose steps are the only way to produce theorems.

A script is a header of declarations followed by ``step <id> <kind> ...``
lines and a final ``qed <formula>``.  Every step stores the formula it
produces; later steps may only refer to earlier ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from functools import lru_cache
from importlib import resources

from . import sets as S
from .axioms import AxiomEntry, decide_set_formula, decls as registry_decls, registry, trace_simplify
from .sets import MU, MU_PRIME, Channel, Variable
from .syntax import (
    And, Decls, Forall, IntLit, IntPlus, Not, Plus, RealLit, Rel, SortError, Times, TrueF,
    check_wellformed, is_folr, normalize_sets, sort_check, subnodes, walk_map,
)
from .textio import ParseError, Parser, parse_bindings, show
from .usubst import Clash, SubstitutionError, us, us_total, validate_substitution

# -- script model -------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomStep:
    id: str
    name: str
    line: int = 0


@dataclass(frozen=True)
class USStep:
    id: str
    ref: str
    sigma: object
    line: int = 0


@dataclass(frozen=True)
class RuleStep:
    id: str
    name: str
    sigma: object
    refs: tuple
    line: int = 0


@dataclass(frozen=True)
class MPStep:
    id: str
    impl: str
    ante: str
    line: int = 0


@dataclass(frozen=True)
class RenameStep:
    id: str
    ref: str
    a: object
    b: object
    line: int = 0


@dataclass(frozen=True)
class TautStep:
    id: str
    goal: object
    refs: tuple = ()
    line: int = 0


@dataclass(frozen=True)
class SetFactStep:
    id: str
    goal: object
    line: int = 0


@dataclass(frozen=True)
class TraceFactStep:
    id: str
    goal: object
    line: int = 0


@dataclass(frozen=True)
class ArithStep:
    id: str
    goal: object
    line: int = 0


@dataclass(frozen=True)
class HypStep:
    id: str
    goal: object
    line: int = 0


@dataclass(frozen=True)
class PremiseStep:
    id: str
    goal: object
    line: int = 0


@dataclass(frozen=True)
class CEStep:
    id: str
    ref: str
    target: object
    line: int = 0


@dataclass
class ProofScript:
    decls: Decls
    steps: list
    claim: object
    source: str = "<proof>"


# -- parsing ----------------------------------------------------------------------------

STEP_KINDS = ("axiom", "us", "rule", "mp", "rename", "taut", "setfact", "tracefact", "arith",
              "hyp", "premise", "ce")


def _at_boundary(p: Parser) -> bool:
    return p.tok.kind == "eof" or p.at("step", "qed")


def _refs(p: Parser) -> tuple:
    p.accept("using")
    out = []
    while not _at_boundary(p):
        out.append(p.ident().text)
    return tuple(out)


def _formula(p: Parser):
    t = p.tok
    f = p.formula()
    return p.checked(lambda: sort_check(f, p.decls), t)


def _name(p: Parser):
    t = p.ident()
    if t.text in p.decls.vars:
        return p.decls.var(t.text, t.primed)
    if t.text in p.decls.chans:
        return Channel(t.text)
    raise p.error(f"{t.text} is neither a declared variable nor a channel", t)


def parse_script(text: str, decls: Decls | None = None, source: str = "<proof>") -> ProofScript:
    base = (decls or registry_decls()).copy()
    p = Parser(text, base, source)
    p.declarations()
    steps, seen, claim = [], set(), None
    while p.tok.kind != "eof":
        if not p.at("step", "qed"):
            raise p.error("expected 'step' or 'qed'")
        kw = p.ident_any()
        if kw.text == "qed":
            claim = _formula(p)
            p.expect_eof()
            break
        sid = p.ident()
        if sid.text in seen:
            raise p.error(f"duplicate step id {sid.text}", sid)
        seen.add(sid.text)
        kind = p.ident()
        line = kw.line
        i = sid.text
        match kind.text:
            case "axiom":
                steps.append(AxiomStep(i, p.ident().text, line))
            case "us":
                ref = p.ident().text
                p.eat("{")
                sigma = parse_bindings(p)
                p.eat("}")
                steps.append(USStep(i, ref, sigma, line))
            case "rule":
                name = p.ident().text
                p.eat("{")
                sigma = parse_bindings(p)
                p.eat("}")
                steps.append(RuleStep(i, name, sigma, _refs(p), line))
            case "mp":
                steps.append(MPStep(i, p.ident().text, p.ident().text, line))
            case "rename":
                ref = p.ident().text
                a = _name(p)
                p.eat("<->")
                b = _name(p)
                steps.append(RenameStep(i, ref, a, b, line))
            case "taut":
                goal = _formula(p)
                steps.append(TautStep(i, goal, _refs(p), line))
            case "setfact":
                steps.append(SetFactStep(i, _formula(p), line))
            case "tracefact":
                steps.append(TraceFactStep(i, _formula(p), line))
            case "arith":
                steps.append(ArithStep(i, _formula(p), line))
            case "hyp":
                steps.append(HypStep(i, _formula(p), line))
            case "premise":
                steps.append(PremiseStep(i, _formula(p), line))
            case "ce":
                ref = p.ident().text
                steps.append(CEStep(i, ref, _formula(p), line))
            case _:
                raise p.error(f"unknown step kind {kind.text!r}", kind)
        if not _at_boundary(p):
            raise p.error(f"unexpected {p.tok.text!r} after step {i}")
    if claim is None:
        raise ParseError("missing qed", p.tok.line, p.tok.col, source)
    return ProofScript(p.decls, steps, claim, source)


# -- reports ----------------------------------------------------------------------------


class StepFailure(Exception):
    pass


@dataclass
class CheckReport:
    status: str                       # proved | failed
    conclusion: object = None
    claim: object = None
    failed_step: str | None = None
    reason: str = ""
    tainted: tuple = ()
    hypotheses: tuple = ()
    premises: tuple = ()
    axioms_used: tuple = ()
    formulas: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "proved"

    @property
    def clean(self) -> bool:
        return self.ok and not self.tainted and not self.hypotheses

    @property
    def exit_code(self) -> int:
        if not self.ok:
            return 1
        return 0 if self.clean else 3

    def summary(self) -> str:
        if not self.ok:
            return f"failed at step {self.failed_step}: {self.reason}"
        notes = []
        if self.premises:
            notes.append(f"derived rule with {len(self.premises)} premise" + ("s" if len(self.premises) != 1 else ""))
        if self.hypotheses:
            n = len(self.hypotheses)
            notes.append(f"{n} hypothesis" if n == 1 else f"{n} hypotheses")
        if self.tainted:
            notes.append("tainted by arith: " + ", ".join(self.tainted))
        return "proved" + (f" ({'; '.join(notes)})" if notes else "")

    def render(self) -> str:
        lines = [self.summary()]
        if self.conclusion is not None:
            lines.append("conclusion: " + show(self.conclusion))
        for h in self.hypotheses:
            lines.append(f"hypothesis {h}: {show(self.formulas[h])}")
        if self.axioms_used:
            lines.append("uses: " + ", ".join(self.axioms_used))
        return "\n".join(lines)

    def as_entry(self, name: str) -> AxiomEntry:
        if not self.clean:
            raise ValueError(f"{name} is not a clean proof: {self.summary()}")
        prem = tuple(self.formulas[p] for p in self.premises)
        return AxiomEntry(name, "rule" if prem else "axiom", prem, self.conclusion, "derived")


# -- propositional closure ----------------------------------------------------------------

def _prop_atoms(f, out: list):
    match f:
        case TrueF():
            return
        case Not(x):
            _prop_atoms(x, out)
        case And(l, r):
            _prop_atoms(l, out)
            _prop_atoms(r, out)
        case _:
            if f not in out:
                out.append(f)


def _prop_eval(f, env: dict):
    match f:
        case TrueF():
            return True
        case Not(x):
            v = _prop_eval(x, env)
            return None if v is None else not v
        case And(l, r):
            a, b = _prop_eval(l, env), _prop_eval(r, env)
            if a is False or b is False:
                return False
            if a is None or b is None:
                return None
            return True
    return env.get(f)


def _satisfiable(fs: list, atoms: list, env: dict) -> bool:
    vals = [_prop_eval(f, env) for f in fs]
    if False in vals:
        return False
    if all(v is True for v in vals):
        return True
    for a in atoms:
        if a not in env:
            for b in (True, False):
                env[a] = b
                if _satisfiable(fs, atoms, env):
                    del env[a]
                    return True
                del env[a]
            return False
    return False


def tautology(goal, assumptions=()) -> bool:
    """Whether `goal` follows propositionally from `assumptions` (other subformulas opaque)."""
    fs = [normalize_sets(a) for a in assumptions] + [Not(normalize_sets(goal))]
    atoms = []
    for f in fs:
        _prop_atoms(f, atoms)
    return not _satisfiable(fs, atoms, {})


def split_implication(f):
    match f:
        case Not(And(a, Not(b))):
            return a, b
    return None


def split_equivalence(f):
    match f:
        case And(Not(And(a, Not(b))), Not(And(c, Not(d)))) if a == d and b == c:
            return a, b
    return None


def replace_all(x, old, new):
    if x == old:
        return new
    if isinstance(x, tuple):
        return tuple(replace_all(y, old, new) for y in x)
    if is_dataclass(x) and not isinstance(x, type):
        return type(x)(**{f.name: replace_all(getattr(x, f.name), old, new) for f in fields(x)})
    return x


def _occurs(x, sub) -> bool:
    return any(n == sub for n in subnodes(x))


# -- renaming --------------------------------------------------------------------------


class RenameError(ValueError):
    pass


def uniform_rename(phi, a, b):
    """Transpose two variables (with their primes) or two channels everywhere."""
    if isinstance(a, Variable) and isinstance(b, Variable):
        if a.sort != b.sort:
            raise RenameError(f"cannot rename {a} ({a.sort}) to {b} ({b.sort})")
        if a.primed or b.primed:
            raise RenameError("rename unprimed variables; primes follow")
        if MU in (a, b):
            raise RenameError("global time cannot be renamed")
        pairs = {a: b, b: a}
        if a.sort == "real":
            pairs.update({a.prime(): b.prime(), b.prime(): a.prime()})
    elif isinstance(a, Channel) and isinstance(b, Channel):
        pairs = {a: b, b: a}
    else:
        raise RenameError(f"cannot rename {a} to {b}: different kinds")
    if a == b:
        return phi
    return walk_map(phi, lambda n: pairs.get(n, n) if isinstance(n, (Variable, Channel)) else n)


# -- arithmetic oracle --------------------------------------------------------------------


class ArithOracle:
    """Validity of first-order real arithmetic / linear integer goals via z3."""

    def __init__(self, timeout_ms: int = 5000):
        self.timeout_ms = timeout_ms

    def in_fragment(self, f, decls) -> bool:
        if is_folr(f, decls):
            return True
        try:
            self._check_presburger(f)
        except StepFailure:
            return False
        return True

    def _check_presburger(self, f):
        for n in subnodes(f):
            if isinstance(n, (Rel, IntPlus, IntLit, And, Not, TrueF, Forall)):
                continue
            if isinstance(n, Variable) and n.sort == "int":
                continue
            raise StepFailure("goal is outside the arithmetic fragment")

    def valid(self, f) -> bool:
        import z3

        s = z3.Solver()
        s.set("timeout", self.timeout_ms)
        env = {}
        s.add(z3.Not(self._fml(f, env)))
        r = s.check()
        if r == z3.unknown:
            raise StepFailure("arithmetic oracle gave up")
        return r == z3.unsat

    def _var(self, x, env):
        import z3

        key = (x.name, x.sort, x.primed)
        if key not in env:
            name = str(x)
            env[key] = z3.Int(name) if x.sort == "int" else z3.Real(name)
        return env[key]

    def _term(self, e, env):
        import z3

        match e:
            case Variable():
                return self._var(e, env)
            case RealLit(v):
                return z3.RealVal(f"{v.numerator}/{v.denominator}")
            case IntLit(v):
                return z3.IntVal(v)
            case Plus(l, r) | IntPlus(l, r):
                return self._term(l, env) + self._term(r, env)
            case Times(l, r):
                return self._term(l, env) * self._term(r, env)
        from .syntax import FuncApp

        if isinstance(e, FuncApp):
            key = ("fn", e.symbol, len(e.args))
            if key not in env:
                env[key] = z3.Function(e.symbol, *([z3.RealSort()] * (len(e.args) + 1))) if e.args else z3.Real(e.symbol)
            fn = env[key]
            return fn(*[self._term(a, env) for a in e.args]) if e.args else fn
        raise StepFailure(f"term outside the arithmetic fragment: {show(e)}")

    def _fml(self, f, env):
        import z3

        match f:
            case TrueF():
                return z3.BoolVal(True)
            case Rel("=", l, r):
                return self._term(l, env) == self._term(r, env)
            case Rel(">=", l, r):
                return self._term(l, env) >= self._term(r, env)
            case Rel(">", l, r):
                return self._term(l, env) > self._term(r, env)
            case Not(x):
                return z3.Not(self._fml(x, env))
            case And(l, r):
                return z3.And(self._fml(l, env), self._fml(r, env))
            case Forall(x, body):
                v = self._var(x, env)
                return z3.ForAll([v], self._fml(body, env))
        from .syntax import PredApp

        if isinstance(f, PredApp):
            key = ("pred", f.symbol, len(f.args))
            if key not in env:
                env[key] = (z3.Function(f.symbol, *([z3.RealSort()] * len(f.args)), z3.BoolSort())
                            if f.args else z3.Bool(f.symbol))
            p = env[key]
            return p(*[self._term(a, env) for a in f.args]) if f.args else p
        raise StepFailure(f"formula outside the arithmetic fragment: {show(f)}")


# -- checking ------------------------------------------------------------------------------


@dataclass
class _Fact:
    formula: object
    premise_dep: bool = False


def _eq(a, b) -> bool:
    return normalize_sets(a) == normalize_sets(b)


def check_proof(script: ProofScript, library: dict | None = None, arith: ArithOracle | None = None) -> CheckReport:
    """Replay `script`; pure function of its inputs."""
    lib = default_library() if library is None else library
    arith = arith or ArithOracle()
    facts: dict[str, _Fact] = {}
    tainted, hyps, prems, used = [], [], [], []
    last = None
    for step in script.steps:
        try:
            fact = _check_step(step, facts, lib, script.decls, arith)
        except StepFailure as e:
            return _failed(script, step.id, str(e), facts)
        except Clash as e:
            return _failed(script, step.id, str(e), facts)
        except (SubstitutionError, SortError, S.SetError, ParseError) as e:
            return _failed(script, step.id, f"ill-formed step: {e}", facts)
        bad = check_wellformed(fact.formula)
        if bad:
            return _failed(script, step.id, "ill-formed result: " + "; ".join(map(str, bad)), facts)
        facts[step.id] = fact
        last = fact.formula
        if isinstance(step, ArithStep):
            tainted.append(step.id)
        elif isinstance(step, HypStep):
            hyps.append(step.id)
        elif isinstance(step, PremiseStep):
            prems.append(step.id)
        elif isinstance(step, (AxiomStep, RuleStep)) and step.name not in used:
            used.append(step.name)
    formulas = {k: v.formula for k, v in facts.items()}
    if last is None:
        return _failed(script, "qed", "empty proof", facts)
    if not _eq(last, script.claim):
        return CheckReport("failed", last, script.claim, "qed",
                           f"claimed {show(script.claim)} but the last step proves {show(last)}",
                           formulas=formulas)
    return CheckReport("proved", last, script.claim, None, "", tuple(tainted), tuple(hyps), tuple(prems),
                       tuple(used), formulas)


def _failed(script, sid, reason, facts):
    return CheckReport("failed", None, script.claim, sid, reason,
                       formulas={k: v.formula for k, v in facts.items()})


def _ref(facts, rid) -> _Fact:
    if rid not in facts:
        raise StepFailure(f"unknown or forward reference {rid}")
    return facts[rid]


def _entry(lib, name) -> AxiomEntry:
    if name not in lib:
        raise StepFailure(f"unknown axiom or rule {name}")
    return lib[name]


def _check_step(step, facts, lib, decls, arith) -> _Fact:
    match step:
        case AxiomStep(_, name):
            e = _entry(lib, name)
            if e.kind != "axiom":
                raise StepFailure(f"{name} is a rule; use a rule step")
            return _Fact(e.conclusion)
        case USStep(_, ref, sigma):
            src = _ref(facts, ref)
            if src.premise_dep:
                raise StepFailure("substitution into a formula that depends on premises")
            sigma = validate_substitution(sigma, decls)
            return _Fact(us(sigma, src.formula))
        case RuleStep(_, name, sigma, refs):
            e = _entry(lib, name)
            if e.kind != "rule":
                raise StepFailure(f"{name} is an axiom; use an axiom step")
            if len(refs) != len(e.premises):
                raise StepFailure(f"{name} needs {len(e.premises)} premises, got {len(refs)}")
            sigma = validate_substitution(sigma, decls)
            dep = False
            for k, (prem, rid) in enumerate(zip(e.premises, refs)):
                got = _ref(facts, rid)
                want = us_total(sigma, prem)
                if not _eq(want, got.formula):
                    raise StepFailure(f"premise {k + 1} of {name} is {show(want)}, but {rid} proves {show(got.formula)}")
                dep = dep or got.premise_dep
            return _Fact(us_total(sigma, e.conclusion), dep)
        case MPStep(_, impl, ante):
            fi, fa = _ref(facts, impl), _ref(facts, ante)
            parts = split_implication(fi.formula)
            if parts is None:
                raise StepFailure(f"{impl} is not an implication")
            if not _eq(parts[0], fa.formula):
                raise StepFailure(f"mismatch: {impl} needs {show(parts[0])}, but {ante} proves {show(fa.formula)}")
            return _Fact(parts[1], fi.premise_dep or fa.premise_dep)
        case RenameStep(_, ref, a, b):
            src = _ref(facts, ref)
            if src.premise_dep:
                raise StepFailure("renaming a formula that depends on premises")
            try:
                out = uniform_rename(src.formula, a, b)
            except RenameError as e:
                raise StepFailure(str(e)) from None
            return _Fact(sort_check(out, decls))
        case TautStep(_, goal, refs):
            srcs = [_ref(facts, r) for r in refs]
            if not tautology(goal, [s.formula for s in srcs]):
                raise StepFailure("not a propositional consequence of the referenced steps")
            return _Fact(goal, any(s.premise_dep for s in srcs))
        case SetFactStep(_, goal):
            v = decide_set_formula(goal)
            if v is None:
                raise StepFailure("set fact is not ground")
            if not v:
                raise StepFailure("set fact is false")
            return _Fact(goal)
        case TraceFactStep(_, goal):
            if not (isinstance(goal, Rel) and goal.op == "="):
                raise StepFailure("trace fact must be an equation")
            l, r = trace_simplify(goal.l), trace_simplify(goal.r)
            if not _eq(l, r):
                raise StepFailure(f"sides normalize to {show(l)} and {show(r)}")
            return _Fact(goal)
        case ArithStep(_, goal):
            if not arith.in_fragment(goal, decls):
                raise StepFailure("goal is outside the arithmetic fragment")
            if not arith.valid(goal):
                raise StepFailure("arithmetic oracle rejects the goal")
            return _Fact(goal)
        case HypStep(_, goal):
            return _Fact(goal)
        case PremiseStep(_, goal):
            return _Fact(goal, True)
        case CEStep(_, ref, target):
            src = _ref(facts, ref)
            parts = split_equivalence(src.formula)
            if parts is None:
                raise StepFailure(f"{ref} is not an equivalence")
            lhs, rhs = parts
            if not _occurs(target, lhs):
                raise StepFailure(f"{show(lhs)} does not occur in the target")
            out = replace_all(target, lhs, rhs)
            bad = check_wellformed(out)
            if bad:
                raise StepFailure("replacement breaks well-formedness")
            eqv = And(Not(And(target, Not(out))), Not(And(out, Not(target))))
            return _Fact(eqv, src.premise_dep)
    raise StepFailure(f"unknown step {step!r}")


# -- bundled derivations --------------------------------------------------------------------

DERIVED = ("acMono", "acBoxesDist")


def bundled_script_text(name: str) -> str:
    return resources.files("dlchp.proofs").joinpath(f"{name}.proof").read_text(encoding="utf-8")


def bundled_scripts() -> list[str]:
    return sorted(p.name[:-6] for p in resources.files("dlchp.proofs").iterdir() if p.name.endswith(".proof"))


def load_bundled(name: str) -> ProofScript:
    return parse_script(bundled_script_text(name), source=f"{name}.proof")


def library_before(name: str) -> dict:
    lib = dict(registry())
    for d in DERIVED:
        if d == name:
            break
        rep = check_proof(load_bundled(d), lib)
        lib[d] = rep.as_entry(d)
    return lib


def replay_derived(name: str) -> CheckReport:
    if name not in DERIVED:
        raise KeyError(f"no bundled derivation for {name!r}")
    return check_proof(load_bundled(name), library_before(name))


@lru_cache(maxsize=1)
def default_library() -> dict:
    lib = library_before(None)
    return lib


def check_text(text: str, source: str = "<proof>") -> CheckReport:
    return check_proof(parse_script(text, source=source))

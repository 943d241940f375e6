"""Randomized property corpora: substitution invariants and statics against the oracle.

Both corpora are deterministic in their seed and report counts plus the
first few violations, so callers decide how strict to be.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from . import sets as S
from .generators import CHANS, REALS, TRACES, Gen, GenConfig, signature, sorted_program
from .oracle import Interp, Oracle, OracleConfig, State, append_recorded
from .sets import MU, Channel
from .statics import statics
from .syntax import Star, check_wellformed, sort_check, subnodes
from .textio import show
from .usubst import Clash, SubstitutionError, usub_program, validate_substitution


@dataclass
class CorpusReport:
    instances: int = 0
    counts: Counter = field(default_factory=Counter)
    violations: list = field(default_factory=list)

    def violate(self, kind: str, seed: int, detail: str = ""):
        self.counts["violation " + kind] += 1
        if len(self.violations) < 20:
            self.violations.append((kind, seed, detail))

    @property
    def ok(self) -> bool:
        return not self.violations

    def violated(self, kind: str) -> int:
        return self.counts["violation " + kind]


# -- substitution corpus -----------------------------------------------------------

@dataclass
class SubstConfig:
    instances: int = 1000
    seed: int = 0
    depth: int = 5


def usubst_corpus(cfg: SubstConfig | None = None) -> CorpusReport:
    """Output taboo coverage, well-formedness retention and taboo independence."""
    cfg = cfg or SubstConfig()
    d = signature()
    rep = CorpusReport()
    seed = cfg.seed
    while rep.instances < cfg.instances:
        seed += 1
        g = Gen(seed, GenConfig(depth=cfg.depth))
        prog = sorted_program(g, d)
        if check_wellformed(prog):
            rep.counts["skipped ill-formed input"] += 1
            continue
        try:
            sigma = validate_substitution(g.substitution(), d)
        except SubstitutionError:
            rep.counts["skipped invalid substitution"] += 1
            continue
        rep.instances += 1
        stars = sum(isinstance(n, Star) for n in subnodes(prog))
        Z, B = g.taboo(), g.context()
        try:
            out, W = usub_program(sigma, Z, B, prog)
        except Clash as e:
            rep.counts["clash " + e.phase] += 1
            continue
        rep.counts["success"] += 1
        rep.counts["star passes"] += stars
        st = statics(out)
        if not (S.subset_eq(S.union(Z.vars, st.bv), W.vars) and S.subset_eq(S.union(Z.chans, st.cn), W.chans)):
            rep.violate("output-taboo", seed, show(out))
        if check_wellformed(out):
            rep.violate("wellformed", seed, show(out))
        Z2, B2 = g.taboo(), g.context()
        try:
            out2, _ = usub_program(sigma, Z2, B2, prog)
        except Clash:
            continue
        rep.counts["compared pairs"] += 1
        if out2 != out:
            rep.violate("taboo-independence", seed, f"{show(out)} vs {show(out2)}")
    return rep


# -- statics versus oracle ---------------------------------------------------------

ALL_VARS = (*REALS, *TRACES, MU)
VALUES = (0, 1, 2)


def corpus_interp() -> Interp:
    return Interp(
        funcs={"f": lambda: Fraction(1), "g": lambda a, b: a + b},
        preds={"q": lambda: True, "r": lambda a: a >= 1},
        spreds={"P": _space_pred},
    )


def _space_pred(v: State) -> bool:
    total = sum(val if x.sort == "real" else len(val) for x, val in v.items())
    return total % 2 == 0


@dataclass
class StaticsConfig:
    instances: int = 500
    seed: int = 0
    depth: int = 3
    fuel: int = 2


def _random_state(g: Gen) -> State:
    m = {x: Fraction(g.pick(VALUES)) for x in REALS}
    m[MU] = Fraction(g.pick((0, 1)))
    for h in TRACES:
        m[h] = g.trace_value(2)
    return State(m)


def _retrace(g: Gen, trace, chans):
    """A trace with the same projection onto `chans` but fresh events elsewhere."""
    kept = [ev for ev in trace if S.member(Channel(ev[0]), chans)]
    others = [c for c in CHANS if not S.member(c, chans)]
    out = []
    for ev in kept + [None] * g.rng.randrange(3):
        if ev is None:
            if others:
                out.insert(g.rng.randrange(len(out) + 1),
                           (g.pick(others).name, Fraction(g.pick(VALUES)), Fraction(g.pick(VALUES))))
        else:
            out.append(ev)
    return tuple(out)


def _variant(g: Gen, v: State, keep, chans=None) -> State:
    """Vary `v` outside `keep`; traces inside `keep` may change off `chans` when given."""
    m = dict(v.items())
    for x in ALL_VARS:
        inside = S.member(x, keep)
        if inside and (chans is None or x.sort != "trace"):
            continue
        if inside:
            m[x] = _retrace(g, v.get(x), chans)
        elif g.rng.random() < 0.7:
            m[x] = g.trace_value(2) if x.sort == "trace" else Fraction(g.pick((0, 1, 2, 3)))
    return State(m)


def _agree(a: State, b: State, vs) -> bool:
    return all(a.get(x) == b.get(x) for x in ALL_VARS if S.member(x, vs))


def _check_program(rep, orc, g, seed, prog):
    st = statics(prog)
    v = _random_state(g)
    comps = orc.denote(v, prog)
    # bound effect
    for tau, w in comps:
        for _, ch, _, _ in tau:
            if not S.member(Channel(ch), st.cn):
                rep.violate("bound-effect channels", seed, show(prog))
        if w is None:
            continue
        if not all(w.get(h) == v.get(h) for h in TRACES):
            rep.violate("bound-effect recorders", seed, show(prog))
        if not _agree(append_recorded(w, tau), v, S.complement(st.bv)):
            rep.violate("bound-effect", seed, show(prog))
    # coincidence on a superset of fv
    keep = S.union(st.fv, st.mbv) if g.rng.random() < 0.5 else st.fv
    v2 = _variant(g, v, keep)
    comps2 = orc.denote(v2, prog)
    for tau, w in comps:
        if not any(t2 == tau and (w is None) == (w2 is None) and (w is None or _agree(w, w2, keep))
                   for t2, w2 in comps2):
            rep.violate("program coincidence", seed, show(prog))
            break


def _check_formula(rep, orc, g, seed, f):
    st = statics(f)
    v = _random_state(g)
    v2 = _variant(g, v, st.fv, st.cn)
    if orc.eval_formula(v, f) != orc.eval_formula(v2, f):
        rep.violate("formula coincidence", seed, show(f))


def _check_term(rep, orc, g, seed, e):
    st = statics(e)
    v = _random_state(g)
    v2 = _variant(g, v, st.fv, st.cn)
    if orc.eval_term(v, e) != orc.eval_term(v2, e):
        rep.violate("term coincidence", seed, show(e))


def statics_oracle_corpus(cfg: StaticsConfig | None = None) -> CorpusReport:
    """Bound effect and coincidence of the syntactic sets against the oracle.

    Each instance samples a program, a formula and a trace or real term, and
    checks them on a fresh pair of states.
    """
    cfg = cfg or StaticsConfig()
    d = signature()
    rep = CorpusReport()
    orc = Oracle(corpus_interp(), OracleConfig(fuel=cfg.fuel, channels=tuple(c.name for c in CHANS)))
    seed = cfg.seed
    while rep.instances < cfg.instances:
        seed += 1
        g = Gen(seed, GenConfig(depth=cfg.depth, prog_consts=False))
        prog = sorted_program(g, d, cfg.depth)
        try:
            f = sort_check(g.formula(2), d)
            e = sort_check(g.trace_term(2) if g.rng.random() < 0.5 else g.poly(2), d)
        except ValueError:
            rep.counts["skipped ill-sorted"] += 1
            continue
        if check_wellformed(prog) or check_wellformed(f):
            rep.counts["skipped ill-formed"] += 1
            continue
        rep.instances += 1
        _check_program(rep, orc, g, seed, prog)
        _check_formula(rep, orc, g, seed, f)
        _check_term(rep, orc, g, seed, e)
    rep.counts["star unstable"] = len(orc.unstable)
    return rep

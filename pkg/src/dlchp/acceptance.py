"""The acceptance suite: one check per criterion, each returning a verdict and a detail line.

`tests/test_acceptance.py` asserts on these and `scripts/run_acceptance.py`
prints them; both go through `run_all` or the individual checks.
"""

from __future__ import annotations

import itertools
import random
import time
from collections import Counter
from dataclasses import dataclass, field

from . import sets as S
from .axioms import SET_AXIOMS, TRACE_ALGEBRA, decide_set_formula, decls as registry_decls, get_axiom, trace_simplify
from .instances import EXEMPT, INSTANCES, equations, ground_trace_instance, instance_oracle, validate_instance
from .kernel import DERIVED, bundled_script_text, bundled_scripts, library_before, load_bundled, check_proof, replay_derived
from .mutation import mutation_campaign
from .properties import StaticsConfig, SubstConfig, statics_oracle_corpus, usubst_corpus
from .sets import Channel, Variable
from .statics import statics
from .syntax import Forall, normalize_sets
from .textio import parse, parse_substitution, show
from .usubst import Clash, Substitution, us, validate_substitution


@dataclass
class Verdict:
    criterion: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    notes: list = field(default_factory=list)

    def line(self) -> str:
        return f"criterion {self.criterion:>2} {'PASS' if self.passed else 'FAIL'}  {self.title}: {self.detail}"


@dataclass
class AcceptanceConfig:
    subst_instances: int = 1000
    statics_instances: int = 500
    instance_samples: int | None = None   # None: the full state grid
    min_states: int = 64
    trace_samples: int = 500
    mutations: int = 50
    seed: int = 0


def _timed(fn):
    def run(*args, **kw):
        t = time.perf_counter()
        v = fn(*args, **kw)
        v.seconds = time.perf_counter() - t
        return v
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# -- 1: clashes ----------------------------------------------------------------------

PSI = "len(h down {ch}) > 0 & len(h down {dh}) > 0 & y < 0"

CLASH_FIXTURES = {
    "a": (f"a -> gh(h)!1, b -> ch(h)!2, P -> {PSI}, Ca -> {{gh}}, Cset -> {{ch, dh}},"
          " Vb -> {h}, Vset -> {h, y}, A -> true, C -> true"),
    "b": (f"a -> ch(h)?x; gh(h)!1, b -> ch(h)!2, P -> {PSI}, Ca -> {{ch, gh}}, Cset -> {{ch, dh}},"
          " Vb -> {h, x}, Vset -> {h, x, y}, A -> true, C -> true"),
    "c": ("a -> x := y, b -> x := 0, P -> y = x, Ca -> {}, Cset -> {}, Vb -> {x}, Vset -> {x, y},"
          " A -> true, C -> true"),
}

FIXTURE_B_EXPECTED = (f"[ch(h)?x; gh(h)!1]{{true, true}} ({PSI}) -> "
                      f"[ch(h)?x; gh(h)!1 || ch(h)!2]{{true, true}} ({PSI})")


def clash_fixture(key: str):
    """Instantiate the parallel injection axiom with a fixture; returns the formula or the Clash."""
    d = registry_decls().copy()
    sigma = validate_substitution(parse_substitution(CLASH_FIXTURES[key], d), d)
    try:
        return us(sigma, get_axiom("acDropComp").formula)
    except Clash as e:
        return e


@_timed
def check_clashes(cfg: AcceptanceConfig | None = None) -> Verdict:
    a, b, c = (clash_fixture(k) for k in "abc")
    expected = parse("formula", FIXTURE_B_EXPECTED, registry_decls().copy())
    sets_only = us(Substitution().bind("Ca", S.of(Channel("ch"), Channel("gh"), universe=S.CHANS))
                   .bind("Cset", S.of(Channel("ch"), Channel("dh"), universe=S.CHANS))
                   .bind("Vb", S.of(Variable("h", "trace"), Variable("x"), universe=S.VARS))
                   .bind("Vset", S.of(Variable("h", "trace"), Variable("x"), Variable("y"), universe=S.VARS)),
                   get_axiom("acDropComp").formula)
    ch = S.of(Channel("ch"), universe=S.CHANS)
    ok_a = isinstance(a, Clash) and any(S.universe(x) == S.CHANS and S.eq(x, ch) for x in a.atoms)
    ok_b = not isinstance(b, Clash) and normalize_sets(b) == normalize_sets(expected) and "~{dh}" in show(sets_only)
    ok_c = isinstance(c, Clash)
    detail = f"(a) {a if isinstance(a, Clash) else 'no clash'}; (b) {'matches' if ok_b else show(b)}; " \
             f"(c) {c if isinstance(c, Clash) else 'no clash'}"
    return Verdict(1, "substitution clashes", ok_a and ok_b and ok_c, detail)


# -- 2 and 3: bundled derivations ---------------------------------------------------------

EXCHANGE_CLAIM = "[ch(h)!4 || ch(h)?x] 4 = x"
EXCHANGE_HYPOTHESIS = "[ch(h)!4] 4 = val(h down {ch})"


@_timed
def check_exchange(cfg: AcceptanceConfig | None = None) -> Verdict:
    d = registry_decls().copy()
    main = check_proof(load_bundled("exchange"))
    dis = check_proof(load_bundled("exchange_discharge"))
    claim, hyp = parse("formula", EXCHANGE_CLAIM, d), parse("formula", EXCHANGE_HYPOTHESIS, d)
    ok = (main.ok and len(main.hypotheses) == 1 and main.summary() == "proved (1 hypothesis)"
          and main.conclusion == claim and main.formulas[main.hypotheses[0]] == hyp
          and {"acMono", "acBoxesDist", "acDropComp"} <= set(main.axioms_used)
          and dis.ok and not dis.hypotheses and dis.conclusion == hyp)
    detail = f"main {main.summary()} [{show(main.conclusion)}]; discharge {dis.summary()}" \
             f" via {', '.join(dis.axioms_used)}"
    return Verdict(2, "two-party exchange derivation", ok, detail)


DERIVED_AXIOMS = {
    "acMono": {"acG", "acModalMP", "assumptionWeak"},
    "acBoxesDist": {"acMono", "acModalMP"},
}


@_timed
def check_derived(cfg: AcceptanceConfig | None = None) -> Verdict:
    parts, ok = [], True
    for name in DERIVED:
        rep = replay_derived(name)
        used = set(rep.axioms_used)
        good = rep.ok and not rep.hypotheses and not rep.tainted and used == DERIVED_AXIOMS[name]
        ok &= good
        parts.append(f"{name} {rep.summary()} using {{{', '.join(sorted(used))}}}")
    return Verdict(3, "derived monotonicity and distribution", ok, "; ".join(parts))


# -- 4 to 6: substitution corpus ---------------------------------------------------------------

_SUBST_CACHE: dict = {}


def subst_report(cfg: AcceptanceConfig):
    key = (cfg.subst_instances, cfg.seed)
    if key not in _SUBST_CACHE:
        _SUBST_CACHE[key] = usubst_corpus(SubstConfig(instances=cfg.subst_instances, seed=cfg.seed))
    return _SUBST_CACHE[key]


def _subst_detail(rep) -> str:
    c = rep.counts
    return f"{rep.instances} instances, {c['success']} succeeded"


@_timed
def check_output_taboo(cfg: AcceptanceConfig | None = None) -> Verdict:
    cfg = cfg or AcceptanceConfig()
    rep = subst_report(cfg)
    n = rep.violated("output-taboo")
    return Verdict(4, "output taboo covers result", rep.instances >= cfg.subst_instances and n == 0,
                   f"{_subst_detail(rep)}, {n} violations")


@_timed
def check_wellformed_output(cfg: AcceptanceConfig | None = None) -> Verdict:
    cfg = cfg or AcceptanceConfig()
    rep = subst_report(cfg)
    n = rep.violated("wellformed")
    return Verdict(5, "substitution keeps programs well-formed", rep.instances >= cfg.subst_instances and n == 0,
                   f"{_subst_detail(rep)}, {n} violations")


@_timed
def check_taboo_independence(cfg: AcceptanceConfig | None = None) -> Verdict:
    """Star's two passes are compared inside the substitution itself, which raises on mismatch."""
    cfg = cfg or AcceptanceConfig()
    rep = subst_report(cfg)
    n = rep.violated("taboo-independence")
    pairs, stars = rep.counts["compared pairs"], rep.counts["star passes"]
    ok = rep.instances >= cfg.subst_instances and n == 0 and pairs > 0 and stars > 0
    return Verdict(6, "taboo independence", ok,
                   f"{pairs} compared pairs, {stars} repetition second passes equal, {n} violations")


# -- 7: axiom instances ----------------------------------------------------------------------

@_timed
def check_instances(cfg: AcceptanceConfig | None = None) -> Verdict:
    cfg = cfg or AcceptanceConfig()
    bad, sizes = [], []
    for name in INSTANCES:
        r = validate_instance(name, cfg.instance_samples)
        sizes.append(r.checked)
        if not r.valid or r.checked < cfg.min_states:
            bad.append(name)
    exempt = ", ".join(f"{k} ({v})" for k, v in EXEMPT.items())
    detail = (f"{len(INSTANCES)} instances, {min(sizes)}..{max(sizes)} states each, "
              f"failing: {bad or 'none'}")
    return Verdict(7, "axiom instances valid on samples", not bad and len(INSTANCES) >= 12, detail,
                   notes=[f"exempt: {exempt}"])


# -- 8: trace algebra ------------------------------------------------------------------------

@_timed
def check_trace_algebra(cfg: AcceptanceConfig | None = None) -> Verdict:
    cfg = cfg or AcceptanceConfig()
    orc = instance_oracle()
    rng = random.Random(cfg.seed)
    from .oracle import State

    empty = State({})
    unequal, disagree = Counter(), Counter()
    for name in TRACE_ALGEBRA:
        for _ in range(cfg.trace_samples):
            f = ground_trace_instance(name, rng)
            if not orc.eval_formula(empty, f):
                unequal[name] += 1
            for side in (e for pair in equations(f) for e in pair):
                if orc.eval_term(empty, trace_simplify(side)) != orc.eval_term(empty, side):
                    disagree[name] += 1
    ok = not unequal and not disagree
    detail = (f"{len(TRACE_ALGEBRA)} laws x {cfg.trace_samples} samples, "
              f"unequal: {dict(unequal) or 'none'}, simplifier disagreements: {dict(disagree) or 'none'}")
    return Verdict(8, "trace algebra against the oracle", ok, detail)


# -- 9: statics against the oracle ---------------------------------------------------------------

@_timed
def check_statics(cfg: AcceptanceConfig | None = None) -> Verdict:
    cfg = cfg or AcceptanceConfig()
    rep = statics_oracle_corpus(StaticsConfig(instances=cfg.statics_instances, seed=cfg.seed))
    kinds = {k[len("violation "):]: v for k, v in rep.counts.items() if k.startswith("violation ")}
    return Verdict(9, "bound effect and coincidence", rep.instances >= cfg.statics_instances and rep.ok,
                   f"{rep.instances} instances, violations: {kinds or 'none'}")


# -- 10: ground set algebra ------------------------------------------------------------------------

SET_POOL = tuple(Channel(n) for n in ("ch", "dh", "gh", "kh", "mh"))


def ground_sets(pool=SET_POOL) -> list:
    """Every finite and cofinite channel set whose atoms come from `pool`."""
    out = []
    for bits in itertools.product((False, True), repeat=len(pool)):
        atoms = tuple(c for c, b in zip(pool, bits) if b)
        out += [S.of(*atoms, universe=S.CHANS), S.Cofinite(S.CHANS, atoms)]
    return out


def _closure(f):
    for v in sorted(statics(f).fv.atoms, key=str):
        f = Forall(v, f)
    return f


@_timed
def check_set_axioms(cfg: AcceptanceConfig | None = None) -> Verdict:
    sets = ground_sets()
    probes = (*SET_POOL, *S._fresh_probes(S.CHANS, set(SET_POOL))[:1])
    failures, checked = Counter(), 0
    for name in SET_AXIOMS:
        ax = get_axiom(name).formula
        for a in sets:
            for b in sets:
                f = _closure(us(Substitution().bind("Cset", a).bind("Cset2", b), ax))
                checked += 1
                if decide_set_formula(f) is not True:
                    failures[name] += 1
    # extensional equality agrees with pointwise membership
    for a in sets:
        for b in sets:
            checked += 1
            if S.eq(a, b) != all(S.member(c, a) == S.member(c, b) for c in probes):
                failures["eq vs membership"] += 1
    return Verdict(10, "finite and cofinite set laws", not failures,
                   f"{len(sets)} ground sets, {checked} cases, failures: {dict(failures) or 'none'}")


# -- 11: kernel mutation resistance -------------------------------------------------------------------

@_timed
def check_mutations(cfg: AcceptanceConfig | None = None) -> Verdict:
    cfg = cfg or AcceptanceConfig()
    tally, silent = Counter(), []
    for name in bundled_scripts():
        lib = library_before(name) if name in DERIVED else None
        for o in mutation_campaign(bundled_script_text(name), cfg.mutations, cfg.seed, lib):
            tally[o.verdict] += 1
            if o.verdict == "silent":
                silent.append(f"{name}:{o.mutation.line} {o.mutation.operator}")
    return Verdict(11, "kernel rejects mutated scripts", not silent,
                   f"{sum(tally.values())} mutations over {len(bundled_scripts())} scripts, "
                   f"{dict(tally)}, silent: {silent or 'none'}")


CHECKS = (check_clashes, check_exchange, check_derived, check_output_taboo, check_wellformed_output,
          check_taboo_independence, check_instances, check_trace_algebra, check_statics,
          check_set_axioms, check_mutations)


def run_all(cfg: AcceptanceConfig | None = None) -> list[Verdict]:
    cfg = cfg or AcceptanceConfig()
    return [check(cfg) for check in CHECKS]

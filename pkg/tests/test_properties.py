import random

import pytest

from dlchp import sets as S
from dlchp.axioms import TRACE_ALGEBRA, trace_simplify
from dlchp.instances import (
    EXEMPT, INSTANCES, equations, ground_trace_instance, instance, instance_oracle, trace_literal, validate_instance,
)
from dlchp.oracle import State
from dlchp.properties import (
    StaticsConfig, SubstConfig, _retrace, corpus_interp, statics_oracle_corpus, usubst_corpus,
)
from dlchp.generators import Gen
from dlchp.sets import Channel
from dlchp.syntax import ProgConst, subnodes, SpacePred, FuncApp, PredApp


def test_small_substitution_corpus():
    rep = usubst_corpus(SubstConfig(instances=60, seed=11))
    assert rep.instances == 60
    assert rep.ok, rep.violations
    assert rep.counts["success"] > 0


def test_small_statics_corpus():
    rep = statics_oracle_corpus(StaticsConfig(instances=40, seed=5))
    assert rep.instances == 40
    assert rep.ok, rep.violations


def test_corpus_is_deterministic():
    a = usubst_corpus(SubstConfig(instances=20, seed=2))
    b = usubst_corpus(SubstConfig(instances=20, seed=2))
    assert a.counts == b.counts


def test_retrace_keeps_projection():
    g = Gen(4)
    tr = (("ch", 1, 0), ("dh", 2, 0), ("gh", 0, 1))
    keep = S.of(Channel("ch"), Channel("gh"), universe=S.CHANS)
    for _ in range(20):
        out = _retrace(g, tr, keep)
        assert [e for e in out if e[0] in ("ch", "gh")] == [("ch", 1, 0), ("gh", 0, 1)]


def test_corpus_interp_space_predicate_parity():
    i = corpus_interp()
    assert i.spreds["P"](State({})) is True


@pytest.mark.parametrize("name", sorted(INSTANCES))
def test_instances_are_closed(name):
    f = instance(name).formula
    assert not any(isinstance(n, (ProgConst, SpacePred, FuncApp, PredApp)) for n in subnodes(f))


@pytest.mark.parametrize("name", ["assign", "acDropComp", "comDual"])
def test_instance_valid_on_a_sample(name):
    rep = validate_instance(name, 40)
    assert rep.valid, str(rep)


def test_exempt_axioms_are_not_instantiated():
    assert not set(EXEMPT) & {ax for ax, _ in INSTANCES.values()}


def test_trace_literal_roundtrip():
    orc = instance_oracle()
    tr = (("ch", 1, 0), ("dh", 2, 1))
    assert orc.eval_term(State({}), trace_literal(tr)) == tr
    assert orc.eval_term(State({}), trace_literal(())) == ()


@pytest.mark.parametrize("name", sorted(TRACE_ALGEBRA))
def test_trace_laws_on_a_few_samples(name):
    rng = random.Random(name)
    orc = instance_oracle()
    for _ in range(15):
        f = ground_trace_instance(name, rng)
        assert orc.eval_formula(State({}), f)
        for l, r in equations(f):
            assert orc.eval_term(State({}), trace_simplify(l)) == orc.eval_term(State({}), l)

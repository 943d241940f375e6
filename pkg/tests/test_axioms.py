import random

import pytest

from dlchp import sets as S
from dlchp.axioms import (
    CALCULUS, SET_AXIOMS, TRACE_ALGEBRA, UnknownAxiom, axiom_ids, decide_set_formula, decls,
    get_axiom, registry, trace_simplify,
)
from dlchp.instances import (
    EXEMPT, INSTANCES, equations, ground_trace_instance, instance, instance_oracle, validate_instance,
)
from dlchp.oracle import State, validate_on_samples
from dlchp.instances import STATE_VARS
from dlchp.syntax import check_wellformed
from dlchp.textio import parse, show


def P(kind, text):
    return parse(kind, text, decls().copy())


def test_assign_axiom_text():
    assert show(get_axiom("assign").formula) == "[x := f] p(x) <-> p(f)"


def test_drop_comp_annotations():
    text = show(get_axiom("acDropComp").formula)
    assert "b{~Cset | Ca}{~Vset | TVar | {mu, mu'}}" in text


def test_proj_neutral():
    assert get_axiom("projNeutral").formula == P("formula", "eps down Cset = eps")


def test_unknown_axiom():
    with pytest.raises(UnknownAxiom):
        get_axiom("nope")


def test_registry_is_wellformed_and_grouped():
    reg = registry()
    assert set(CALCULUS) <= set(reg) and set(TRACE_ALGEBRA) <= set(reg) and set(SET_AXIOMS) <= set(reg)
    assert len(axiom_ids("trace")) == 14
    assert get_axiom("acG").kind == "rule" and get_axiom("acG").arity == 1
    for e in reg.values():
        assert not check_wellformed(e.formula)


@pytest.mark.parametrize("text, expected", [
    ("val(<ch, 4, 2>)", "4"),
    ("(h down {ch, dh}) down {dh}", "h down {dh}"),
    ("(eps . <ch, 1, 0> . <ch, 2, 1>)[0]", "<ch, 1, 0>"),
    ("len(h . <ch, 1, 0> . <dh, 2, 1>)", "len(h) + 2"),
    ("(h . <ch, 1, 0>) down {dh}", "h down {dh}"),
    ("stamp(h . <ch, 1, 5>)", "5"),
])
def test_trace_simplify(text, expected):
    assert show(trace_simplify(P("term", text))) == expected


def test_trace_simplify_is_idempotent_on_samples():
    rng = random.Random(3)
    for name in TRACE_ALGEBRA:
        for _ in range(20):
            for l, r in equations(ground_trace_instance(name, rng)):
                for t in (l, r):
                    once = trace_simplify(t)
                    assert trace_simplify(once) == once


@pytest.mark.parametrize("text, expected", [
    ("ch in {ch, dh}", True),
    ("~{ch, dh} | {ch, gh} == ~{dh}", True),
    ("ch in Cset", None),
    ("!gh in {ch}", True),
    ("forall e (e in {ch} -> e in {ch, dh})", True),
    ("forall e e in {ch}", False),
    ("forall e (e in ~{} & forall e e in ~{})", True),
    ("forall e ((forall e e in {ch}) | e in ~{})", True),
])
def test_decide_set_formula(text, expected):
    assert decide_set_formula(P("formula", text)) is expected


def test_instance_library_covers_required_axioms():
    assert len(INSTANCES) >= 12
    covered = {instance(n).axiom for n in INSTANCES}
    assert {"assign", "nondetAssign", "test", "boxesDual", "acComposition", "acChoice", "acNoCom", "acWeak",
            "acCom", "send", "comDual", "acModalMP", "assumptionWeak", "acDropComp"} <= covered
    assert not covered & set(EXEMPT)


@pytest.mark.parametrize("name", ["assign", "send", "acDropComp"])
def test_instances_are_valid(name):
    rep = validate_instance(name)
    assert rep.valid and rep.checked >= 64


def test_oracle_refutes_a_broken_instance():
    bad = parse("formula", "[ch(h)!x] val(h down {ch}) = x + 1", decls().copy())
    rep = validate_on_samples(bad, STATE_VARS, instance_oracle())
    assert not rep.valid

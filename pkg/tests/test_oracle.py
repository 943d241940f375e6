from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dlchp.generators import Gen, GenConfig, signature, sorted_program
from dlchp.oracle import (
    FragmentError, Oracle, OracleConfig, State, check_denotation, parse_state, validate_on_samples,
)
from dlchp.properties import corpus_interp
from dlchp.sets import MU, Variable
from dlchp import syntax as A
from dlchp.textio import parse

D = signature()
x, y, h = Variable("x"), Variable("y"), Variable("h", "trace")


def P(kind, text):
    return parse(kind, text, D)


def orc(**kw):
    return Oracle(corpus_interp(), OracleConfig(channels=("ch", "dh", "gh"), **kw))


def test_term_values():
    v = State({h: [("ch", 4, 0)]})
    o = orc()
    assert o.eval_term(v, P("term", "val(h down {ch})")) == 4
    assert o.eval_term(v, P("term", "len(eps)")) == 0
    assert o.eval_term(v, P("term", "val(h down {dh})")) == 0
    assert o.eval_term(v, P("term", "g(x, f)")) == 1


def test_assign_denotation():
    v = State({x: 0})
    assert orc().denote(v, P("program", "x := 1")) == {((), None), ((), v.set(x, Fraction(1)))}


def test_send_denotation_is_prefix_closure():
    v = State({MU: 2})
    ev = (("h", "ch", Fraction(4), Fraction(2)),)
    assert orc().denote(v, P("program", "ch(h)!4")) == {((), None), (ev, None), (ev, v)}


def test_par_handshake():
    v = State()
    comps = orc().denote(v, P("program", "ch(h)!4 || ch(h)?x"))
    done = [(t, w) for t, w in comps if w is not None]
    assert done and all(len(t) == 1 and t[0][2] == 4 and w.get(x) == 4 for t, w in done)


@pytest.mark.parametrize("text", [
    "[x := 1] x = 1",
    "[ch(h)!1]{!true, 1 = 1} 0 = 1",
    "[ch(h)!4 || ch(h)?x] 4 = x",
    "[ch(h)!4] 4 = val(h down {ch})",
])
def test_true_formulas(text):
    rep = validate_on_samples(P("formula", text), (x, y, h, MU), orc())
    assert rep.valid


def test_counterexample():
    rep = validate_on_samples(P("formula", "x >= 1"), (x,), orc())
    assert not rep.valid and rep.counterexample.get(x) == 0


def test_odes_are_outside_the_fragment():
    with pytest.raises(FragmentError):
        orc().denote(State(), P("program", "{x' = 1}"))


def test_uninterpreted_symbol():
    with pytest.raises(FragmentError):
        Oracle().eval_formula(State(), P("formula", "q"))


def test_parse_state():
    v = parse_state("x=1, y=1/2, h=[(ch,4,0)]", D)
    assert v.get(y) == Fraction(1, 2) and v.get(h) == (("ch", Fraction(4), Fraction(0)),)


def test_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(fuel=0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_denotations_are_prefix_closed_total_chronological(seed):
    g = Gen(seed, GenConfig(depth=3, prog_consts=False))
    a = sorted_program(g, D, 3)
    v = State({x: 1, MU: 1, h: [("dh", 1, 0)]})
    assert check_denotation(v, orc(fuel=2).denote(v, a)) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_par_commutes_and_test_true_is_identity(seed):
    g = Gen(seed, GenConfig(depth=3, prog_consts=False))
    par = g.parallel(3)
    v = State({x: 1, y: 2})
    o = orc(fuel=2)
    if not isinstance(par, A.Par):
        return
    assert o.denote(v, par) == o.denote(v, A.Par(par.r, par.l))
    a = par.l
    assert o.denote(v, A.Seq(A.Test(A.TRUE), a)) == o.denote(v, a)
    assert o.denote(v, A.Choice(a, a)) == o.denote(v, a)

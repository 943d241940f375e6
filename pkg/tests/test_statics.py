from hypothesis import given, settings, strategies as st

from dlchp import sets as S
from dlchp.generators import Gen, signature, sorted_program
from dlchp.sets import MU, MU_PRIME, Channel, Variable
from dlchp.statics import statics
from dlchp.textio import parse, show_set

D = signature()
x, y, h = Variable("x"), Variable("y"), Variable("h", "trace")
ch, gh = Channel("ch"), Channel("gh")


def sets_of(kind, text, decls=D):
    return statics(parse(kind, text, decls))


def test_trace_variable_accesses_every_channel():
    r = sets_of("term", "h")
    assert r.fv == S.of(h) and r.cn == S.ALL_CHANS


def test_projection_restricts_channels():
    r = sets_of("term", "h down {ch}")
    assert r.fv == S.of(h) and r.cn == S.of(ch)


def test_differential_adds_primes():
    r = sets_of("term", "(x * y)'")
    assert r.fv == S.of(x, y, x.prime(), y.prime())
    assert S.is_empty(r.cn)


def test_box_removes_must_bound():
    r = sets_of("formula", "[x := 5] x >= y")
    assert r.fv == S.of(y) and S.is_empty(r.cn)


def test_quantifier_and_channel_arguments():
    r = sets_of("formula", "pred pp(real, real); forall x pp({ch}, x, y)")
    # real arguments access no channel, whatever the restriction says
    assert r.fv == S.of(y) and S.is_empty(r.cn)
    r = sets_of("formula", "pred pt1(trace); forall x pt1({ch}, h)")
    assert r.fv == S.of(h) and r.cn == S.of(ch)


def test_acbox_collects_assumption_and_commitment():
    text = "pred qa(trace); [ch(h)!4]{qa({ch}, h), qa({ch}, h)} qa({ch}, h)"
    r = sets_of("formula", text)
    assert S.member(h, r.fv) and r.cn == S.of(ch)


def test_send_and_receive():
    r = sets_of("program", "ch(h)?x; gh(h)!1")
    assert r.fv == S.of(h, MU)
    assert r.bv == S.of(x, h) and r.mbv == S.of(x, h)
    assert r.cn == S.of(ch, gh)
    assert S.subset_eq(r.bv, S.union(r.fv, S.of(x)))


def test_ode_binds_global_time():
    r = sets_of("program", "{x' = 1 & true}")
    assert r.bv == S.of(x, x.prime(), MU, MU_PRIME)
    assert S.member(MU, r.fv)


def test_program_constant_defaults():
    r = sets_of("program", "a{{ch}}{{h, x}}")
    assert r.fv == S.union(S.RVAR, S.TVAR)
    assert r.bv == S.of(h, x) and S.is_empty(r.mbv) and r.cn == S.of(ch)


def test_choice_must_bound_is_intersection():
    r = sets_of("program", "x := 1 ++ x := 2; y := 3")
    assert r.mbv == S.of(x)
    assert r.bv == S.of(x, y)


def test_sequence_hides_must_bound_reads():
    r = sets_of("program", "x := 1; y := x")
    assert r.fv == S.NO_VARS


def test_star_has_no_must_bound():
    r = sets_of("program", "(x := 1)*")
    assert S.is_empty(r.mbv) and r.bv == S.of(x)


def test_printing_is_canonical():
    r = sets_of("program", "ch(h)?x")
    assert show_set(r.bv) == "{x, h}"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_mbv_within_bv(seed):
    r = statics(sorted_program(Gen(seed), D, 5))
    assert S.subset_eq(r.mbv, r.bv)

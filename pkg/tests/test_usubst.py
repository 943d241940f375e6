import pytest
from hypothesis import given, settings, strategies as st

from dlchp import sets as S
from dlchp.generators import Gen, GenConfig, signature, sorted_program
from dlchp.sets import MU, MU_PRIME, Channel, Variable
from dlchp.statics import statics
from dlchp.syntax import check_wellformed
from dlchp.textio import parse, parse_decls, parse_substitution, show
from dlchp.usubst import (
    EMPTY_TABOO, TOTAL_TABOO, Clash, Substitution, SubstitutionError, Taboo, apply, project_term, us,
    usub_formula, usub_program, usub_term, validate_substitution,
)

D = signature()
x, y, h = Variable("x"), Variable("y"), Variable("h", "trace")


def sub(text, decls=D):
    return validate_substitution(parse_substitution(text, decls), decls)


def P(kind, text):
    return parse(kind, text, D)


def test_function_replacement_plugs_arguments():
    decls = parse_decls("func fu(real): real;", D)
    sigma = sub("fu(.) -> . + 1", decls)
    assert show(usub_term(sigma, EMPTY_TABOO, parse("term", "fu(y)", decls))) == "y + 1"


def test_function_replacement_clashes_with_taboo():
    decls = parse_decls("func fu(real): real;", D)
    sigma = sub("fu(.) -> x + .", decls)
    with pytest.raises(Clash) as e:
        usub_term(sigma, Taboo(S.of(x), S.NO_CHANS), parse("term", "fu(0)", decls))
    assert e.value.phase == "taboo" and "x" in str(e.value)


def test_identity_substitution():
    f = P("formula", "[ch(h)!x; x := *] x >= y")
    assert us(Substitution(), f) == f
    assert usub_formula(Substitution(), TOTAL_TABOO, f) == f


def test_capture_under_quantifier():
    with pytest.raises(Clash) as e:
        us(sub("r(.) -> . >= y"), P("formula", "forall y r(x)"))
    assert e.value.atoms[0] == S.of(y)


def test_assign_axiom_instance():
    decls = parse_decls("pred pp(real);", D)
    f = parse("formula", "[x := f] pp(x) <-> pp(f)", decls)
    sigma = sub("f -> y + 1, pp(.) -> . >= 2", decls)
    assert show(us(sigma, f)) == "[x := y + 1] x >= 2 <-> y + 1 >= 2"


def test_projection_push_down():
    assert project_term(h, S.of(Channel("ch"))) == P("term", "h down {ch}")
    assert project_term(P("term", "h down {ch, dh}"), P("set", "{dh}")) == P("term", "h down {dh}")


def test_projection_leaves_literal_items():
    # a literal item reads no channel history, so state projection cannot change it
    item = P("term", "<ch, 1, 2>")
    assert project_term(item, P("set", "{dh}")) == item


def test_program_constant_replacement():
    out, W = apply(sub("a -> ch(h)?x; {y' = x & true}"), P("program", "a"))
    assert show(out) == "ch(h)?x; {y' = x}"
    assert W.vars == S.of(x, y, y.prime(), MU, MU_PRIME, h) and W.chans == S.of(Channel("ch"))


def test_program_constant_channel_bound():
    with pytest.raises(Clash) as e:
        apply(sub("a -> ch(h)!2"), P("program", "a{{dh}}{{h}}"))
    assert e.value.phase == "progconst-bound"


def test_star_fixpoint():
    out, W = apply(sub("q -> y >= 0"), P("program", "(?q; x := 1)*"))
    assert show(out) == "(?y >= 0; x := 1)*"
    assert W.vars == S.of(x)


def test_star_second_pass_sees_loop_bound_variables():
    # later iterations run after x := 1, so q may not start reading x
    with pytest.raises(Clash) as e:
        apply(sub("q -> x >= 0"), P("program", "(?q; x := 1)*"))
    assert e.value.atoms[0] == S.of(x)


def test_star_second_pass_clash():
    with pytest.raises(Clash):
        apply(sub("f -> x"), P("program", "(y := f; x := 1)*"))


def test_par_context_blocks_sibling_reads():
    with pytest.raises(Clash):
        apply(sub("f -> x"), P("program", "x := 1 || y := f"))
    out, _ = apply(sub("f -> z"), P("program", "x := 1 || y := f"))
    assert show(out) == "x := 1 || y := z"


def test_validation_errors():
    with pytest.raises(SubstitutionError):
        validate_substitution(Substitution().bind("f", P("term", "val(h)")), D)
    with pytest.raises(SubstitutionError):
        validate_substitution(Substitution().bind("q", P("program", "x := 1")), D)
    assert validate_substitution(sub("r(.) -> . >= 0"), D)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_taboo_monotonicity(seed):
    g = Gen(seed)
    prog = sorted_program(g, D)
    if check_wellformed(prog):
        return
    try:
        sigma = validate_substitution(g.substitution(), D)
        out, W = usub_program(sigma, g.taboo(), g.context(), prog)
    except (SubstitutionError, Clash):
        return
    out2, W2 = usub_program(sigma, EMPTY_TABOO, S.NO_VARS, prog)
    assert out2 == out
    assert S.subset_eq(W2.vars, W.vars) and S.subset_eq(W2.chans, W.chans)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_bound_and_free_propagation(seed):
    g = Gen(seed, GenConfig(depth=3))
    prog = sorted_program(g, D)
    if check_wellformed(prog):
        return
    try:
        sigma = validate_substitution(g.substitution(), D)
        Z = g.taboo()
        out, _ = usub_program(sigma, Z, S.NO_VARS, prog)
    except (SubstitutionError, Clash):
        return
    assert S.subset_eq(statics(out).bv, statics(prog).bv)
    assert S.subset_eq(statics(out).fv, S.union(statics(prog).fv, S.complement(Z.vars)))


def test_determinism_of_clash_reports():
    f = P("formula", "forall y r(x)")
    msgs = set()
    for _ in range(3):
        try:
            us(sub("r(.) -> . >= y"), f)
        except Clash as e:
            msgs.add(str(e))
    assert len(msgs) == 1

import pytest
from hypothesis import given, settings, strategies as st

from dlchp.generators import Gen, signature, sorted_program
from dlchp import syntax
from dlchp.sets import Variable
from dlchp.syntax import (
    And, Assign, Par, Not, RealLit, SortError, TRUE, Imply, check_wellformed,
    normalize_sets, power, sort_check, symbols,
)
from dlchp.textio import ParseError, parse, parse_decls, show, show_unicode, tokenize

D = signature()


def sorted_formula(seed):
    g = Gen(seed)
    while True:
        try:
            return sort_check(g.formula(3), D)
        except ValueError:
            continue


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_formula_round_trip(seed):
    f = sorted_formula(seed)
    assert normalize_sets(parse("formula", show(f), D)) == normalize_sets(f)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_program_round_trip(seed):
    a = sorted_program(Gen(seed), D, 4)
    text = show(a)
    assert normalize_sets(parse("program", text, D)) == normalize_sets(a)
    assert show(parse("program", text, D)) == text


@pytest.mark.parametrize("text", [
    "[x := f] r(x) <-> r(f)",
    "[ch(h)!4 || ch(h)?x] 4 = x",
    "[a{~{}}{TVar}]{true, len(h down {ch}) >= 0} P",
    "forall x (x >= 0 -> x * x >= 0)",
    "val(h . <ch, 1, mu>) = 1",
    "h2 pre h",
])
def test_printer_is_a_fixpoint(text):
    f = parse("formula", text, D)
    assert show(parse("formula", show(f), D)) == show(f)


def test_derived_connectives_desugar():
    f = parse("formula", "q -> q", D)
    q = f.f.l
    assert f == Imply(q, q)
    assert show(f) == "q -> q"


def test_precedence_seq_binds_tighter_than_choice():
    a = parse("program", "x := 1; y := 2 ++ z := 3", D)
    assert show(a) == "x := 1; y := 2 ++ z := 3"
    assert type(a).__name__ == "Choice"


def test_parse_error_location():
    with pytest.raises(ParseError) as e:
        parse("formula", "[x := ] x >= 0", D)
    assert (e.value.line, e.value.col) == (1, 7)


def test_unknown_symbol_is_rejected():
    with pytest.raises(ParseError):
        parse("formula", "nope(x) >= 0", D)


def test_sort_errors():
    with pytest.raises((SortError, ParseError)):
        parse("formula", "h >= 1", D)
    with pytest.raises((SortError, ParseError)):
        parse("program", "x := h", D)


def test_declarations_header():
    f = parse("formula", "real w; func k2: real; w >= k2", D)
    assert "k2" in symbols(f)
    d = parse_decls("chan kh; trace h3;")
    assert d.vars["h3"] == "trace" and "kh" in d.chans


def test_tokens_carry_positions():
    toks = tokenize("x :=\n  y")
    assert [(t.text, t.line, t.col) for t in toks[:3]] == [("x", 1, 1), (":=", 1, 3), ("y", 2, 3)]


def test_unicode_view():
    f = parse("formula", "[ch(h)!mu] len(h . eps) >= 0", D)
    assert show_unicode(f) == "[ch(h)!μ] len(h . ε) ≥ 0"


def test_power():
    a = Assign(Variable("x"), RealLit(1))
    assert power(a, 0) == syntax.Test(TRUE)
    assert show(power(a, 2)) == "x := 1; x := 1; ?true"


def test_wellformed_par_rejects_shared_writes():
    bad = Par(Assign(Variable("x"), RealLit(1)), Assign(Variable("x"), RealLit(2)))
    assert check_wellformed(bad)
    ok = parse("program", "x := 1 || y := 2", D)
    assert not check_wellformed(ok)


def test_negation_prints_compactly():
    f = Not(And(TRUE, TRUE))
    assert parse("formula", show(f), D) == f

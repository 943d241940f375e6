import pytest

from dlchp.axioms import decls as registry_decls
from dlchp.kernel import (
    DERIVED, ArithOracle, bundled_script_text, bundled_scripts, check_proof, check_text, default_library, load_bundled,
    parse_script, replay_derived, tautology, uniform_rename, RenameError,
)
from dlchp.sets import Channel, MU, Variable
from dlchp.textio import ParseError, parse, show

D = registry_decls()


def F(text, decls=None):
    return parse("formula", text, (decls or D).copy())


ASSIGN = """
pred pp(real);
step s1 axiom assign
step s2 us s1 {f -> y + 1, p(.) -> . >= 2}
qed [x := y + 1] x >= 2 <-> y + 1 >= 2
"""


def test_assign_instance_proves():
    rep = check_text(ASSIGN)
    assert rep.ok and rep.clean and rep.exit_code == 0
    assert show(rep.conclusion) == "[x := y + 1] x >= 2 <-> y + 1 >= 2"
    assert rep.axioms_used == ("assign",)


def test_mp_mismatch_fails():
    text = """
step s1 axiom assign
step s2 us s1 {f -> y, p(.) -> . >= y}
step s3 taut x >= y -> x >= y
step s4 mp s3 s2
qed x >= y
"""
    rep = check_text(text)
    assert not rep.ok and rep.failed_step == "s4" and rep.reason.startswith("mismatch:")
    assert rep.exit_code == 1


def test_qed_must_match_last_step():
    rep = check_text(ASSIGN.replace("qed [x := y + 1] x >= 2", "qed [x := y + 2] x >= 2"))
    assert not rep.ok


def test_script_parse_errors():
    with pytest.raises(ParseError):
        parse_script("step s1 axiom assign\n")
    with pytest.raises(ParseError):
        parse_script("step s1 axiom assign\nstep s1 axiom test\nqed true\n")
    with pytest.raises(ParseError):
        parse_script("step s1 frobnicate\nqed true\n")


def test_unknown_axiom_fails_cleanly():
    rep = check_text("step s1 axiom nope\nqed true\n")
    assert not rep.ok and rep.failed_step == "s1"


def test_rule_with_identity_substitution_reproduces_rule():
    text = """
step s1 premise C{~{}}{TVar} & P
step s2 rule acG {} s1
qed [a]{A{~{}}{TVar}, C{~{}}{TVar}} P
"""
    rep = check_text(text)
    assert rep.ok and rep.conclusion == default_library()["acG"].conclusion
    assert rep.summary() == "proved (derived rule with 1 premise)"


def test_us_into_premise_dependent_fact_is_rejected():
    text = """
step s1 premise x >= 0
step s2 us s1 {}
qed x >= 0
"""
    rep = check_text(text)
    assert not rep.ok and "premises" in rep.reason


def test_hypothesis_gives_exit_three():
    rep = check_text("step s1 hyp x >= 0\nqed x >= 0\n")
    assert rep.ok and not rep.clean and rep.exit_code == 3
    assert rep.summary() == "proved (1 hypothesis)"


def test_arith_taints():
    rep = check_text("step s1 arith x * x >= 0\nqed x * x >= 0\n")
    assert rep.ok and rep.tainted == ("s1",) and rep.exit_code == 3
    rep = check_text("step s1 arith x >= 1\nqed x >= 1\n")
    assert not rep.ok


def test_arith_oracle_fragment():
    a = ArithOracle()
    assert a.valid(F("forall x (x >= 0 -> x + 1 > 0)"))
    assert not a.valid(F("x >= 0"))
    assert not a.in_fragment(F("len(h) >= 0"), D)


def test_tautology():
    p, q = F("x >= 0"), F("[a] P")
    assert tautology(F("x >= 0 -> x >= 0"))
    assert tautology(q, [F("x >= 0 -> [a] P"), p])
    assert not tautology(q, [p])


def test_set_and_trace_facts():
    assert check_text("step s1 setfact ~{ch, dh} | {ch, gh} == ~{dh}\nqed ~{ch, dh} | {ch, gh} == ~{dh}\n").ok
    assert not check_text("step s1 setfact ch in {dh}\nqed ch in {dh}\n").ok
    assert check_text("step s1 tracefact val(h . <ch, 4, mu>) = 4\nqed val(h . <ch, 4, mu>) = 4\n").ok


def test_rename_examples():
    x, y = Variable("x"), Variable("y")
    assert uniform_rename(F("[x := 5] x = 5"), x, y) == F("[y := 5] y = 5")
    dec = D.copy()
    src = F("pred pw(chan, trace, real); [ch(h)?x] pw({ch}, ch, h, x)", dec)
    out = uniform_rename(src, Channel("ch"), Channel("dh"))
    assert show(out) == "[dh(h)?x] pw({dh}, dh, h, x)"
    phi = F("[x := y] x >= y")
    assert uniform_rename(phi, x, x) == phi
    assert uniform_rename(uniform_rename(phi, x, y), x, y) == phi


def test_rename_rejects_global_time():
    with pytest.raises(RenameError):
        uniform_rename(F("x >= 0"), Variable("x"), MU)


def test_rename_step_in_script():
    text = "step s1 axiom assign\nstep s2 rename s1 x <-> y\nqed [y := f] p(y) <-> p(f)\n"
    assert check_text(text).ok


def test_contextual_equivalence_step():
    text = """
step s1 taut (x >= 0 & true) <-> x >= 0
step s2 ce s1 [a](x >= 0 & true)
qed [a](x >= 0 & true) <-> [a] x >= 0
"""
    rep = check_text(text)
    assert rep.ok


@pytest.mark.parametrize("name", DERIVED)
def test_replay_derived(name):
    rep = replay_derived(name)
    assert rep.ok and rep.clean


def test_derived_lemmas_are_registered():
    lib = default_library()
    assert lib["acMono"].kind == "rule" and lib["acMono"].arity == 3
    assert lib["acBoxesDist"].kind == "axiom"


def test_bundled_scripts_are_deterministic():
    for name in bundled_scripts():
        r1 = check_proof(load_bundled(name), None if name not in DERIVED else default_library())
        r2 = check_proof(load_bundled(name), None if name not in DERIVED else default_library())
        assert r1.render() == r2.render()


def test_corrupted_script_fails():
    broken = bundled_script_text("exchange_discharge").replace("f -> 4", "f -> 5")
    assert not check_text(broken).ok

import random

import pytest

from dlchp.kernel import DERIVED, bundled_script_text, bundled_scripts, library_before
from dlchp.mutation import OPERATORS, Mutation, apply, judge, mutate, mutation_campaign

ASSIGN = """step s1 axiom assign
step s2 us s1 {f -> y + 1, p(.) -> . >= 2}
qed [x := y + 1] x >= 2 <-> y + 1 >= 2
"""


def test_mutate_changes_exactly_one_step_line():
    rng = random.Random(3)
    text = bundled_script_text("exchange_discharge")
    for _ in range(30):
        m = mutate(text, rng)
        assert m.operator in OPERATORS
        assert m.before.lstrip().startswith("step ")
        out = apply(text, m).splitlines()
        old = text.splitlines()
        if m.after is None:
            assert len(out) == len(old) - 1
        else:
            assert sum(a != b for a, b in zip(out, old)) == 1
        assert out[-1].startswith("qed")


def test_mutation_is_seeded():
    text = bundled_script_text("acMono")
    a = [mutate(text, random.Random(7)) for _ in range(3)]
    b = [mutate(text, random.Random(7)) for _ in range(3)]
    assert a == b


def test_judge_verdicts():
    deleted = Mutation("delete", 1, "step s1 axiom assign", None)
    assert judge(ASSIGN, deleted).verdict == "rejected"
    other = Mutation("binding", 2, "", "step s2 us s1 {f -> y + 2, p(.) -> . >= 2}")
    assert judge(ASSIGN, other).verdict == "rejected"      # the qed line no longer matches
    same = Mutation("binding", 2, "", "step s2 us s1 {p(.) -> . >= 2, f -> y + 1}")
    assert judge(ASSIGN, same).verdict == "silent"


def test_campaign_needs_a_checking_script():
    with pytest.raises(ValueError):
        mutation_campaign(ASSIGN.replace("y + 1 >= 2\n", "y >= 2\n"), n=1)


@pytest.mark.parametrize("name", ["exchange_discharge", "acMono"])
def test_small_campaign_has_no_silent_mutants(name):
    lib = library_before(name) if name in DERIVED else None
    out = mutation_campaign(bundled_script_text(name), n=10, seed=1, library=lib)
    assert len(out) == 10
    assert all(o.verdict != "silent" for o in out)


def test_bundled_scripts_listed():
    assert set(bundled_scripts()) >= {"exchange", "exchange_discharge", *DERIVED}

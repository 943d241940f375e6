import io
import json

import pytest

from dlchp.cli import run
from dlchp.kernel import bundled_script_text


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def exchange(tmp_path):
    p = tmp_path / "exchange.proof"
    p.write_text(bundled_script_text("exchange"), encoding="utf-8")
    return str(p)


def test_check_exchange(exchange):
    code, out, _ = call("check", exchange)
    assert code == 3
    assert out.splitlines()[0] == "proved (1 hypothesis)"
    assert "conclusion: [ch(h)!4 || ch(h)?x] 4 = x" in out


def test_check_canonical(exchange):
    code, out, _ = call("check", "--canonical", exchange)
    rec = json.loads(out)
    assert code == 3 and rec["exit"] == 3 and list(rec["hypotheses"]) == ["h1"]


def test_check_failure_exit(tmp_path):
    p = tmp_path / "bad.proof"
    p.write_text("step s1 taut x >= 0\nqed x >= 0\n", encoding="utf-8")
    code, out, _ = call("check", str(p))
    assert code == 1 and out.startswith("failed at step s1")


def test_subst_clash(tmp_path):
    s = tmp_path / "subst.s"
    s.write_text("pred p(real);\np(.) -> . >= y\n", encoding="utf-8")
    code, out, _ = call("subst", "--taboo-vars", "{y}", str(s), "forall y p(x)", "--decls", str(s) + ".d")
    assert code == 2  # missing declarations file is a usage error
    code, out, _ = call("subst", "--taboo-vars", "{y}", str(s), "forall y p(x)")
    assert code == 1 and out.strip() == "clash (taboo) on p: {y} in p(x)"


def test_subst_program_reports_output_taboo(tmp_path):
    s = tmp_path / "subst.s"
    s.write_text("a -> ch(h)?x\n", encoding="utf-8")
    code, out, _ = call("subst", str(s), "a; y := 1", "--kind", "program")
    assert code == 0
    assert out.splitlines() == ["ch(h)?x; y := 1", "output taboo: {x, y, h} ; {ch}"]


def test_axiom():
    code, out, _ = call("axiom", "assign")
    assert code == 0 and out.strip() == "[x := f] p(x) <-> p(f)"
    code, out, _ = call("axiom", "--list", "--group", "trace")
    assert code == 0 and len(out.splitlines()) == 14
    code, _, err = call("axiom", "nope")
    assert code == 2 and "unknown axiom" in err


def test_parse_and_unicode():
    code, out, _ = call("parse", "[x:=1]x>=1&true")
    assert code == 0 and out.strip() == "[x := 1] x >= 1 & true"
    code, out, _ = call("parse", "--unicode", "forall x x >= 0")
    assert out.strip() == "∀x x ≥ 0"
    code, _, err = call("parse", "[x := ] x")
    assert code == 2 and "1:" in err


def test_statics():
    code, out, _ = call("statics", "ch(h)?x; gh(h)!1")
    assert code == 0
    assert out.splitlines() == ["fv: {mu, h}", "bv: {x, h}", "mbv: {x, h}", "cn: {ch, gh}"]


def test_simplify():
    code, out, _ = call("simplify", "val(h . <ch, x, mu>)")
    assert code == 0 and out.strip() == "x"


def test_oracle_commands():
    code, out, _ = call("oracle", "validate", "[ch(h)!4 || ch(h)?x] 4 = x")
    assert code == 0 and out.startswith("valid-on-samples")
    code, out, _ = call("oracle", "validate", "[ch(h)!4 || ch(h)?x] 5 = x")
    assert code == 1 and out.startswith("counterexample")
    code, out, _ = call("oracle", "validate", "--domains", "real=-1,0,1", "x >= 0")
    assert code == 1 and "x=-1" in out
    code, out, _ = call("oracle", "eval", "--state", "h=[(ch,4,0)]", "val(h down {ch})")
    assert code == 0 and out.strip() == "4"


def test_output_file(tmp_path):
    target = tmp_path / "out.txt"
    code, out, _ = call("axiom", "assign", "-o", str(target))
    assert code == 0 and out == ""
    assert target.read_text(encoding="utf-8").strip() == "[x := f] p(x) <-> p(f)"


def test_usage_errors():
    assert call("frobnicate")[0] == 2
    assert call()[0] == 2

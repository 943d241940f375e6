"""Acceptance criteria at their stated sizes; a summary line per criterion is printed at the end of the run."""

import pytest

from dlchp.acceptance import CHECKS, AcceptanceConfig

CFG = AcceptanceConfig()
VERDICTS = {}


@pytest.mark.parametrize("check", CHECKS, ids=lambda c: c.__name__.removeprefix("check_"))
def test_criterion(check):
    v = check(CFG)
    VERDICTS[v.criterion] = v
    print(v.line())
    for note in v.notes:
        print("  " + note)
    assert v.passed, v.line()


if __name__ == "__main__":
    for check in CHECKS:
        v = check(CFG)
        print(v.line())
        for note in v.notes:
            print("  " + note)

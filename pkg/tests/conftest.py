import pytest

from dlchp.generators import signature


@pytest.fixture
def decls():
    return signature()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        v = VERDICTS[n]
        terminalreporter.write_line(f"{v.line()}  ({v.seconds:.1f}s)")
        for note in v.notes:
            terminalreporter.write_line("    " + note)

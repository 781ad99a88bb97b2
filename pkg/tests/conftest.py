import pytest
from hypothesis import settings

from qnpsynth import corpus

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def blocks():
    return corpus.domain("blocks"), corpus.abstraction("blocks")


@pytest.fixture(scope="session")
def gripper():
    return corpus.domain("gripper"), corpus.abstraction("gripper")


@pytest.fixture(scope="session")
def graph():
    return corpus.domain("graph"), corpus.abstraction("graph")


# -- acceptance reporting -------------------------------------------------------------------

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record ``(number, ok, summary)`` for the end-of-run PASS/FAIL table."""

    def record(number, ok, summary):
        ACCEPTANCE[number] = (bool(ok), summary)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {summary}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, summary = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k:>2}: {summary}")

import pytest

from dereserve import load_fixture

# filled by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def example1():
    return load_fixture("example1")


@pytest.fixture(scope="session")
def example2():
    return load_fixture("example2")


@pytest.fixture(scope="session")
def example3():
    return load_fixture("example3")


@pytest.fixture(scope="session")
def example4():
    return load_fixture("example4")


def ids(result):
    """Chosen applicant ids of a ChoiceResult, or members of a matching row."""
    return set(result.ids)


def by_institution(assignment):
    """{institution: set of applicants} view of an assignment."""
    out = {}
    for i, slot in assignment.slots.items():
        if slot is not None:
            out.setdefault(slot[0], set()).add(i)
    return out

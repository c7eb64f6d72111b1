import pytest

from graphs import complete, path, star


@pytest.fixture
def k4():
    return complete(4)


@pytest.fixture
def p4():
    return path(4)


@pytest.fixture
def s4():
    return star(3)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

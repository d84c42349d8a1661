import pytest

from rsgame import catalog

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def models():
    return {name: catalog.load(name) for name in catalog.names()}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Shared pytest wiring: collect acceptance verdict lines and echo them
in the terminal summary, where they survive output capture."""

import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    def add(line: str) -> None:
        _ACCEPTANCE_LINES.append(line)

    return add


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.ensure_newline()
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)

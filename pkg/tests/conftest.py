"""Shared pytest plumbing: collects acceptance-criterion verdict lines and
prints them as a block at the end of the run."""

import pytest

_LINES = []


@pytest.fixture()
def acceptance_log():
    """Callable recording one verdict line for the end-of-run summary."""
    def record(line: str) -> None:
        _LINES.append(line)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)

"""Shared pytest plumbing for the suite.

The acceptance tests each register a one-line verdict; the hook below
echoes those lines after the normal test report so the criterion
outcomes stay visible even when pytest captures per-test output.
"""

import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Callable that records one criterion verdict for the run summary."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)

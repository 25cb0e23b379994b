import pytest

from acceptance_report import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""
    from acceptance_report import record

    return record

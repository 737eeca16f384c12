"""Pytest wiring: repeat the acceptance criterion lines after the test run.

The acceptance tests print one ``criterion NN: PASS`` line each, but pytest
captures stdout of passing tests.  They also register the lines here so the
terminal summary can show them without ``-s``.
"""

LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

"""Shared pytest hooks.

The acceptance tests record one PASS/FAIL line per criterion; echo them in
the terminal summary so they are visible even when the tests pass (pytest
captures per-test stdout otherwise).
"""

criterion_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)

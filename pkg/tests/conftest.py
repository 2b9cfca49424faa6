"""Shared test plumbing.

The acceptance module records one line per shipped guarantee through
:func:`record_acceptance`; the hook below replays them in the terminal
summary so the pass/fail ledger is visible even when pytest captures
stdout.
"""

from __future__ import annotations

ACCEPTANCE_RESULTS: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_RESULTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)

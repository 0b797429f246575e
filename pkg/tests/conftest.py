"""Shared fixtures and the acceptance-criterion reporter.

Acceptance tests register one line per criterion through record_criterion;
the terminal summary prints them as [PASS]/[FAIL] at the end of the run so
the gate status is readable without scrolling through pytest output.
"""

import pytest

_ACCEPTANCE = {}


def record_criterion(num, description, passed):
    _ACCEPTANCE[num] = (description, bool(passed))
    return bool(passed)


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        desc, ok = _ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {desc}")

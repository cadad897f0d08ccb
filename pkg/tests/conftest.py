from __future__ import annotations

import pytest

from cscp.model import TransactionTable

# Filled by tests/test_acceptance.py; printed at the end of the run.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def abc_table() -> TransactionTable:
    return TransactionTable({"P1": {"A", "B"}, "P2": {"A", "B"}, "P3": {"A"}})

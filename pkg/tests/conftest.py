import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_verdicts: list[str] = []


@pytest.fixture
def verdict():
    """Record (and print) one PASS/FAIL/SKIP line for an acceptance criterion."""

    def emit(number, status, detail):
        line = f"criterion {number:>2}: {status} {detail}"
        _verdicts.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)

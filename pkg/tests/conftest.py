import sys
from pathlib import Path

import pytest

from posdomain import TargetRange, VariableSpec, parse_expression
from posdomain.model import BENCHMARKS

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE = {}


def record(criterion, passed, detail):
    """Store one acceptance line for the terminal summary, then assert."""
    ACCEPTANCE[criterion] = (bool(passed), detail)
    assert passed, f"criterion {criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def square():
    return (VariableSpec("x1", -1.0, 1.0), VariableSpec("x2", -1.0, 1.0))


@pytest.fixture(scope="session")
def unit_target():
    return TargetRange.closed(0.0, 1.0)


@pytest.fixture(scope="session")
def linear(square):
    return parse_expression(BENCHMARKS["linear"], square)


@pytest.fixture(scope="session")
def benchmarks(square):
    return {fid: parse_expression(src, square) for fid, src in BENCHMARKS.items()}

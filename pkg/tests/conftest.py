from fractions import Fraction
from math import comb
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def exact_pmf(j: int, n: int, beta) -> Fraction:
    """Binomial mass in exact rational arithmetic."""
    b = Fraction(beta)
    return comb(n, j) * b**j * (1 - b) ** (n - j)


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

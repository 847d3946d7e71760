from fractions import Fraction

import pytest

from qgd.coeffs import LaurentPoly

Q = Fraction(1, 2)


def lp(*pairs, **kw):
    """lp((m, c), ...) builds sum c z^m with Fraction coefficients."""
    return LaurentPoly({m: Fraction(c) for m, c in pairs})


@pytest.fixture
def q():
    return Q


# one line per acceptance criterion, filled by test_acceptance and echoed at the end
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

"""End-to-end acceptance: every suite at the default configuration plus the negative controls."""

from fractions import Fraction

import pytest

from qgd.coeffs import Context
from qgd.suites import Controls, run_suite

from conftest import ACCEPTANCE_LINES

CTX = Context()

# criterion -> (suite, description)
CRITERIA = {
    1: ("algebra", "algebra identities (exact)"),
    2: ("roots", "roots and fractional powers (exact)"),
    3: ("hierarchy", "Lax hierarchy (exact)"),
    4: ("bracket", "bracket equivalences (exact)"),
    5: ("bracket", "Hamiltonian structure (exact)"),
    6: ("jacobi", "Jacobi identity and mCYBE (exact)"),
    7: ("dsred", "Drinfeld-Sokolov reduction"),
    8: ("cdeg", "complex degree (numeric, 40 digits)"),
}


@pytest.fixture(scope="module")
def reports():
    cache = {}

    def get(suite, controls=None):
        key = (suite, controls)
        if key not in cache:
            cache[key] = run_suite(suite, CTX, controls)
        return cache[key]

    return get


def record(k, ok, detail=""):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    ACCEPTANCE_LINES[k] = line
    print(line)


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(reports, k):
    suite, text = CRITERIA[k]
    report = reports(suite)
    checks = [c for c in report.checks if c.criterion == k]
    failed = report.failed(k)
    worst = max((abs(float(c.residual)) for c in checks), default=0.0)
    record(k, bool(checks) and not failed, f"{text}; {len(checks)} checks, worst residual {worst:.3g}")
    assert checks
    assert not failed, [c.to_json() for c in failed]


def test_criterion_9_negative_controls(reports):
    root = reports("roots", Controls(perturb_root=True))
    half = Controls(half=Fraction(2, 5))
    bracket = reports("bracket", half)
    jacobi = reports("jacobi", half)
    caught = {
        "perturbed root breaks 2": bool(root.failed(2)),
        "half=2/5 breaks 4": bool(bracket.failed(4)),
        "half=2/5 breaks 5": bool(bracket.failed(5)),
        "half=2/5 breaks 6": bool(jacobi.failed(6)),
    }
    record(9, all(caught.values()), "; ".join(f"{k}: {'yes' if v else 'no'}" for k, v in caught.items()))
    assert all(caught.values()), caught

import random
from itertools import product

import pytest

from qgd.frac import random_monic
from qgd.hierarchy import (
    conservation_residual,
    flow_commutator_residual,
    fractional_power_flow,
    hamiltonian,
    lax_rhs,
)
from qgd.psid import QOp, WindowError

from conftest import Q, lp

K = 8


def test_lax_rhs_vanishes_at_m_equal_n():
    L = random_monic(random.Random(1), Q, 2)
    assert lax_rhs(L, 2, 2, K).is_zero()


def test_lax_rhs_degree_bound_example():
    L = QOp.monic(Q, [lp(), lp((1, 1))])
    V = lax_rhs(L, 1, 2, K)
    assert V.is_zero() or V.hi <= 1


def test_first_order_flows_are_trivial():
    L = random_monic(random.Random(2), Q, 1)
    for m in range(1, 4):
        assert lax_rhs(L, m, 1, K).is_zero()


def test_insufficient_depth():
    L = random_monic(random.Random(3), Q, 2)
    with pytest.raises(WindowError, match="insufficient depth"):
        lax_rhs(L, 5, 2, 3)


def test_hamiltonian_examples():
    L = random_monic(random.Random(4), Q, 2)
    assert hamiltonian(L, 2, 2, K) == L.coeff(0).coeff(0)
    assert hamiltonian(QOp.D(Q, 2), 1, 2, K) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_conservation_grid(n):
    L = random_monic(random.Random(10 + n), Q, n)
    for m, r in product(range(1, 5), repeat=2):
        assert conservation_residual(L, m, r, n, K) == 0


@pytest.mark.parametrize("n,m1,m2", [(2, 1, 3), (3, 1, 2), (2, 2, 2)])
def test_flows_commute(n, m1, m2):
    L = random_monic(random.Random(m1 + m2), Q, n)
    assert flow_commutator_residual(L, m1, m2, n, K).is_zero()


def test_fractional_power_flow():
    L = random_monic(random.Random(8), Q, 3)
    lhs, rhs = fractional_power_flow(L, 2, 1, 3, K)
    assert lhs.agrees_with(rhs)

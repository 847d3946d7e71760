import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgd.coeffs import LaurentPoly
from qgd.psid import (
    COMPLETE,
    DoubledVector,
    QOp,
    WindowError,
    commutator,
    doubled_inner,
    inner,
    mul,
    proj,
    reconstruct_from_slices,
    res,
    trace,
)
from qgd.suites import random_qop

from conftest import Q, lp

z = lp((1, 1))
zinv = lp((-1, 1))


def op(coeffs, floor=COMPLETE):
    return QOp(Q, coeffs, floor)


def test_mul_examples():
    assert mul(QOp.D(Q), QOp.scalar(Q, z)) == op({1: lp((1, Fraction(1, 2)))})
    A = op({1: z, -1: zinv})
    assert mul(A, QOp.one(Q)) == A
    zD, zinvDinv = op({1: z}), op({-1: zinv})
    assert mul(zD, zinvDinv) == op({0: lp((0, 2))})
    assert mul(zinvDinv, zD) == op({0: lp((0, 2))})


def test_commutator_examples():
    A = op({2: z, 0: zinv})
    assert commutator(A, A).is_zero()
    assert commutator(QOp.D(Q), QOp.scalar(Q, z)) == op({1: lp((1, Fraction(-1, 2)))})
    assert commutator(QOp.one(Q), A).is_zero()


def test_proj_examples():
    A = op({2: lp((0, 1)), 1: z, 0: z, -1: lp((2, 1))})
    assert proj(A, "0") == QOp.scalar(Q, z)
    assert proj(A, "+") + proj(A, "0") + proj(A, "-") == A
    assert proj(QOp.D(Q, -1), "(+)").is_zero()


def test_proj_respects_windows():
    A = op({2: z}, floor=1)
    with pytest.raises(WindowError):
        proj(A, "-")
    with pytest.raises(WindowError):
        proj(A, "0")


def test_trace_examples():
    assert trace(op({0: lp((0, 5)), 1: z})) == 5
    assert trace(mul(op({-1: z}), op({1: zinv}))) == Fraction(1, 2)
    with pytest.raises(WindowError, match="trace outside trusted window"):
        trace(op({3: z}, floor=1))


def test_inner_examples():
    A, B = op({1: z, 2: zinv}), op({1: lp((0, 3)), 3: z})
    assert inner(A, B) == 0
    assert inner(QOp.one(Q), QOp.one(Q)) == 1
    assert doubled_inner(DoubledVector(A, QOp.zero(Q)), DoubledVector(B, QOp.zero(Q))) == inner(A, B)


def test_reconstruct_examples():
    B = op({-1: z})
    assert reconstruct_from_slices(B) == B
    assert reconstruct_from_slices(QOp.one(Q)) == QOp.one(Q)


def test_product_floor_rule():
    A = op({1: z, 0: lp((0, 1)), -1: zinv}, floor=-1)
    B = op({2: lp((0, 1)), 0: z})
    P = mul(A, B)
    assert P.floor == max(A.floor + B.hi, A.hi + B.floor)


def test_floor_rule_is_sound_against_tail_extensions():
    rng = random.Random(3)
    for _ in range(20):
        A = random_qop(rng, Q, -2, 2, floor=-2)
        B = random_qop(rng, Q, -2, 2)
        tail = random_qop(rng, Q, -5, -3)
        full = QOp(Q, {**dict(A.items()), **dict(tail.items())})
        assert mul(A, B).agrees_with(mul(full, B))


def test_j0_normalizes_the_splitting():
    rng = random.Random(5)
    for _ in range(10):
        a = QOp.scalar(Q, lp((rng.randint(-2, 2), rng.randint(1, 9))))
        X = random_qop(rng, Q)
        for part in ("+", "-"):
            Y = proj(X, part)
            C = commutator(a, Y)
            assert proj(C, part) == C


def test_serialization_roundtrip():
    L = op({2: lp((0, 1)), 1: z})
    text = L.dumps()
    assert QOp.loads(text) == L
    data = L.to_json()
    assert data["floor"] == "complete" and data["hi"] == 2
    T = op({1: z, -2: zinv}, floor=-3)
    assert QOp.loads(T.dumps()).floor == -3


ops = st.builds(lambda seed: random_qop(random.Random(seed), Q, -2, 2), st.integers(0, 10**6))


@given(ops, ops, ops)
@settings(max_examples=30, deadline=None)
def test_associativity_and_invariance(A, B, C):
    assert mul(mul(A, B), C) == mul(A, mul(B, C))
    assert trace(mul(A, B)) == trace(mul(B, A))
    assert inner(mul(A, B), C) == inner(A, mul(B, C))


@given(ops, ops)
@settings(max_examples=30, deadline=None)
def test_isotropy_and_projection_idempotence(A, B):
    for part in ("+", "-"):
        assert inner(proj(A, part), proj(B, part)) == 0
        assert proj(proj(A, part), part) == proj(A, part)

import random
from fractions import Fraction
from itertools import product

import mpmath
import pytest

from qgd.coeffs import LaurentPoly
from qgd.dsred import (
    LoopMat,
    companion_of,
    eigen_residual,
    eigenvector_sums,
    gauge,
    gauge_to_companion,
    is_yn,
    lift_gradient,
    operator_of_companion,
    orthogonality_residual,
    random_gauge,
    random_yn,
    reduced_bracket,
    theta_apply,
    theta_cayley,
    theta_resolvent,
    z_from_definition,
)
from qgd.frac import _random_poly, random_monic
from qgd.gdbracket import BracketSpec, bracket, elementary_functionals, zeta
from qgd.psid import QOp

from conftest import Q, lp

ONE, ZERO = lp((0, 1)), LaurentPoly()


def poly_source(seed):
    rng = random.Random(seed)
    return rng, (lambda: _random_poly(rng, Q, range(-3, 4), 2, 9))


def test_companion_shapes():
    u0, u1 = lp((1, 2)), lp((0, -1))
    C = companion_of(QOp.monic(Q, [u0, u1]))
    assert C == LoopMat.build(Q, [[ZERO, ONE], [-u0, -u1]])
    assert companion_of(QOp.monic(Q, [u0])) == LoopMat.build(Q, [[-u0]])
    L = random_monic(random.Random(1), Q, 3)
    assert operator_of_companion(companion_of(L)) == L


def test_gauge_properties():
    rng, poly = poly_source(2)
    M = random_yn(rng, Q, 3, poly)
    assert gauge(LoopMat.identity(Q, 3), M) == M
    S1, S2 = random_gauge(rng, Q, 3, poly), random_gauge(rng, Q, 3, poly)
    assert gauge(S2, gauge(S1, M)) == gauge(S2 @ S1, M)
    assert is_yn(gauge(S1, M))


@pytest.mark.parametrize("n", [2, 3])
def test_gauge_to_companion(n):
    rng, poly = poly_source(n)
    C0 = companion_of(random_monic(rng, Q, n))
    S, C = gauge_to_companion(C0)
    assert S == LoopMat.identity(Q, n) and C == C0
    for _ in range(5):
        M = random_yn(rng, Q, n, poly)
        S, C = gauge_to_companion(M)
        assert gauge(S, M) == C
        assert S.is_lower_triangular(unit=True)
        T = random_gauge(rng, Q, n, poly)
        assert gauge_to_companion(gauge(T, M))[1] == C


def test_gauge_to_companion_rejects_bad_shape():
    M = LoopMat.build(Q, [[ONE, ZERO], [ZERO, ONE]])
    with pytest.raises(ValueError):
        gauge_to_companion(M)


def test_theta():
    d = LoopMat.diagonal(Q, [lp((2, 1)), ZERO, ZERO])
    assert theta_apply(d) == LoopMat.diagonal(Q, [ZERO, lp((2, Fraction(1, 4))), ZERO])
    assert theta_cayley(LoopMat.identity(Q, 3).scale(Fraction(5))).is_zero()


def test_theta_resolvent_is_exact():
    rng, poly = poly_source(5)
    for n in (2, 3, 4):
        d = LoopMat.diagonal(Q, [poly() + lp((0, rng.randint(-3, 3))) for _ in range(n)])
        y = theta_resolvent(d)
        mean = sum((a.coeff(0) for a in d.diag()), 0) / n
        expected = d - LoopMat.identity(Q, n).scale(mean)
        assert y - theta_apply(y) == expected


def test_eigenvectors_numeric():
    with mpmath.workdps(20):
        q = mpmath.mpf(1) / 2
        for n in (2, 3, 5):
            for m, a in product(range(-3, 4), range(n)):
                assert eigen_residual(n, m, a, q) < 1e-15
                for b in range(n):
                    assert orthogonality_residual(n, m, a, -m, b, q) < 1e-15
                    assert orthogonality_residual(n, m, a, m + 1, b, q) < 1e-15


def test_root_of_unity_sums():
    with mpmath.workdps(20):
        for n in range(2, 7):
            for m in range(-5, 6):
                assert max(abs(r) for r in eigenvector_sums(n, m)) < 1e-15
        # the first m = 0 sum at n = 3 is zero; check one value directly
        w = mpmath.exp(2j * mpmath.pi / 3)
        cay = [(1 + w**a) / (1 - w**a) for a in (1, 2)]
        assert abs(sum(c * w**a for a, c in zip((1, 2), cay)) / 3 + mpmath.mpf(1) / 3) < 1e-15


def test_lifted_z_shape_and_definition():
    rng = random.Random(7)
    for n in (2, 3):
        L = random_monic(rng, Q, n)
        C = companion_of(L)
        for phi in elementary_functionals(n, 2):
            g = lift_gradient(phi.differential(Q), L)
            assert g.Z.is_lower_triangular()
            for i, j in product(range(n), repeat=2):
                if i != n - 1 and not (j == 0 and i <= n - 2):
                    assert g.Z[i, j].is_zero()
            assert z_from_definition(g, C) == g.Z


def test_reduced_bracket_reference_value():
    L = QOp.monic(Q, [lp((1, 1)), ZERO])
    d = lambda phi: phi.differential(Q)
    assert reduced_bracket(d(zeta(1, 0)), d(zeta(1, 1)), L) == Fraction(-1, 2)
    assert reduced_bracket(d(zeta(1, 0)), d(zeta(1, 0)), L) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_reduced_bracket_matches_quadratic(n):
    rng = random.Random(10 + n)
    fs = elementary_functionals(n, 1)
    L = random_monic(rng, Q, n)
    for a, b in product(fs, fs):
        value = reduced_bracket(a.differential(Q), b.differential(Q), L)
        assert value == bracket(BracketSpec("quadratic", n), a, b, L)
        assert value == -reduced_bracket(b.differential(Q), a.differential(Q), L)

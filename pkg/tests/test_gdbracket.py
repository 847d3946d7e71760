import random
from fractions import Fraction
from itertools import product

import pytest

from qgd.frac import frac_power, random_monic
from qgd.gdbracket import (
    BlockR,
    BracketSpec,
    LinearFunctional,
    OpMap,
    TraceHamiltonian,
    ZeroMap,
    bracket,
    canonical_r,
    casimir_leading_residual,
    elementary_functionals,
    jacobi_residual,
    mcybe_residual,
    r_cyclic_sides,
    random_block_r,
    schouten_delta,
    skew_residual,
    tangency_defect,
    vector_field,
    zeta,
)
from qgd.hierarchy import lax_rhs
from qgd.psid import DoubledVector, QOp, inner, proj, trace
from qgd.suites import random_qop

from conftest import Q, lp

K = 8
KINDS = ["quadratic", "quadratic_alt", "linear", "coordinate", "pencil"]


def spec(kind, n):
    return BracketSpec(kind, n, alpha=Fraction(2) if kind == "pencil" else None)


def test_differentials():
    assert zeta(0, 0).differential(Q) == QOp.one(Q)
    assert zeta(1, 0).differential(Q) == QOp.D(Q, -1)


def test_differential_pairs_to_coordinate():
    rng = random.Random(1)
    for _ in range(10):
        X = random_qop(rng, Q, 0, 3)
        i, j = rng.randint(0, 3), rng.randint(-3, 3)
        assert inner(zeta(i, j).differential(Q), X) == zeta(i, j).value(X)


def test_gradients():
    L = random_monic(random.Random(2), Q, 2)
    g = LinearFunctional(QOp.one(Q)).gradients(L)
    assert g.nabla == L and g.nabla_prime == L
    h = TraceHamiltonian(3, 2, K).gradients(L)
    assert h.nabla.agrees_with(frac_power(L, 3, 2, K)) and h.nabla is h.nabla_prime
    e = zeta(1, 2).gradients(L)
    assert trace(e.nabla) == trace(e.nabla_prime)


def test_parse_aliases():
    assert BracketSpec.parse("f134", 2).kind == "quadratic"
    assert BracketSpec.parse("f192", 2).kind == "coordinate"
    assert BracketSpec.parse("pencil:2", 3).alpha == 2
    with pytest.raises(ValueError):
        BracketSpec.parse("cubic", 2)


@pytest.mark.parametrize("kind", KINDS)
def test_antisymmetry(kind):
    rng = random.Random(3)
    L = random_monic(rng, Q, 2)
    fs = elementary_functionals(2, 2)
    for a, b in product(fs[:6], fs[:6]):
        assert bracket(spec(kind, 2), a, b, L) == -bracket(spec(kind, 2), b, a, L)


def test_reference_value_and_closed_form():
    L = QOp.monic(Q, [lp((1, 1)), lp()])  # D^2 + z
    for kind in ("quadratic", "quadratic_alt", "coordinate"):
        assert bracket(spec(kind, 2), zeta(1, 0), zeta(1, 1), L) == Fraction(-1, 2)
    for a, b in product(range(-3, 4), repeat=2):
        expected = Q ** (1 - a) - Q**a if a + b == 1 else 0
        assert bracket(spec("coordinate", 2), zeta(1, a), zeta(1, b), L) == expected


@pytest.mark.parametrize("n", [2, 3])
def test_three_presentations_agree(n):
    rng = random.Random(n)
    fs = elementary_functionals(n, 2)
    for _ in range(2):
        L = random_monic(rng, Q, n)
        for a, b in product(fs, fs):
            v = bracket(spec("quadratic", n), a, b, L)
            assert v == bracket(spec("quadratic_alt", n), a, b, L)
            assert v == bracket(spec("coordinate", n), a, b, L)


def test_zeta0_is_central():
    L = random_monic(random.Random(5), Q, 3)
    for a in elementary_functionals(3, 2):
        for b in range(-2, 3):
            assert bracket(spec("coordinate", 3), a, zeta(0, b), L) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_hamiltonian_fields_are_lax(n):
    L = random_monic(random.Random(7), Q, n)
    for m in (1, 2, 3):
        V = vector_field(spec("quadratic", n), TraceHamiltonian(m, n, K), L)
        assert V.agrees_with(lax_rhs(L, m, n, K))
        assert tangency_defect(spec("quadratic", n), TraceHamiltonian(m, n, K), L).is_zero()


def test_field_pairs_with_differentials():
    n = 2
    L = random_monic(random.Random(8), Q, n)
    H = TraceHamiltonian(3, n, K)
    V = vector_field(spec("quadratic", n), H, L)
    for phi in elementary_functionals(n, 2):
        assert inner(phi.differential(Q), V) == bracket(spec("quadratic", n), H, phi, L)


def test_linear_bracket_casimirs_and_bihamiltonian():
    for n in (2, 3):
        L = random_monic(random.Random(n + 20), Q, n)
        for m in range(1, n + 1):
            V = vector_field(spec("linear", n), TraceHamiltonian(m, n, K), L)
            assert V.restrict(0, n - 1).is_zero()
        for m in (1, 2):
            a = vector_field(spec("quadratic", n), TraceHamiltonian(m, n, K), L)
            b = vector_field(spec("linear", n), TraceHamiltonian(m + n, n, K + n), L)
            assert a.agrees_with(b)


def test_casimirs():
    L2 = random_monic(random.Random(30), Q, 2)
    L3 = random_monic(random.Random(31), Q, 3)
    assert casimir_leading_residual(lp((0, 1)), zeta(0, 0), L2) == 0
    for psi in elementary_functionals(2, 2):
        assert casimir_leading_residual(lp((2, 1)), psi, L2) == 0
    for psi in elementary_functionals(3, 1):
        assert casimir_leading_residual(lp((-1, 1)), psi, L3) == 0


def _doubled(rng):
    return DoubledVector(random_qop(rng, Q, bound=5), random_qop(rng, Q, bound=5))


def test_mcybe_trivial_blocks():
    h = Fraction(1, 2)
    R = BlockR(OpMap(h, -h, ZeroMap()), OpMap(0, 0, ZeroMap()), OpMap(0, 0, ZeroMap()), OpMap(h, -h, ZeroMap()))
    rng = random.Random(1)
    X = DoubledVector(proj(random_qop(rng, Q), "+"), proj(random_qop(rng, Q), "+"))
    Y = DoubledVector(proj(random_qop(rng, Q), "+"), proj(random_qop(rng, Q), "+"))
    assert mcybe_residual(R, X, Y).is_zero()


def test_mcybe_canonical_and_random():
    rng = random.Random(2)
    Rs = [canonical_r(Q, 2), canonical_r(Q, 3)] + [random_block_r(rng, Q) for _ in range(3)]
    for R in Rs:
        X, Y, Z = _doubled(rng), _doubled(rng), _doubled(rng)
        assert mcybe_residual(R, X, Y).is_zero()
        assert skew_residual(R, X, Y) == 0
        lhs, rhs = r_cyclic_sides(R, X, Y, Z)
        assert lhs == rhs


def test_schouten():
    rng = random.Random(4)
    L = random_monic(rng, Q, 2)
    R = canonical_r(Q, 2)
    a, b = zeta(1, 1), zeta(0, -1)
    assert schouten_delta(R, a, a, b, L) == 0
    for _ in range(5):
        tr = [zeta(rng.randrange(2), rng.randint(-2, 2)) for _ in range(3)]
        assert schouten_delta(R, *tr, L) == 0


@pytest.mark.parametrize("kind,alpha", [("quadratic", None), ("linear", None), ("pencil", 1), ("pencil", -1), ("pencil", 2)])
def test_jacobi(kind, alpha):
    rng = random.Random(6)
    s = BracketSpec(kind, 2, alpha=None if alpha is None else Fraction(alpha))
    for _ in range(4):
        L = random_monic(rng, Q, 2)
        tr = [zeta(rng.randrange(2), rng.randint(-2, 2)) for _ in range(3)]
        assert jacobi_residual(s, *tr, L) == 0


def test_wrong_resolvent_weight_is_detected():
    bad = BracketSpec("quadratic", 2, half=Fraction(2, 5))
    L = QOp.monic(Q, [lp((0, 3), (2, 1)), lp((1, 1), (-1, 2))])
    fs = elementary_functionals(2, 2)
    diffs = [bracket(bad, a, b, L) - bracket(spec("coordinate", 2), a, b, L) for a, b in product(fs, fs)]
    assert any(d != 0 for d in diffs)

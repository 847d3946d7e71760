from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgd.coeffs import (
    Context,
    Jet,
    LaurentPoly,
    ResonanceError,
    cayley_resolvent,
    dilate,
    formal_integral,
    log_dilation_action,
    mean_zero_resolvent,
    parse_scalar,
    qpow,
)

from conftest import Q, lp

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.dictionaries(st.integers(-4, 4), fractions, max_size=4).map(LaurentPoly)


def test_dilate_examples():
    assert dilate(lp((2, 1)), 1, Q) == lp((2, Fraction(1, 4)))
    assert dilate(lp((0, 7)), 5, Q) == lp((0, 7))
    assert dilate(lp((1, 1), (-1, 1)), -1, Q) == lp((1, 2), (-1, Fraction(1, 2)))


def test_dilate_rejects_fractional_exponent_in_exact_mode():
    with pytest.raises(TypeError, match="exact backend requires integer dilation"):
        dilate(lp((1, 1)), Fraction(1, 2), Q)


def test_formal_integral():
    assert formal_integral(lp((0, 5), (1, 3))) == 5
    assert formal_integral(lp((-2, 1))) == 0


def test_log_dilation_action():
    assert log_dilation_action(lp((3, 1)), Q) == lp((3, 3))
    assert log_dilation_action(lp((0, 4)), Q) == LaurentPoly()
    assert log_dilation_action(lp((1, 1), (-1, 1)), Q) == lp((1, 1), (-1, -1))


def test_log_dilation_numeric_uses_ln_q():
    with mpmath.workdps(30):
        q = mpmath.mpf(1) / 2
        out = log_dilation_action(LaurentPoly({2: mpmath.mpf(1)}), q)
        assert abs(out.coeff(2) - 2 * mpmath.log(q)) < mpmath.mpf(10) ** -28


def test_resolvent_examples():
    assert mean_zero_resolvent(lp((0, 1)), 2, Q) == LaurentPoly()
    assert mean_zero_resolvent(lp((1, 1)), 2, Q) == lp((1, Fraction(4, 3)))
    assert mean_zero_resolvent(lp((-1, 1)), 1, Q) == lp((-1, -1))
    assert cayley_resolvent(lp((0, 5)), 1, Q) == LaurentPoly()
    assert cayley_resolvent(lp((1, 1)), 1, Q) == lp((1, 3))
    assert cayley_resolvent(lp((2, 1)), 2, Q) == lp((2, Fraction(17, 15)))


def test_resolvent_rejects_zero_exponent():
    with pytest.raises(ValueError):
        mean_zero_resolvent(lp((1, 1)), 0, Q)


def test_numeric_resonance_guard():
    with mpmath.workdps(20):
        q = mpmath.exp(2j * mpmath.pi / 3)  # |q| = 1, q^3 = 1
        with pytest.raises(ResonanceError, match="near-resonant dilation"):
            mean_zero_resolvent(LaurentPoly({1: mpmath.mpf(1)}), 3, q)


@given(polys, st.integers(-3, 3), st.integers(-3, 3))
def test_dilation_is_a_group_action(a, s, t):
    assert dilate(dilate(a, s, Q), t, Q) == dilate(a, s + t, Q)


@given(polys, st.integers(-3, 3))
def test_integral_is_dilation_invariant(a, t):
    assert formal_integral(dilate(a, t, Q)) == formal_integral(a)


@given(polys, st.sampled_from([-2, -1, 1, 3]))
def test_resolvent_inverts_one_minus_dilation(a, s):
    r = mean_zero_resolvent(a, s, Q)
    assert r - dilate(r, s, Q) == a - formal_integral(a)


@given(polys, polys, polys)
@settings(max_examples=50)
def test_laurent_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == LaurentPoly()


@given(fractions, fractions, fractions, fractions)
def test_jet_leibniz(a, b, c, d):
    x, y = Jet(a, b), Jet(c, d)
    p = x * y
    assert p.value == a * c
    assert p.deriv == a * d + b * c
    if c != 0:
        r = (x / y) * y
        assert r.value == a and r.deriv == b


def test_jet_division_by_zero_value():
    with pytest.raises(ZeroDivisionError):
        Jet(Fraction(1), Fraction(2)) / Jet(Fraction(0), Fraction(1))


def test_zero_coefficients_are_not_stored():
    assert lp((1, 0), (2, 3)).support() == [2]
    assert (lp((1, 1)) - lp((1, 1))).is_zero()


def test_json_roundtrip():
    a = lp((0, 1), (1, Fraction(-2, 3)))
    assert a.to_json() == {"0": "1", "1": "-2/3"}
    assert LaurentPoly.from_json(a.to_json()) == a
    assert parse_scalar("3/4") == Fraction(3, 4)


def test_context_validation():
    assert Context().q == Fraction(1, 2)
    with pytest.raises(ValueError):
        Context(q=Fraction(3, 2))
    with pytest.raises(ValueError):
        Context(depth=0)
    with pytest.raises(ValueError):
        Context(digits=0)


def test_qpow_exact_and_numeric():
    assert qpow(Q, -3) == 8
    with mpmath.workdps(25):
        assert abs(qpow(mpmath.mpf(1) / 2, mpmath.mpf("0.5")) - mpmath.sqrt(mpmath.mpf(1) / 2)) < 1e-24

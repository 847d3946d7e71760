"""n-th roots and fractional powers of monic q-difference operators."""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .coeffs import LaurentPoly, is_exact, qpow
from .psid import COMPLETE, QOp, WindowError, mul

__all__ = ["check_monic", "nth_root", "frac_power", "series_inverse", "random_monic"]


def check_monic(L: QOp) -> int:
    """Validate membership in M_n and return n."""
    if not L.is_complete or L.is_zero():
        raise ValueError("not monic")
    n = L.hi
    if L.lo < 0:
        raise ValueError("not a q-difference operator")
    if L.coeff(n) != LaurentPoly.const(1):
        raise ValueError("not monic")
    return n


def _power_down_to(P: QOp, n: int, lo: int) -> QOp:
    """P**n keeping only degrees >= lo; P has top degree 1."""
    out = QOp.one(P.q)
    for j in range(1, n + 1):
        out = mul(out, P, lo=lo - (n - j))
    return out


def nth_root(L: QOp, n: int, K: int) -> QOp:
    """P = D + p_0 + ... + p_{K-1} D^{1-K} with P**n = L on the trusted window."""
    if K < 1:
        raise ValueError("invalid depth: K must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if check_monic(L) != n:
        raise ValueError("not monic")
    q = L.q
    P = QOp.D(q)
    for k in range(K):
        d = n - 1 - k
        known = _power_down_to(P, n, d).coeff(d) if k else LaurentPoly()
        c = L.coeff(d) - known

        def solve(m, v):
            s = sum(qpow(q, j * m) for j in range(n))
            return v / s

        p = c.map_monomials(solve)
        P = P + QOp(q, {-k: p})
    return P.with_floor(1 - K)


def series_inverse(A: QOp) -> QOp:
    """Inverse of an operator whose top coefficient is a nonzero constant."""
    q = A.q
    h = A.hi
    lead = A.coeff(h)
    if len(lead) != 1 or lead.support() != [0]:
        raise ValueError("leading coefficient must be a nonzero constant")
    c = lead.coeff(0)
    one = Fraction(1) if is_exact(q) else mpmath.mpf(1)
    inv_top = QOp(q, {-h: LaurentPoly.const(one / c)})
    # A = c D^h (1 + X) with X of negative degree
    X = mul(inv_top, A) - QOp.one(q)
    if A.is_complete and X.is_zero():
        return inv_top
    floor = X.floor if not A.is_complete else None
    if floor is None:
        raise WindowError("inverse of a complete operator needs an explicit depth")
    out = QOp.one(q)
    term = QOp.one(q)
    negX = -X
    k = 0
    while True:
        k += 1
        term = mul(term, negX, lo=floor)
        if term.is_zero() or term.hi < floor:
            break
        out = out + term
    out = out.with_floor(max(out.floor, floor))
    return mul(out, inv_top)


def frac_power(L: QOp, m: int, n: int, K: int) -> QOp:
    """L^{m/n} as P**m, P = nth_root(L, n, K)."""
    P = nth_root(L, n, K)
    if m == 0:
        return QOp.one(L.q)
    if m < 0:
        P = series_inverse(P)
        m = -m
    out = P
    for _ in range(m - 1):
        out = mul(out, P)
    return out


def random_monic(rng, q, n: int, exps=range(-3, 4), max_terms=2, bound=9) -> QOp:
    """Random element of M_n with sparse finitely supported coefficients."""
    lower = []
    for _ in range(n):
        lower.append(_random_poly(rng, q, exps, max_terms, bound))
    return QOp.monic(q, lower)


def _random_poly(rng, q, exps, max_terms, bound):
    exps = list(exps)
    c = {}
    for _ in range(rng.randint(0, max_terms)):
        num = rng.randint(-bound, bound)
        den = rng.randint(1, bound)
        v = Fraction(num, den)
        if not is_exact(q):
            v = mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
        c[rng.choice(exps)] = v
    return LaurentPoly(c)

"""Scalar backends, first-order jets and Laurent polynomials in z.

Two scalar backends are supported:

* exact: ``fractions.Fraction`` coefficients with a rational ``q`` in (0, 1);
* numeric: ``mpmath`` complex coefficients at the working precision ``mp.dps``.

The backend of an expression is decided by the type of ``q``.  Everything
that needs ``q`` (dilations, resolvents) takes it as an argument; Laurent
polynomials themselves are backend agnostic containers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Iterable, Iterator

import mpmath
from mpmath import mp

__all__ = [
    "Context",
    "Jet",
    "LaurentPoly",
    "ResonanceError",
    "is_exact",
    "qpow",
    "log_q",
    "dilate",
    "formal_integral",
    "log_dilation_action",
    "mean_zero_resolvent",
    "cayley_resolvent",
    "diagonal_map",
    "parse_scalar",
    "format_scalar",
    "one_minus_qpow",
    "scalar",
]


class ResonanceError(ArithmeticError):
    """A dilation multiplier came too close to a pole."""


def is_exact(q) -> bool:
    return isinstance(q, Rational)


def _check_exponent(q, t):
    if is_exact(q) and not (isinstance(t, int) or (isinstance(t, Rational) and t.denominator == 1)):
        raise TypeError("exact backend requires integer dilation")


@lru_cache(maxsize=4096)
def _exact_pow(q: Fraction, e: int) -> Fraction:
    return q**e


def qpow(q, e):
    """q**e with the principal branch of ln q in numeric mode."""
    if is_exact(q):
        _check_exponent(q, e)
        return _exact_pow(Fraction(q), int(e))
    if e == 0:
        return mpmath.mpf(1)
    return mpmath.exp(e * log_q(q))


def log_q(q):
    """ln q; 1 stands in for it with the exact backend (see ``log_dilation_action``)."""
    if is_exact(q):
        return Fraction(1)
    return mpmath.log(q)


def _tolerance():
    return mpmath.mpf(10) ** (1 - mp.dps)


@dataclass(frozen=True)
class Context:
    """Run configuration shared by the verification suites."""

    q: Fraction = Fraction(1, 2)
    depth: int = 8
    digits: int = 40
    seed: int = 42
    ns: tuple = (2, 3)

    def __post_init__(self):
        q = self.q
        if is_exact(q):
            if not 0 < q < 1:
                raise ValueError("exact q must be a rational in (0, 1)")
        elif q == 0 or q == 1 or abs(q) >= 1:
            raise ValueError("q must satisfy 0 < |q| < 1")
        if self.depth < 1:
            raise ValueError("depth must be a positive integer")
        if self.digits < 1:
            raise ValueError("digits must be a positive integer")
        if not self.ns or any(int(n) < 1 for n in self.ns):
            raise ValueError("orders n must be positive integers")

    def numeric_q(self):
        q = self.q
        if is_exact(q):
            return mpmath.mpf(q.numerator) / q.denominator
        return mpmath.mpmathify(q)


class Jet:
    """First-order jet ``value + eps*deriv`` with ``eps**2 = 0``."""

    __slots__ = ("value", "deriv")

    def __init__(self, value, deriv=0):
        if isinstance(value, Jet) or isinstance(deriv, Jet):
            raise TypeError("nested jets are not supported")
        self.value = value
        self.deriv = deriv

    @staticmethod
    def _split(x):
        if isinstance(x, Jet):
            return x.value, x.deriv
        return x, 0

    def __add__(self, other):
        b, db = self._split(other)
        return Jet(self.value + b, self.deriv + db)

    __radd__ = __add__

    def __sub__(self, other):
        b, db = self._split(other)
        return Jet(self.value - b, self.deriv - db)

    def __rsub__(self, other):
        return Jet(other - self.value, -self.deriv)

    def __neg__(self):
        return Jet(-self.value, -self.deriv)

    def __mul__(self, other):
        b, db = self._split(other)
        return Jet(self.value * b, self.value * db + self.deriv * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b, db = self._split(other)
        if b == 0:
            raise ZeroDivisionError("jet division by a value-zero jet")
        return Jet(self.value / b, (self.deriv * b - self.value * db) / (b * b))

    def __rtruediv__(self, other):
        return Jet(other) / self

    def __eq__(self, other):
        b, db = self._split(other)
        return self.value == b and self.deriv == db

    def __hash__(self):
        return hash((self.value, self.deriv))

    def __abs__(self):
        return max(abs(self.value), abs(self.deriv))

    def __repr__(self):
        return f"Jet({self.value!r}, {self.deriv!r})"


def _is_zero(c) -> bool:
    return c == 0


class LaurentPoly:
    """Finite-support Laurent polynomial ``sum c_m z^m``.

    Immutable.  Zero coefficients are never stored.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: dict[int, object] | None = None):
        c = {}
        if coeffs:
            for m, v in coeffs.items():
                if not _is_zero(v):
                    c[int(m)] = v
        self._c = c

    @classmethod
    def _raw(cls, c: dict) -> "LaurentPoly":
        obj = cls.__new__(cls)
        obj._c = c
        return obj

    @classmethod
    def const(cls, c) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, m: int, c=1) -> "LaurentPoly":
        return cls({m: c})

    # -- inspection -------------------------------------------------------
    def coeff(self, m: int):
        return self._c.get(m, 0)

    def items(self) -> Iterator[tuple[int, object]]:
        return iter(sorted(self._c.items()))

    def support(self) -> list[int]:
        return sorted(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def __len__(self):
        return len(self._c)

    def max_abs(self):
        return max((abs(v) for v in self._c.values()), default=0)

    def map(self, fn: Callable) -> "LaurentPoly":
        return LaurentPoly({m: fn(v) for m, v in self._c.items()})

    def map_monomials(self, fn: Callable[[int, object], object]) -> "LaurentPoly":
        return LaurentPoly({m: fn(m, v) for m, v in self._c.items()})

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other)
        c = dict(self._c)
        for m, v in other._c.items():
            w = c.get(m)
            w = v if w is None else w + v
            if _is_zero(w):
                c.pop(m, None)
            else:
                c[m] = w
        return LaurentPoly._raw(c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({m: -v for m, v in self._c.items()})

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            c: dict[int, object] = {}
            for m1, v1 in self._c.items():
                for m2, v2 in other._c.items():
                    m = m1 + m2
                    p = v1 * v2
                    if m in c:
                        c[m] = c[m] + p
                    else:
                        c[m] = p
            return LaurentPoly(c)
        return LaurentPoly({m: v * other for m, v in self._c.items()})

    def __rmul__(self, other):
        return LaurentPoly({m: other * v for m, v in self._c.items()})

    def __truediv__(self, scalar):
        return LaurentPoly({m: v / scalar for m, v in self._c.items()})

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self._c == other._c
        if _is_zero(other):
            return not self._c
        return self._c == {0: other}

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for m, v in self.items():
            parts.append(f"({v})" if m == 0 else f"({v})*z^{m}")
        return " + ".join(parts)

    # -- serialisation ----------------------------------------------------
    def to_json(self) -> dict[str, str]:
        return {str(m): format_scalar(v) for m, v in self.items()}

    @classmethod
    def from_json(cls, data: dict[str, str], exact: bool = True) -> "LaurentPoly":
        return cls({int(m): parse_scalar(v, exact) for m, v in data.items()})


def parse_scalar(text, exact: bool = True):
    if exact:
        return Fraction(str(text))
    return mpmath.mpmathify(str(text).replace(" ", ""))


def format_scalar(v) -> str:
    if isinstance(v, Rational):
        return str(Fraction(v))
    if isinstance(v, Jet):
        raise TypeError("jets have no textual form")
    v = mpmath.mpmathify(v)
    if isinstance(v, mpmath.mpc):
        if v.imag == 0:
            return mpmath.nstr(v.real, mp.dps)
        return f"{mpmath.nstr(v.real, mp.dps)}{'+' if v.imag >= 0 else '-'}{mpmath.nstr(abs(v.imag), mp.dps)}j"
    return mpmath.nstr(v, mp.dps)


def diagonal_map(a: LaurentPoly, multiplier: Callable[[int], object]) -> LaurentPoly:
    """Map z^m to multiplier(m) * z^m."""
    return LaurentPoly({m: multiplier(m) * v for m, v in a._c.items()})


def dilate(a: LaurentPoly, t, q) -> LaurentPoly:
    """(h^t a)(z) = a(q^t z)."""
    _check_exponent(q, t)
    if t == 0:
        return a
    return LaurentPoly._raw({m: qpow(q, t * m) * v for m, v in a._c.items()})


def formal_integral(a: LaurentPoly):
    """Integral of a(z) dz/z, i.e. the z^0 coefficient."""
    return a.coeff(0)


def log_dilation_action(a: LaurentPoly, q) -> LaurentPoly:
    """[ln D, a] = ln q * z da/dz; ln q is replaced by 1 in exact mode."""
    lam = log_q(q)
    return LaurentPoly({m: (m * lam) * v for m, v in a._c.items()})


def _resolvent_multiplier(q, s, m):
    if is_exact(q):
        return 1 - qpow(q, s * m)
    d = 1 - qpow(q, s * m)
    if abs(d) < _tolerance():
        raise ResonanceError("near-resonant dilation")
    return d


def mean_zero_resolvent(a: LaurentPoly, s, q) -> LaurentPoly:
    """(1 - h^s)^{-1} applied after removing the constant term."""
    if s == 0:
        raise ValueError("dilation exponent must be nonzero")
    _check_exponent(q, s)
    return LaurentPoly({m: v / _resolvent_multiplier(q, s, m) for m, v in a._c.items() if m != 0})


def cayley_resolvent(a: LaurentPoly, s, q) -> LaurentPoly:
    """(1 + h^s)/(1 - h^s) applied after removing the constant term."""
    if s == 0:
        raise ValueError("dilation exponent must be nonzero")
    _check_exponent(q, s)
    out = {}
    for m, v in a._c.items():
        if m == 0:
            continue
        out[m] = v * (1 + qpow(q, s * m)) / _resolvent_multiplier(q, s, m)
    return LaurentPoly(out)


def sum_polys(polys: Iterable[LaurentPoly]) -> LaurentPoly:
    acc: dict[int, object] = {}
    for p in polys:
        for m, v in p._c.items():
            acc[m] = acc[m] + v if m in acc else v
    return LaurentPoly(acc)


def one_minus_qpow(q, s, m):
    """1 - q^{sm}, guarded against near-resonance in numeric mode."""
    return _resolvent_multiplier(q, s, m)


def scalar(q, x):
    """Embed a rational constant into the backend selected by q."""
    if is_exact(q):
        return Fraction(x)
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator

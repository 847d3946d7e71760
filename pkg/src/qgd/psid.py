"""The algebra of q-pseudodifference operators with tracked validity windows.

An operator ``sum a_i(z) D^i`` is stored as a finite window of coefficients
together with a *floor*: the lowest D-degree whose coefficient is trusted.
Degrees below the floor belong to an unknown tail.  Operators built from
finite data are *complete* (floor ``-inf``) and lose nothing under products
until a genuinely truncated operand enters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath

from .coeffs import (
    LaurentPoly,
    dilate,
    format_scalar,
    is_exact,
    parse_scalar,
    qpow,
    sum_polys,
)

__all__ = [
    "COMPLETE",
    "QOp",
    "DoubledVector",
    "WindowError",
    "mul",
    "commutator",
    "proj",
    "res",
    "trace",
    "inner",
    "doubled_inner",
    "reconstruct_from_slices",
    "sigma",
]

COMPLETE = -math.inf

PARTS = ("+", "-", "0", "(+)", "(-)")


class WindowError(ValueError):
    """A requested coefficient lies below the trusted floor."""


def _same_q(a, b):
    if is_exact(a) != is_exact(b):
        raise TypeError("mixed scalar backends")
    if a != b:
        raise ValueError("operators built over different q")


class QOp:
    """Windowed q-pseudodifference operator ``sum_i a_i(z) D^i``."""

    __slots__ = ("q", "_c", "floor")

    def __init__(self, q, coeffs: dict[int, LaurentPoly] | None = None, floor=COMPLETE):
        self.q = q
        self.floor = floor
        c = {}
        if coeffs:
            for i, a in coeffs.items():
                if not isinstance(a, LaurentPoly):
                    a = LaurentPoly.const(a)
                if a and i >= floor:
                    c[int(i)] = a
        self._c = c

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, q, floor=COMPLETE) -> "QOp":
        return cls(q, {}, floor)

    @classmethod
    def one(cls, q) -> "QOp":
        return cls(q, {0: LaurentPoly.const(1)})

    @classmethod
    def D(cls, q, k: int = 1) -> "QOp":
        return cls(q, {k: LaurentPoly.const(1)})

    @classmethod
    def scalar(cls, q, a) -> "QOp":
        """Multiplication operator by the Laurent polynomial (or constant) ``a``."""
        return cls(q, {0: a})

    @classmethod
    def monic(cls, q, lower: list[LaurentPoly]) -> "QOp":
        """D^n + lower[n-1] D^{n-1} + ... + lower[0]."""
        c = {i: a for i, a in enumerate(lower)}
        c[len(lower)] = LaurentPoly.const(1)
        return cls(q, c)

    # -- inspection -------------------------------------------------------
    @property
    def is_complete(self) -> bool:
        return self.floor == COMPLETE

    @property
    def hi(self):
        if self._c:
            return max(self._c)
        return self.floor if not self.is_complete else COMPLETE

    @property
    def lo(self):
        """Lowest stored degree (not the floor)."""
        return min(self._c) if self._c else None

    def degrees(self) -> list[int]:
        return sorted(self._c)

    def coeff(self, i: int) -> LaurentPoly:
        if i < self.floor:
            raise WindowError(f"degree {i} is below the trusted floor {self.floor}")
        return self._c.get(i, LaurentPoly())

    def items(self):
        return iter(sorted(self._c.items(), reverse=True))

    def is_zero(self) -> bool:
        return not self._c

    def trusted_zero(self) -> bool:
        return not self._c

    def max_abs(self, lo=None):
        lo = -math.inf if lo is None else lo
        return max((a.max_abs() for i, a in self._c.items() if i >= lo), default=0)

    def window(self):
        return (self.floor, self.hi)

    # -- window management ------------------------------------------------
    def truncate(self, lo) -> "QOp":
        """Forget everything below ``lo`` (raises the floor)."""
        if lo <= self.floor:
            return self
        return QOp(self.q, self._c, lo)

    def restrict(self, lo=None, hi=None) -> "QOp":
        """Keep degrees in [lo, hi] without changing the floor."""
        lo = -math.inf if lo is None else lo
        hi = math.inf if hi is None else hi
        return QOp(self.q, {i: a for i, a in self._c.items() if lo <= i <= hi}, self.floor)

    def with_floor(self, floor) -> "QOp":
        return QOp(self.q, self._c, floor)

    def map_coeffs(self, fn: Callable[[int, LaurentPoly], LaurentPoly]) -> "QOp":
        return QOp(self.q, {i: fn(i, a) for i, a in self._c.items()}, self.floor)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "QOp":
        if isinstance(other, QOp):
            _same_q(self.q, other.q)
            return other
        return QOp.scalar(self.q, other)

    def __add__(self, other):
        other = self._coerce(other)
        floor = max(self.floor, other.floor)
        c = dict(self._c)
        for i, a in other._c.items():
            c[i] = c[i] + a if i in c else a
        return QOp(self.q, c, floor)

    __radd__ = __add__

    def __neg__(self):
        return QOp(self.q, {i: -a for i, a in self._c.items()}, self.floor)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QOp):
            return mul(self, other)
        if isinstance(other, LaurentPoly):
            return mul(self, QOp.scalar(self.q, other))
        return QOp(self.q, {i: a * other for i, a in self._c.items()}, self.floor)

    def __rmul__(self, other):
        if isinstance(other, LaurentPoly):
            return mul(QOp.scalar(self.q, other), self)
        return QOp(self.q, {i: other * a for i, a in self._c.items()}, self.floor)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("use frac.series_inverse for negative powers")
        out = QOp.one(self.q)
        for _ in range(k):
            out = mul(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, QOp):
            return NotImplemented
        return self.q == other.q and self.floor == other.floor and self._c == other._c

    def __hash__(self):
        return hash((self.floor, frozenset(self._c.items())))

    def agrees_with(self, other: "QOp", lo=None) -> bool:
        """Exact equality on the degrees trusted by both operands (and >= lo)."""
        floor = max(self.floor, other.floor)
        if lo is not None:
            floor = max(floor, lo)
        degs = {i for i in self._c if i >= floor} | {i for i in other._c if i >= floor}
        return all(self._c.get(i, LaurentPoly()) == other._c.get(i, LaurentPoly()) for i in degs)

    def distance(self, other: "QOp", lo=None):
        """Largest coefficient difference on the common trusted window."""
        floor = max(self.floor, other.floor)
        if lo is not None:
            floor = max(floor, lo)
        diff = (self - other).restrict(lo=floor)
        return diff.max_abs()

    def __repr__(self):
        if not self._c:
            body = "0"
        else:
            body = " + ".join(f"[{a!r}]D^{i}" for i, a in self.items())
        tail = "" if self.is_complete else f" + O(D^{self.floor - 1})"
        return f"QOp({body}{tail})"

    # -- serialisation ----------------------------------------------------
    def to_json(self) -> dict:
        hi = self.hi
        return {
            "q": format_scalar(self.q),
            "hi": None if hi == COMPLETE else int(hi),
            "floor": "complete" if self.is_complete else int(self.floor),
            "coeffs": {str(i): a.to_json() for i, a in self.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "QOp":
        qtext = str(data["q"])
        exact = "." not in qtext and "e" not in qtext.lower() and "j" not in qtext
        q = parse_scalar(qtext, exact)
        floor = data.get("floor", "complete")
        floor = COMPLETE if floor in ("complete", None) else int(floor)
        coeffs = {int(i): LaurentPoly.from_json(a, exact) for i, a in data["coeffs"].items()}
        op = cls(q, coeffs, floor)
        hi = data.get("hi")
        if hi is not None and op._c and max(op._c) > int(hi):
            raise ValueError("stored degree above declared hi")
        return op

    @classmethod
    def loads(cls, text: str) -> "QOp":
        return cls.from_json(json.loads(text))


def _product_floor(A: QOp, B: QOp):
    if A.is_zero() and A.is_complete or B.is_zero() and B.is_complete:
        return COMPLETE
    return max(A.floor + B.hi, A.hi + B.floor)


def mul(A: QOp, B: QOp, lo=None) -> QOp:
    """Operator product; coefficients below the propagated floor are dropped.

    ``lo`` optionally skips work below a degree the caller does not need
    (the result floor is raised accordingly).
    """
    _same_q(A.q, B.q)
    q = A.q
    floor = _product_floor(A, B)
    if lo is not None:
        floor = max(floor, lo)
    if (A.is_zero() and A.is_complete) or (B.is_zero() and B.is_complete):
        return QOp(q, {}, floor)
    buckets: dict[int, list[LaurentPoly]] = {}
    for i, a in A._c.items():
        for j, b in B._c.items():
            k = i + j
            if k < floor:
                continue
            buckets.setdefault(k, []).append(a * dilate(b, i, q))
    return QOp(q, {k: sum_polys(v) for k, v in buckets.items()}, floor)


def commutator(A: QOp, B: QOp, lo=None) -> QOp:
    return mul(A, B, lo) - mul(B, A, lo)


def proj(A: QOp, part: str) -> QOp:
    """Projection onto J_+, J_-, J_0, J_(+) = J_+ + J_0 or J_(-) = J_- + J_0.

    The nonnegative parts come out complete once every one of their
    coefficients is trusted; the negative parts keep the floor.
    """
    if part not in PARTS:
        raise ValueError(f"unknown part {part!r}")
    f = A.floor
    if part == "+":
        keep = {i: a for i, a in A._c.items() if i > 0}
        return QOp(A.q, keep, COMPLETE if f <= 1 else f)
    if part == "0":
        if f > 0:
            raise WindowError("degree-0 slice outside trusted window")
        return QOp(A.q, {0: A._c[0]} if 0 in A._c else {})
    if part == "(+)":
        if f > 0:
            raise WindowError("degree-0 slice outside trusted window")
        return QOp(A.q, {i: a for i, a in A._c.items() if i >= 0})
    top = -1 if part == "-" else 0
    if f > top:
        raise WindowError(f"no trusted content for part {part}")
    return QOp(A.q, {i: a for i, a in A._c.items() if i <= top}, f)


def res(A: QOp) -> LaurentPoly:
    """The D^0 coefficient."""
    if A.floor > 0:
        raise WindowError("trace outside trusted window")
    return A._c.get(0, LaurentPoly())


def trace(A: QOp):
    """Tr A = integral of Res A dz/z."""
    return res(A).coeff(0)


def inner(A: QOp, B: QOp):
    """<A, B> = Tr AB, summed directly over matching degrees."""
    _same_q(A.q, B.q)
    if _product_floor(A, B) > 0:
        raise WindowError("trace outside trusted window")
    q = A.q
    terms = []
    for i, a in A._c.items():
        b = B._c.get(-i)
        if b is None:
            continue
        for m, v in a._c.items():
            w = b._c.get(-m)
            if w is not None:
                terms.append(v * qpow(q, -i * m) * w)
    return sum(terms[1:], terms[0]) if terms else 0


@dataclass(frozen=True)
class DoubledVector:
    """Element of the double d = PsiD_q + PsiD_q."""

    first: QOp
    second: QOp

    def __post_init__(self):
        _same_q(self.first.q, self.second.q)

    def __add__(self, other: "DoubledVector") -> "DoubledVector":
        return DoubledVector(self.first + other.first, self.second + other.second)

    def __sub__(self, other: "DoubledVector") -> "DoubledVector":
        return DoubledVector(self.first - other.first, self.second - other.second)

    def __neg__(self):
        return DoubledVector(-self.first, -self.second)

    def scale(self, s) -> "DoubledVector":
        return DoubledVector(self.first * s, self.second * s)

    def bracket(self, other: "DoubledVector") -> "DoubledVector":
        return DoubledVector(commutator(self.first, other.first), commutator(self.second, other.second))

    def is_zero(self) -> bool:
        return self.first.is_zero() and self.second.is_zero()

    def max_abs(self):
        return max(self.first.max_abs(), self.second.max_abs())

    def window(self):
        return (max(self.first.floor, self.second.floor), max(self.first.hi, self.second.hi))


def doubled_inner(X: DoubledVector, Y: DoubledVector):
    """<<X, Y>> = <X1, Y1> - <X2, Y2>."""
    return inner(X.first, Y.first) - inner(X.second, Y.second)


def reconstruct_from_slices(B: QOp) -> QOp:
    """sum_i D^{-i} (D^i B)_0, which returns B for finitely supported B."""
    if not B.is_complete:
        raise WindowError("reconstruction needs a finitely supported operator")
    q = B.q
    out = QOp.zero(q)
    if B.is_zero():
        return out
    for i in range(-B.hi, -B.lo + 1):
        slice0 = proj(mul(QOp.D(q, i), B), "0")
        out = out + mul(QOp.D(q, -i), slice0)
    return out


def sigma(A: QOp, alpha) -> QOp:
    """Conjugation D^alpha A D^{-alpha}: dilate every coefficient by alpha."""
    return QOp(A.q, {i: dilate(a, alpha, A.q) for i, a in A._c.items()}, A.floor)


def exact_or_numeric_zero(x, tol=None) -> bool:
    if tol is None:
        return x == 0
    return abs(x) <= tol


def to_numeric(A: QOp, q=None) -> QOp:
    """Lift an exact operator to the mpmath backend."""
    qn = q if q is not None else mpmath.mpf(A.q.numerator) / A.q.denominator

    def conv(v):
        if isinstance(v, Fraction):
            return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
        return mpmath.mpc(v)

    return QOp(qn, {i: a.map(conv) for i, a in A._c.items()}, A.floor)


def jet_lift(A: QOp, V: QOp) -> QOp:
    """The jet-valued operator A + eps*V (floors combine as for a sum)."""
    from .coeffs import Jet

    _same_q(A.q, V.q)
    coeffs = {}
    for i in set(A._c) | set(V._c):
        a = A._c.get(i, LaurentPoly())
        v = V._c.get(i, LaurentPoly())
        ms = set(a.support()) | set(v.support())
        coeffs[i] = LaurentPoly({m: Jet(a.coeff(m), v.coeff(m)) for m in ms})
    return QOp(A.q, coeffs, max(A.floor, V.floor))


def jet_split(A: QOp) -> tuple[QOp, QOp]:
    """Inverse of ``jet_lift``: the value and eps-parts of a jet-valued operator."""
    from .coeffs import Jet

    val, der = {}, {}
    for i, a in A._c.items():
        val[i] = a.map(lambda x: x.value if isinstance(x, Jet) else x)
        der[i] = a.map(lambda x: x.deriv if isinstance(x, Jet) else 0)
    return QOp(A.q, val, A.floor), QOp(A.q, der, A.floor)


def jet_part(x):
    """eps-component of a jet scalar (0 for plain scalars)."""
    from .coeffs import Jet

    return x.deriv if isinstance(x, Jet) else 0

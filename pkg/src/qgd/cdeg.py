"""Symbols of complex degree, their exponential coordinates and Lax flows.

A symbol of degree alpha is stored as ``body * D^alpha`` with a normalised
body ``1 + u_1 D^-1 + u_2 D^-2 + ...`` (a QOp over the mpmath backend).
The exponential map is solved in closed form: every coefficient of
exp t(X + ln D) is a finite combination of t^p e^{s t ln q}, handled by
``ExpPoly``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .coeffs import LaurentPoly, Jet, format_scalar, is_exact, log_dilation_action, log_q, parse_scalar, qpow
from .frac import series_inverse
from .gdbracket import GradientPair, canonical_r
from .psid import (
    COMPLETE,
    DoubledVector,
    QOp,
    WindowError,
    commutator,
    doubled_inner,
    inner,
    jet_lift,
    jet_part,
    jet_split,
    mul,
    proj,
    sigma,
)

__all__ = [
    "NonGenericDegree",
    "CSymbol",
    "ExtElement",
    "ExpPoly",
    "mul_c",
    "log_derivation",
    "cocycle",
    "ext_pairing",
    "exp_map",
    "exp_coefficients",
    "log_map",
    "is_generic",
    "power",
    "to_qop",
    "hamiltonian_c",
    "lax_rhs_c",
    "grad_hamiltonian_c",
    "dbar_hamiltonian",
    "gradients_c",
    "bracket_c",
    "vector_field_c",
    "p00_contribution",
    "phi_fl",
    "submanifold_residual",
    "casimir_un_residual",
    "right_tangent",
    "left_tangent",
    "integer_symbol",
    "truncated",
    "random_csymbol",
    "tangent_quotients",
    "near_unit",
    "directional_c",
    "flow_commutator_c",
]


# The exp/log recursions cancel large intermediate terms (log coefficients
# grow roughly geometrically with depth), so they run with extra digits.
GUARD_DIGITS = 30


def _guarded(fn):
    @functools.wraps(fn)
    def inner_fn(*args, **kwargs):
        with mpmath.workdps(mp.dps + GUARD_DIGITS):
            return fn(*args, **kwargs)

    return inner_fn


class NonGenericDegree(ArithmeticError):
    """The degree is (numerically) resonant: alpha ln q / 2 pi i is rational."""


# -- symbols ------------------------------------------------------------------


@dataclass(frozen=True)
class CSymbol:
    """body * D^alpha with body = 1 + sum_i u_i D^{-i}."""

    alpha: object
    body: QOp

    def __post_init__(self):
        b = self.body
        if b.degrees() and b.hi > 0:
            raise ValueError("symbol body must have no positive degrees")
        if b.floor > 0 or b.coeff(0) != LaurentPoly.const(1):
            raise ValueError("symbol body must be normalised (leading coefficient 1)")

    @property
    def q(self):
        return self.body.q

    @classmethod
    def from_coeffs(cls, q, alpha, coeffs: list[LaurentPoly], complete: bool = False) -> "CSymbol":
        c = {0: LaurentPoly.const(mpmath.mpf(1))}
        for i, u in enumerate(coeffs, start=1):
            c[-i] = u
        floor = COMPLETE if complete else -len(coeffs)
        return cls(alpha, QOp(q, c, floor))

    @classmethod
    def unit(cls, q, alpha=0) -> "CSymbol":
        return cls(alpha, QOp(q, {0: LaurentPoly.const(mpmath.mpf(1))}))

    def coeff(self, i: int) -> LaurentPoly:
        return self.body.coeff(-i)

    @property
    def depth(self):
        return -self.body.floor

    def distance(self, other: "CSymbol"):
        return max(abs(self.alpha - other.alpha), self.body.distance(other.body))

    def to_json(self) -> dict:
        K = self.depth if self.body.floor != COMPLETE else -(self.body.lo or 0)
        return {
            "alpha": format_scalar(self.alpha),
            "coeffs": [self.coeff(i).to_json() for i in range(1, int(K) + 1)],
        }

    @classmethod
    def from_json(cls, data: dict, q) -> "CSymbol":
        alpha = mpmath.mpmathify(str(data["alpha"]).replace(" ", ""))
        coeffs = [LaurentPoly.from_json(u, exact=False) for u in data["coeffs"]]
        return cls.from_coeffs(q, alpha, coeffs)


def mul_c(L1: CSymbol, L2: CSymbol) -> CSymbol:
    """(B1 D^a1)(B2 D^a2) = B1 sigma_a1(B2) D^{a1+a2}."""
    return CSymbol(L1.alpha + L2.alpha, mul(L1.body, sigma(L2.body, L1.alpha)))


def integer_symbol(L: QOp) -> CSymbol:
    """Embed a monic q-difference operator of order n as L D^{-n} D^n."""
    n = L.hi
    q = L.q
    if not is_exact(q):
        body = mul(L, QOp.D(q, -n))
        return CSymbol(mpmath.mpf(n), body)
    raise TypeError("complex-degree symbols need the numeric backend")


def to_qop(L: CSymbol, tol=None) -> QOp:
    """Integer-degree symbol as an operator sum u_i D^{m-i}."""
    tol = mpmath.mpf(10) ** (10 - mp.dps) if tol is None else tol
    m = int(mpmath.nint(mpmath.re(L.alpha)))
    if abs(L.alpha - m) > tol:
        raise ValueError("symbol degree is not an integer")
    return mul(L.body, QOp.D(L.q, m))


# -- the double extension -------------------------------------------------------


@dataclass(frozen=True)
class ExtElement:
    """X + a ln D + b c."""

    X: QOp
    lnD: object = 0
    c: object = 0


def log_derivation(X: QOp) -> QOp:
    """[ln D, X]: z d/dz on every coefficient (times ln q, or 1 in exact mode)."""
    return X.map_coeffs(lambda i, a: log_dilation_action(a, X.q))


def cocycle(X, Y):
    """omega(X, Y) = <[ln D, X], Y>."""
    X = X.X if isinstance(X, ExtElement) else X
    Y = Y.X if isinstance(Y, ExtElement) else Y
    return inner(log_derivation(X), Y)


def ext_pairing(U: ExtElement, V: ExtElement):
    """<X + a ln D + b c, Y + g ln D + d c> = <X, Y> + a d + b g."""
    return inner(U.X, V.X) + U.lnD * V.c + U.c * V.lnD


# -- closed-form exponential ------------------------------------------------------


class ExpPoly:
    """Finite sum of c_{p,s} t^p e^{s lam t}."""

    __slots__ = ("lam", "terms")

    def __init__(self, lam, terms: dict | None = None):
        self.lam = lam
        self.terms = {k: v for k, v in (terms or {}).items() if not v == 0}

    @classmethod
    def const(cls, lam, c) -> "ExpPoly":
        return cls(lam, {(0, 0): c})

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t[k] + v if k in t else v
        return ExpPoly(self.lam, t)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + other.scale(-1)

    def scale(self, c) -> "ExpPoly":
        return ExpPoly(self.lam, {k: v * c for k, v in self.terms.items()})

    def shift(self, s: int) -> "ExpPoly":
        """Multiply by e^{s lam t}."""
        return ExpPoly(self.lam, {(p, r + s): v for (p, r), v in self.terms.items()})

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        t: dict = {}
        for (p1, s1), v1 in self.terms.items():
            for (p2, s2), v2 in other.terms.items():
                k = (p1 + p2, s1 + s2)
                t[k] = t[k] + v1 * v2 if k in t else v1 * v2
        return ExpPoly(self.lam, t)

    def derivative(self) -> "ExpPoly":
        t: dict = {}
        for (p, s), v in self.terms.items():
            if s != 0:
                t[(p, s)] = t.get((p, s), 0) + v * (s * self.lam)
            if p > 0:
                t[(p - 1, s)] = t.get((p - 1, s), 0) + v * p
        return ExpPoly(self.lam, t)

    def antiderivative(self) -> "ExpPoly":
        """The primitive vanishing at t = 0."""
        t: dict = {}

        def put(k, v):
            t[k] = t[k] + v if k in t else v

        for (p, s), v in self.terms.items():
            if s == 0:
                put((p + 1, 0), v / (p + 1))
                continue
            mu = s * self.lam
            fact = 1
            # sum_k (-1)^k p!/(p-k)! t^{p-k} e^{mu t} / mu^{k+1}
            for k in range(p + 1):
                if k:
                    fact *= p - k + 1
                put((p - k, s), v * ((-1) ** k * fact) / mu ** (k + 1))
            put((0, 0), -v * ((-1) ** p * fact) / mu ** (p + 1))
        return ExpPoly(self.lam, t)

    def evaluate(self, t):
        if t == 0:
            return sum((v for (p, s), v in self.terms.items() if p == 0), 0)
        total = 0
        for (p, s), v in self.terms.items():
            term = v * (t**p if p else 1)
            if s:
                term = term * mpmath.exp(s * self.lam * t)
            total = total + term
        return total

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return (self - other).terms == {}

    def __repr__(self):
        return " + ".join(f"{v}*t^{p}*e^{s}lt" for (p, s), v in sorted(self.terms.items())) or "0"


def _level(A: list[dict], X: dict[int, LaurentPoly], i: int, q, lam, include_top: bool) -> dict:
    """Integrand of A_i as {m: ExpPoly}, from A_0..A_{i-1} and X_1..X_i."""
    out: dict[int, ExpPoly] = {}
    for j in range(0 if include_top else 1, i):
        Xk = X.get(i - j)
        if Xk is None:
            continue
        for n, a in A[j].items():
            for k, x in Xk.items():
                m = n + k
                term = a.shift(k).scale(x * qpow(q, -j * k))
                out[m] = out[m] + term if m in out else term
    return out


def exp_coefficients(X: QOp, K: int, lam=None) -> list[dict]:
    """A_i^m(t) for i = 0..K as ExpPolys, where exp t(X + ln D) = A(t) D^t."""
    q = X.q
    lam = log_q(q) if lam is None else lam
    one = Fraction(1) if is_exact(q) else mpmath.mpf(1)
    Xd = {-i: a for i, a in X.items() if 0 < -i <= K}
    A: list[dict] = [{0: ExpPoly.const(lam, one)}]
    for i in range(1, K + 1):
        integrand = _level(A, Xd, i, q, lam, include_top=True)
        A.append({m: f.antiderivative() for m, f in integrand.items()})
    return A


def _check_depth(X: QOp, K: int):
    if X.degrees() and X.hi >= 0:
        raise ValueError("exponent must lie in J_-")
    if X.floor > -K:
        raise WindowError("exponent not trusted to the requested depth")


@_guarded
def exp_map(X: QOp, alpha, K: int) -> CSymbol:
    """exp alpha (X + ln D)."""
    _check_depth(X, K)
    A = exp_coefficients(X, K)
    body = {0: LaurentPoly.const(mpmath.mpf(1))}
    for i in range(1, K + 1):
        body[-i] = LaurentPoly({m: f.evaluate(alpha) for m, f in A[i].items()})
    return CSymbol(alpha, QOp(X.q, body, -K))


def is_generic(alpha, q, max_den: int = 64, tol=1e-8) -> bool:
    """Heuristic test that alpha ln q / 2 pi i is irrational."""
    x = alpha * log_q(q) / (2j * mpmath.pi)
    x = mpmath.mpc(x)
    if abs(x.imag) > tol:
        return True
    re = x.real
    for den in range(1, max_den + 1):
        if abs(re * den - mpmath.nint(re * den)) / den <= tol:
            return False
    return True


def _g(alpha, m, lam):
    """integral_0^alpha e^{m lam w} dw."""
    if m == 0:
        return alpha
    return (mpmath.exp(alpha * m * lam) - 1) / (m * lam)


@_guarded
def log_map(L: CSymbol, K: int | None = None) -> QOp:
    """The X in J_- with exp_map(X, deg L) = L, solved level by level."""
    alpha, q = L.alpha, L.q
    if not is_generic(alpha, q):
        raise NonGenericDegree("non-generic degree")
    K = int(L.depth) if K is None else K
    if K == math.inf:
        raise ValueError("give an explicit depth for finite symbols")
    lam = log_q(q)
    tiny = mpmath.mpf(10) ** (5 - mp.dps)
    A: list[dict] = [{0: ExpPoly.const(lam, mpmath.mpf(1))}]
    Xd: dict[int, LaurentPoly] = {}
    for i in range(1, K + 1):
        known = _level(A, Xd, i, q, lam, include_top=False)
        known_A = {m: f.antiderivative() for m, f in known.items()}
        target = L.coeff(i)
        xi = {}
        for m in set(target.support()) | set(known_A):
            rhs = target.coeff(m) - (known_A[m].evaluate(alpha) if m in known_A else 0)
            g = _g(alpha, m, lam)
            if abs(g) < tiny:
                raise NonGenericDegree("non-generic degree")
            xi[m] = rhs / g
        Xd[i] = LaurentPoly(xi)
        full = _level(A, Xd, i, q, lam, include_top=True)
        A.append({m: f.antiderivative() for m, f in full.items()})
    return QOp(q, {-i: a for i, a in Xd.items()}, -K)


@_guarded
def power(L: CSymbol, beta) -> CSymbol:
    """L^beta = exp alpha beta (X + ln D) with L = exp alpha (X + ln D)."""
    X = log_map(L)
    return exp_map(X, L.alpha * beta, int(L.depth))


def truncated(L: CSymbol, K: int) -> CSymbol:
    """A finite symbol viewed as trusted down to D^{alpha-K} only."""
    return CSymbol(L.alpha, L.body.restrict(lo=-K).with_floor(-K))


def random_csymbol(rng, q, alpha, K: int, exps=range(-2, 3), complete: bool = False) -> CSymbol:
    """Random symbol with small sparse coefficients u_1..u_K."""
    coeffs = []
    for _ in range(K):
        c = {}
        for _ in range(rng.randint(1, 2)):
            c[rng.choice(list(exps))] = mpmath.mpf(rng.randint(-5, 5)) / rng.randint(1, 7)
        coeffs.append(LaurentPoly(c))
    return CSymbol.from_coeffs(q, alpha, coeffs, complete=complete)


# -- flows and Hamiltonians ---------------------------------------------------------


def _integer_power(L: CSymbol, m: int) -> QOp:
    """L^{m/alpha} as an operator of integer degree m."""
    P = power(L, mpmath.mpf(m) / L.alpha)
    return mul(P.body, QOp.D(L.q, m))


def hamiltonian_c(L: CSymbol, m: int):
    """H_m = (alpha/m) Tr L^{m/alpha}."""
    M = _integer_power(L, m)
    if M.floor > 0:
        raise WindowError("insufficient depth")
    from .psid import trace

    return L.alpha / m * trace(M)


def lax_rhs_c(L: CSymbol, m: int) -> QOp:
    """Body of [L^{m/alpha}_(+), L]: M B - B sigma_alpha(M)."""
    M = _integer_power(L, m)
    if M.floor > 0:
        raise WindowError("insufficient depth")
    Mp = proj(M, "(+)")
    return mul(Mp, L.body) - mul(L.body, sigma(Mp, L.alpha))


def grad_hamiltonian_c(L: CSymbol, m: int) -> GradientPair:
    M = _integer_power(L, m)
    return GradientPair(M, M, None)


def dbar_hamiltonian(L: CSymbol, m: int) -> QOp:
    """D^alpha L^{m/alpha - 1} = sigma_alpha(L^{m/alpha}) body^{-1}."""
    M = _integer_power(L, m)
    return mul(sigma(M, L.alpha), series_inverse(L.body))


def gradients_c(dbar: QOp, L: CSymbol) -> GradientPair:
    """(body dbar, sigma_{-alpha}(dbar body))."""
    return GradientPair(mul(L.body, dbar), sigma(mul(dbar, L.body), -L.alpha), dbar)


def _grad(phi, L: CSymbol) -> GradientPair:
    if isinstance(phi, GradientPair):
        return phi
    return gradients_c(phi, L)


def bracket_c(phi, psi, L: CSymbol, half=None):
    """Generalised quadratic bracket; phi, psi are dbar operators or gradient pairs."""
    R = canonical_r(L.q, L.alpha, half)
    gp, gs = _grad(phi, L), _grad(psi, L)
    return doubled_inner(R(gp.doubled()), gs.doubled())


def vector_field_c(phi, L: CSymbol) -> QOp:
    """Body of the Hamiltonian field: X1 B - B sigma_alpha(X2)."""
    R = canonical_r(L.q, L.alpha)
    X = R(_grad(phi, L).doubled())
    return mul(X.first, L.body) - mul(L.body, sigma(X.second, L.alpha))


def p00_contribution(phi, psi, L: CSymbol):
    """Part of bracket_c coming from the off-diagonal P00 terms."""
    gp, gs = _grad(phi, L), _grad(psi, L)
    from .psid import trace

    half = mpmath.mpf(1) / 2
    return half * (trace(gp.nabla_prime) * trace(gs.nabla) - trace(gp.nabla) * trace(gs.nabla_prime))


def phi_fl(f: LaurentPoly, l: int, q) -> QOp:
    """dbar of phi_{f,l} = integral u_l f dz/z, namely D^l f."""
    return mul(QOp.D(q, l), QOp.scalar(q, f))


def submanifold_residual(L: CSymbol, f: LaurentPoly, l: int, psi):
    """{phi_{f,l}, psi} on the truncated family (l beyond the truncation)."""
    return bracket_c(phi_fl(f, l, L.q), psi, L)


def casimir_un_residual(L: CSymbol, f: LaurentPoly, psi):
    """{phi_{f,n}, psi} at integer degree n with u_n the last coefficient."""
    n = int(mpmath.nint(mpmath.re(L.alpha)))
    return bracket_c(phi_fl(f, n, L.q), psi, L)


# -- tangent maps ---------------------------------------------------------------------


def right_tangent(L: CSymbol, Xbar: QOp, Xt) -> QOp:
    """Body part of the right-translated tangent vector: X B + Xt [ln D, B]."""
    return mul(Xbar, L.body) + log_derivation(L.body) * Xt


def left_tangent(L: CSymbol, Xbar: QOp) -> QOp:
    """Body part of the left-translated tangent vector: B sigma_alpha(X)."""
    return mul(L.body, sigma(Xbar, L.alpha))


def tangent_quotients(L: CSymbol, Xbar: QOp, Xt, h):
    """Central difference quotients of h -> e(h) L and h -> L e(h), e(h) = (1 + h X) D^{h Xt}.

    Returns (right body, right degree, left body, left degree).
    """
    plus, minus = near_unit(L.q, Xbar, Xt, h), near_unit(L.q, Xbar, Xt, -h)
    r1, r0 = mul_c(plus, L), mul_c(minus, L)
    l1, l0 = mul_c(L, plus), mul_c(L, minus)
    return (
        (r1.body - r0.body) * (1 / (2 * h)),
        (r1.alpha - r0.alpha) / (2 * h),
        (l1.body - l0.body) * (1 / (2 * h)),
        (l1.alpha - l0.alpha) / (2 * h),
    )


def near_unit(q, Xbar: QOp, Xt, h) -> CSymbol:
    """(1 + h Xbar) D^{h Xt}."""
    one = QOp(q, {0: LaurentPoly.const(mpmath.mpf(1))})
    return CSymbol(h * Xt, one + Xbar * h)


def lift_jet_symbol(L: CSymbol, V: QOp) -> CSymbol:
    return CSymbol(L.alpha, jet_lift(L.body, V.restrict(hi=-1)))


def directional_c(fn, L: CSymbol, V: QOp):
    """eps-part of fn at body + eps V (scalar or operator valued)."""
    out = fn(lift_jet_symbol(L, V))
    if isinstance(out, QOp):
        return jet_split(out)[1]
    return jet_part(out)


def flow_commutator_c(L: CSymbol, m1: int, m2: int) -> QOp:
    """D_{V1} V2 - D_{V2} V1 for the Lax fields V_m = lax_rhs_c(L, m)."""
    V1, V2 = lax_rhs_c(L, m1), lax_rhs_c(L, m2)
    a = directional_c(lambda S: lax_rhs_c(S, m2), L, V1)
    b = directional_c(lambda S: lax_rhs_c(S, m1), L, V2)
    return a - b

"""q-deformed Gelfand-Dickey Poisson structures on M_n.

The quadratic bracket is evaluated in r-matrix form on the double
d = PsiD + PsiD, and independently from the coordinate formula for the
generating functions u_i(z).  The r-matrices are assembled from maps on the
degree-0 coefficients (``J0Map``) whose adjoints are known in closed form, so
skewness and the modified Yang-Baxter equation can be checked for any member
of the family, not only the canonical one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .coeffs import LaurentPoly, dilate, is_exact, one_minus_qpow, qpow, scalar
from .frac import check_monic, frac_power
from .hierarchy import hamiltonian, tangent_part
from .psid import (
    DoubledVector,
    QOp,
    WindowError,
    commutator,
    doubled_inner,
    inner,
    jet_lift,
    jet_part,
    mul,
    proj,
)

__all__ = [
    "ElemFun",
    "LinearFunctional",
    "TraceHamiltonian",
    "GradientPair",
    "J0Map",
    "OpMap",
    "BlockR",
    "BracketSpec",
    "zeta",
    "casimir_functional",
    "differential",
    "gradients",
    "canonical_r",
    "alternative_r",
    "rs_map",
    "bracket",
    "coordinate_bracket",
    "hamiltonian_vector_field",
    "vector_field",
    "casimir_leading_residual",
    "mcybe_residual",
    "schouten_delta",
    "r_cyclic_sides",
    "jacobi_residual",
    "random_j0_map",
    "random_block_r",
    "skew_residual",
    "tangency_defect",
    "elementary_functionals",
]


# -- functionals --------------------------------------------------------------


@dataclass(frozen=True)
class ElemFun:
    """zeta_i^j: the z^j coefficient of u_i."""

    i: int
    j: int

    def differential(self, q) -> QOp:
        # D^{-i} z^{-j} = q^{ij} z^{-j} D^{-i}
        return QOp(q, {-self.i: LaurentPoly.monomial(-self.j, qpow(q, self.i * self.j))})

    def value(self, L: QOp):
        return L.coeff(self.i).coeff(self.j)

    def gradients(self, L: QOp) -> "GradientPair":
        return GradientPair.from_differential(self.differential(L.q), L)


@dataclass(frozen=True)
class LinearFunctional:
    """phi(X) = <d, X> for a fixed operator d."""

    d: QOp

    def differential(self, q) -> QOp:
        return self.d

    def value(self, L: QOp):
        return inner(self.d, L)

    def gradients(self, L: QOp) -> "GradientPair":
        return GradientPair.from_differential(self.d, L)

    def __add__(self, other):
        return LinearFunctional(self.d + _as_linear(other, self.d.q).d)

    def scale(self, c) -> "LinearFunctional":
        return LinearFunctional(self.d * c)


def _as_linear(phi, q) -> LinearFunctional:
    if isinstance(phi, LinearFunctional):
        return phi
    return LinearFunctional(phi.differential(q))


@dataclass(frozen=True)
class TraceHamiltonian:
    """H_m = (n/m) Tr L^{m/n}, computed to depth K."""

    m: int
    n: int
    K: int

    def differential(self, L: QOp) -> QOp:
        return frac_power(L, self.m - self.n, self.n, self.K)

    def value(self, L: QOp):
        return hamiltonian(L, self.m, self.n, self.K)

    def gradients(self, L: QOp) -> "GradientPair":
        G = frac_power(L, self.m, self.n, self.K)
        return GradientPair(G, G, self.differential(L))


def zeta(i: int, j: int) -> ElemFun:
    return ElemFun(i, j)


def casimir_functional(f: LaurentPoly, n: int, q) -> LinearFunctional:
    """phi_f with d phi_f = D^{-n} f."""
    return LinearFunctional(QOp(q, {-n: dilate(f, -n, q)}))


def differential(phi, L: QOp) -> QOp:
    if isinstance(phi, TraceHamiltonian):
        return phi.differential(L)
    return phi.differential(L.q)


@dataclass(frozen=True)
class GradientPair:
    """(grad phi, grad' phi) = (L dphi, dphi L), optionally with dphi itself."""

    nabla: QOp
    nabla_prime: QOp
    differential: QOp | None = None

    @classmethod
    def from_differential(cls, d: QOp, L: QOp) -> "GradientPair":
        return cls(mul(L, d), mul(d, L), d)

    def doubled(self) -> DoubledVector:
        return DoubledVector(self.nabla, self.nabla_prime)


def gradients(phi, L: QOp) -> GradientPair:
    return phi.gradients(L)


# -- maps on J_0 with closed-form adjoints -------------------------------------


class J0Map:
    """Linear map on Laurent polynomials (the degree-0 slice) with known adjoint.

    Adjoints are taken with respect to <a, b> = integral of a*b dz/z.
    """

    is_zero = False

    def apply(self, a: LaurentPoly) -> LaurentPoly:
        raise NotImplementedError

    def adjoint(self) -> "J0Map":
        raise NotImplementedError

    def __call__(self, a: LaurentPoly) -> LaurentPoly:
        return self.apply(a)

    def __add__(self, other: "J0Map") -> "J0Map":
        return _Sum((self, other))

    def __sub__(self, other: "J0Map") -> "J0Map":
        return _Sum((self, _Scaled(-1, other)))

    def __neg__(self):
        return _Scaled(-1, self)

    def __matmul__(self, other: "J0Map") -> "J0Map":
        return _Compose(self, other)

    def scale(self, c) -> "J0Map":
        return _Scaled(c, self)


class ZeroMap(J0Map):
    is_zero = True

    def apply(self, a):
        return LaurentPoly()

    def adjoint(self):
        return self

    def __repr__(self):
        return "0"


class Identity(J0Map):
    def apply(self, a):
        return a

    def adjoint(self):
        return self

    def __repr__(self):
        return "id"


@dataclass(frozen=True, eq=False)
class MulBy(J0Map):
    p: LaurentPoly

    def apply(self, a):
        return self.p * a

    def adjoint(self):
        return self


@dataclass(frozen=True, eq=False)
class Dilation(J0Map):
    k: object
    q: object

    def apply(self, a):
        return dilate(a, self.k, self.q)

    def adjoint(self):
        return Dilation(-self.k, self.q)


class Mean(J0Map):
    """P00: g -> (integral g dz/z) * 1."""

    def apply(self, a):
        return LaurentPoly.const(a.coeff(0))

    def adjoint(self):
        return self

    def __repr__(self):
        return "P00"


class MeanFree(J0Map):
    """P0': g -> g - (integral g dz/z) * 1."""

    def apply(self, a):
        return LaurentPoly({m: v for m, v in a.items() if m != 0})

    def adjoint(self):
        return self

    def __repr__(self):
        return "P0'"


@dataclass(frozen=True, eq=False)
class Diagonal(J0Map):
    """z^m -> mu(m) z^m; the adjoint is z^m -> mu(-m) z^m."""

    mu: Callable[[int], object]
    name: str = "diag"

    def apply(self, a):
        return LaurentPoly({m: self.mu(m) * v for m, v in a.items()})

    def adjoint(self):
        mu = self.mu
        return Diagonal(lambda m: mu(-m), self.name + "*")


@dataclass(frozen=True, eq=False)
class _Sum(J0Map):
    terms: tuple

    def apply(self, a):
        out = LaurentPoly()
        for t in self.terms:
            out = out + t.apply(a)
        return out

    def adjoint(self):
        return _Sum(tuple(t.adjoint() for t in self.terms))


@dataclass(frozen=True, eq=False)
class _Scaled(J0Map):
    c: object
    inner_map: J0Map

    def apply(self, a):
        return self.inner_map.apply(a) * self.c

    def adjoint(self):
        return _Scaled(self.c, self.inner_map.adjoint())


@dataclass(frozen=True, eq=False)
class _Compose(J0Map):
    outer: J0Map
    inner_map: J0Map

    def apply(self, a):
        return self.outer.apply(self.inner_map.apply(a))

    def adjoint(self):
        return _Compose(self.inner_map.adjoint(), self.outer.adjoint())


def resolvent_map(q, s) -> Diagonal:
    """1/(1 - h^s) P0'."""
    return Diagonal(lambda m: 0 if m == 0 else 1 / one_minus_qpow(q, s, m), "1/(1-h^s)")


def shifted_resolvent_map(q, s) -> Diagonal:
    """h^s/(1 - h^s) P0'."""
    return Diagonal(lambda m: 0 if m == 0 else qpow(q, s * m) / one_minus_qpow(q, s, m), "h^s/(1-h^s)")


def cayley_map(q, s) -> Diagonal:
    """(1 + h^s)/(1 - h^s) P0'."""
    return Diagonal(
        lambda m: 0 if m == 0 else (1 + qpow(q, s * m)) / one_minus_qpow(q, s, m), "(1+h^s)/(1-h^s)"
    )


# -- maps on the whole algebra -------------------------------------------------


@dataclass(frozen=True)
class OpMap:
    """X -> plus*P_+ X + minus*P_- X + zero(X_0)."""

    plus: object
    minus: object
    zero: J0Map = field(default_factory=ZeroMap)

    def apply(self, X: QOp) -> QOp:
        q = X.q
        out = QOp.zero(q)
        if self.plus != 0:
            out = out + proj(X, "+") * self.plus
        if self.minus != 0:
            out = out + proj(X, "-") * self.minus
        if not self.zero.is_zero:
            out = out + QOp(q, {0: self.zero.apply(proj(X, "0").coeff(0))})
        return out

    __call__ = apply

    def adjoint(self) -> "OpMap":
        return OpMap(self.minus, self.plus, self.zero.adjoint())


@dataclass(frozen=True)
class BlockR:
    """R = [[A, B], [C, D]] acting on the double."""

    A: OpMap
    B: OpMap
    C: OpMap
    D: OpMap

    def apply(self, X: DoubledVector) -> DoubledVector:
        x1, x2 = X.first, X.second
        return DoubledVector(self.A(x1) + self.B(x2), self.C(x1) + self.D(x2))

    __call__ = apply

    def adjoint(self) -> "BlockR":
        """Adjoint for <<X, Y>> = <X1, Y1> - <X2, Y2>."""
        return BlockR(self.A.adjoint(), _neg(self.C.adjoint()), _neg(self.B.adjoint()), self.D.adjoint())


def _neg(M: OpMap) -> OpMap:
    return OpMap(-M.plus, -M.minus, -M.zero if not M.zero.is_zero else M.zero)


def canonical_r(q, n: int, half=None) -> BlockR:
    """The r-matrix of the quadratic bracket on M_n.

    ``half`` is the weight of the diagonal Cayley term; only 1/2 gives the
    Gelfand-Dickey structure (other values serve as negative controls).
    """
    h = scalar(q, Fraction(1, 2)) if half is None else half
    r_half = scalar(q, Fraction(1, 2))
    cay = cayley_map(q, n)
    mean_half = Mean().scale(r_half)
    return BlockR(
        OpMap(r_half, -r_half, cay.scale(h)),
        OpMap(0, 0, -shifted_resolvent_map(q, n) + mean_half),
        OpMap(0, 0, resolvent_map(q, n) + mean_half),
        OpMap(r_half, -r_half, cay.scale(-h)),
    )


def alternative_r(q, n: int) -> BlockR:
    """Second presentation of the same bracket, built on P_+ instead of r."""
    one = scalar(q, 1)
    return BlockR(
        OpMap(one, 0, resolvent_map(q, n)),
        OpMap(0, 0, -shifted_resolvent_map(q, n)),
        OpMap(0, 0, resolvent_map(q, n)),
        OpMap(one, 0, -shifted_resolvent_map(q, n)),
    )


def rs_map(q) -> OpMap:
    """r_s = (P_(+) - P_-)/2."""
    h = scalar(q, Fraction(1, 2))
    return OpMap(h, -h, Identity().scale(h))


# -- bracket specifications ---------------------------------------------------

KINDS = ("quadratic", "quadratic_alt", "linear", "pencil", "coordinate", "custom")

# command-line aliases for the kinds
ALIASES = {"f134": "quadratic", "f134p1": "quadratic_alt", "f192": "coordinate"}


@dataclass(frozen=True)
class BracketSpec:
    kind: str
    n: int
    alpha: object = None
    R: BlockR | None = None
    half: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bracket kind {self.kind!r}")
        if self.kind == "pencil" and self.alpha is None:
            raise ValueError("pencil needs alpha")
        if self.kind == "custom" and self.R is None:
            raise ValueError("custom bracket needs an r-matrix")

    @classmethod
    def parse(cls, text: str, n: int) -> "BracketSpec":
        text = text.strip()
        if text.startswith("pencil:"):
            return cls("pencil", n, alpha=Fraction(text.split(":", 1)[1]))
        return cls(ALIASES.get(text, text), n)

    def rmatrix(self, q) -> BlockR:
        if self.kind in ("quadratic", "pencil"):
            return canonical_r(q, self.n, self.half)
        if self.kind == "quadratic_alt":
            return alternative_r(q, self.n)
        if self.kind == "custom":
            return self.R
        raise ValueError(f"{self.kind} has no r-matrix")


def _quadratic(R: BlockR, gphi: GradientPair, gpsi: GradientPair):
    return doubled_inner(R(gphi.doubled()), gpsi.doubled())


def _linear(dphi: QOp, dpsi: QOp, L: QOp):
    rs = rs_map(L.q)
    return -(inner(commutator(rs(dphi), dpsi), L) + inner(commutator(dphi, rs(dpsi)), L))


def _check_order(spec: BracketSpec, L: QOp):
    if check_monic(L) != spec.n:
        raise ValueError("operator order does not match the bracket")


def bracket(spec: BracketSpec, phi, psi, L: QOp):
    """{phi, psi}(L) for the chosen structure."""
    _check_order(spec, L)
    if spec.kind == "coordinate":
        a, b = _as_elem(phi), _as_elem(psi)
        return coordinate_bracket(a.i, a.j, b.i, b.j, L, spec.n)
    gphi, gpsi = phi.gradients(L), psi.gradients(L)
    if spec.kind == "linear":
        return _linear(gphi.differential, gpsi.differential, L)
    value = _quadratic(spec.rmatrix(L.q), gphi, gpsi)
    if spec.kind == "pencil":
        value = value + spec.alpha * _linear(gphi.differential, gpsi.differential, L)
    return value


def _as_elem(phi) -> ElemFun:
    if not isinstance(phi, ElemFun):
        raise TypeError("coordinate formula needs elementary functionals")
    return phi


def coordinate_bracket(i: int, a: int, j: int, b: int, L: QOp, n: int):
    """{u_{i,a}, u_{j,b}} from the generating-function formula (u_n = 1)."""
    if not (0 <= i <= n and 0 <= j <= n):
        raise ValueError("coordinate indices must satisfy 0 <= i, j <= n")
    q = L.q

    def u(k) -> LaurentPoly:
        if k == n:
            return LaurentPoly.const(1)
        if 0 <= k < n:
            return L.coeff(k)
        return LaurentPoly()

    total = 0
    ui, uj = u(i), u(j)
    for s, v in ui.items():
        m = s - a
        if m == 0:
            continue
        w = uj.coeff(b - m)
        if w == 0:
            continue
        c = one_minus_qpow(q, n - i, m) * one_minus_qpow(q, j, m) / one_minus_qpow(q, n, m)
        total = total + c * v * w
    for r in range(1, min(n - i, j) + 1):
        up, um = u(i + r), u(j - r)
        # delta(w q^r / z) u_{i+r}(w) u_{j-r}(z)
        for s, v in up.items():
            k = b - s
            w = um.coeff(a + k)
            if w != 0:
                total = total + qpow(q, r * k) * v * w
        # delta(w / (z q^{i-j+r})) u_{i+r}(z) u_{j-r}(w)
        for s, v in up.items():
            k = s - a
            w = um.coeff(b - k)
            if w != 0:
                total = total - qpow(q, -(i - j + r) * k) * v * w
    return total


# -- Hamiltonian vector fields ----------------------------------------------------


def hamiltonian_vector_field(spec: BracketSpec, g: GradientPair, L: QOp) -> QOp:
    """V_H with <dphi, V_H> = {H, phi}."""
    if spec.kind == "coordinate":
        raise ValueError("the coordinate formula has no vector field")
    if spec.kind == "linear":
        return _linear_field(g.differential, L)
    R = spec.rmatrix(L.q)
    X = R(g.doubled())
    V = mul(X.first, L) - mul(L, X.second)
    if spec.kind == "pencil":
        V = V + _linear_field(g.differential, L) * spec.alpha
    return V


def _linear_field(d: QOp | None, L: QOp) -> QOp:
    if d is None:
        raise ValueError("linear bracket needs the differential")
    rs = rs_map(L.q)
    return commutator(rs(d), L) + rs.adjoint()(commutator(d, L))


def vector_field(spec: BracketSpec, phi, L: QOp) -> QOp:
    return hamiltonian_vector_field(spec, phi.gradients(L), L)


def casimir_leading_residual(f: LaurentPoly, psi, L: QOp):
    n = check_monic(L)
    return bracket(BracketSpec("quadratic", n), casimir_functional(f, n, L.q), psi, L)


# -- Jacobi identity and mCYBE ----------------------------------------------------


def mcybe_residual(R: BlockR, X: DoubledVector, Y: DoubledVector) -> DoubledVector:
    """[RX, RY] - R([RX, Y] + [X, RY]) + [X, Y]/4."""
    RX, RY = R(X), R(Y)
    quarter = scalar(X.first.q, Fraction(1, 4))
    return RX.bracket(RY) - R(RX.bracket(Y) + X.bracket(RY)) + X.bracket(Y).scale(quarter)


def _cyclic(triple):
    a, b, c = triple
    return ((a, b, c), (b, c, a), (c, a, b))


def schouten_delta(R: BlockR, phi, psi, chi, L: QOp):
    """Cyclic sum of <<[R Dphi, R Dpsi], Dchi>>."""
    D = {id(f): f.gradients(L).doubled() for f in (phi, psi, chi)}
    total = 0
    for a, b, c in _cyclic((phi, psi, chi)):
        total = total + doubled_inner(R(D[id(a)]).bracket(R(D[id(b)])), D[id(c)])
    return total


def r_cyclic_sides(R: BlockR, X: DoubledVector, Y: DoubledVector, Z: DoubledVector):
    """(cyclic sum of <<[RX, RY], Z>>, -<<[X, Y], Z>>/4)."""
    lhs = 0
    for a, b, c in _cyclic((X, Y, Z)):
        lhs = lhs + doubled_inner(R(a).bracket(R(b)), c)
    quarter = scalar(X.first.q, Fraction(1, 4))
    return lhs, -quarter * doubled_inner(X.bracket(Y), Z)


def jacobi_residual(spec: BracketSpec, phi, psi, chi, L: QOp):
    """Cyclic sum of {a, {b, c}}, each term the jet derivative of {b, c} along V_a.

    The field is restricted to the tangent degrees 0..n-1 before use.
    """
    n = spec.n
    total = 0
    for a, b, c in _cyclic((phi, psi, chi)):
        V = tangent_part(vector_field(spec, a, L), n)
        total = total + jet_part(bracket(spec, b, c, jet_lift(L, V)))
    return total


def tangency_defect(spec: BracketSpec, phi, L: QOp) -> QOp:
    """Part of V_phi outside the tangent degrees 0..n-1 (on the trusted window)."""
    V = vector_field(spec, phi, L)
    return V - V.restrict(0, spec.n - 1)


# -- random members of the r-matrix family --------------------------------------------


def random_j0_map(rng, q, length: int = 2, exps=range(-2, 3), bound=5) -> J0Map:
    """A random composition of z^p multiplications, dilations and P00."""
    out: J0Map = Identity()
    for _ in range(length):
        kind = rng.choice(("mul", "dil", "mean"))
        if kind == "mul":
            c = scalar(q, Fraction(rng.randint(-bound, bound) or 1, rng.randint(1, bound)))
            prim: J0Map = MulBy(LaurentPoly.monomial(rng.choice(list(exps)), c))
        elif kind == "dil":
            prim = Dilation(rng.choice((-2, -1, 1, 2)), q)
        else:
            prim = Mean()
        out = prim @ out
    return out


def random_block_r(rng, q) -> BlockR:
    """r-matrix with random a = -a*, d = -d*, b = c* on J_0."""
    h = scalar(q, Fraction(1, 2))
    g1, g2, c = random_j0_map(rng, q), random_j0_map(rng, q), random_j0_map(rng, q)
    a = g1 - g1.adjoint()
    d = g2 - g2.adjoint()
    return BlockR(OpMap(h, -h, a), OpMap(0, 0, c.adjoint()), OpMap(0, 0, c), OpMap(h, -h, d))


def skew_residual(R: BlockR, X: DoubledVector, Y: DoubledVector):
    """<<RX, Y>> + <<X, RY>>, zero for skew R."""
    return doubled_inner(R(X), Y) + doubled_inner(X, R(Y))


def elementary_functionals(n: int, amax: int, include_top: bool = False) -> list[ElemFun]:
    top = n if include_top else n - 1
    return [ElemFun(i, a) for i in range(top + 1) for a in range(-amax, amax + 1)]

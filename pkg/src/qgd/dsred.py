"""Matrix q-difference systems and the reduction to scalar operators.

Loop matrices are n x n arrays of Laurent polynomials.  The reduced bracket
is computed from lifted gradients at the companion matrix of L and compared
with the scalar r-matrix bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .coeffs import LaurentPoly, dilate, is_exact, qpow, scalar
from .frac import check_monic
from .psid import QOp, mul, proj, res

__all__ = [
    "LoopMat",
    "companion_of",
    "operator_of_companion",
    "gauge",
    "gauge_to_companion",
    "is_yn",
    "theta_apply",
    "theta_cayley",
    "theta_resolvent",
    "eigenvector_sums",
    "eigvec",
    "orthogonality_residual",
    "lift_gradient",
    "reduced_bracket",
    "random_gauge",
    "random_yn",
    "z_from_definition",
    "pairing",
    "unipotent_inverse",
    "mean_free_diagonal",
    "eigen_residual",
    "LiftedGradient",
    "normalized_differential",
]


@dataclass(frozen=True)
class LoopMat:
    """Square matrix with Laurent polynomial entries."""

    q: object
    rows: tuple

    def __post_init__(self):
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("loop matrix must be square")

    @classmethod
    def build(cls, q, entries) -> "LoopMat":
        return cls(q, tuple(tuple(e if isinstance(e, LaurentPoly) else LaurentPoly.const(e) for e in r) for r in entries))

    @classmethod
    def zeros(cls, q, n: int) -> "LoopMat":
        return cls.build(q, [[LaurentPoly()] * n for _ in range(n)])

    @classmethod
    def identity(cls, q, n: int) -> "LoopMat":
        return cls.build(q, [[LaurentPoly.const(1) if i == j else LaurentPoly() for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, q, diag) -> "LoopMat":
        n = len(diag)
        return cls.build(q, [[diag[i] if i == j else LaurentPoly() for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> LaurentPoly:
        i, j = ij
        return self.rows[i][j]

    def diag(self) -> list[LaurentPoly]:
        return [self.rows[i][i] for i in range(self.n)]

    def __add__(self, other: "LoopMat") -> "LoopMat":
        return LoopMat(self.q, tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "LoopMat") -> "LoopMat":
        return LoopMat(self.q, tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self):
        return LoopMat(self.q, tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, c) -> "LoopMat":
        return LoopMat(self.q, tuple(tuple(a * c for a in r) for r in self.rows))

    def __matmul__(self, other: "LoopMat") -> "LoopMat":
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = LaurentPoly()
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(tuple(row))
        return LoopMat(self.q, tuple(out))

    def dilate(self, t) -> "LoopMat":
        return LoopMat(self.q, tuple(tuple(dilate(a, t, self.q) for a in r) for r in self.rows))

    def trace(self) -> LaurentPoly:
        acc = LaurentPoly()
        for a in self.diag():
            acc = acc + a
        return acc

    def is_zero(self) -> bool:
        return all(not a for r in self.rows for a in r)

    def max_abs(self):
        return max((a.max_abs() for r in self.rows for a in r), default=0)

    def diagonal_part(self) -> "LoopMat":
        return LoopMat.diagonal(self.q, self.diag())

    def is_lower_triangular(self, unit: bool = False) -> bool:
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                if self.rows[i][j]:
                    return False
            if unit and self.rows[i][i] != LaurentPoly.const(1):
                return False
        return True

    def to_json(self) -> list:
        return [[a.to_json() for a in r] for r in self.rows]


def pairing(A: LoopMat, B: LoopMat):
    """<A, B> = integral of Tr AB dz/z."""
    acc = 0
    for i in range(A.n):
        for k in range(A.n):
            a, b = A.rows[i][k], B.rows[k][i]
            for m, v in a.items():
                w = b.coeff(-m)
                if w != 0:
                    acc = acc + v * w
    return acc


# -- companion matrices and gauge action --------------------------------------


def companion_of(L: QOp) -> LoopMat:
    n = check_monic(L)
    q = L.q
    rows = []
    for i in range(n - 1):
        rows.append([LaurentPoly.const(1) if j == i + 1 else LaurentPoly() for j in range(n)])
    rows.append([-L.coeff(j) for j in range(n)])
    return LoopMat.build(q, rows)


def operator_of_companion(C: LoopMat) -> QOp:
    n = C.n
    return QOp.monic(C.q, [-C[n - 1, j] for j in range(n)])


def is_yn(M: LoopMat) -> bool:
    n = M.n
    one = LaurentPoly.const(1)
    for i in range(n):
        for j in range(i + 1, n):
            expected = one if j == i + 1 else LaurentPoly()
            if M[i, j] != expected:
                return False
    return True


def unipotent_inverse(S: LoopMat) -> LoopMat:
    """Inverse of a unit lower-triangular matrix by forward substitution."""
    if not S.is_lower_triangular(unit=True):
        raise ValueError("gauge element must be unit lower triangular")
    n = S.n
    inv = [[LaurentPoly()] * n for _ in range(n)]
    for j in range(n):
        inv[j][j] = LaurentPoly.const(1)
        for i in range(j + 1, n):
            acc = LaurentPoly()
            for k in range(j, i):
                acc = acc + S[i, k] * inv[k][j]
            inv[i][j] = -acc
    return LoopMat.build(S.q, inv)


def gauge(S: LoopMat, M: LoopMat) -> LoopMat:
    """h(S) M S^{-1}."""
    return S.dilate(1) @ M @ unipotent_inverse(S)


def gauge_to_companion(M: LoopMat) -> tuple[LoopMat, LoopMat]:
    """The unique unit lower-triangular S with gauge(S, M) companion."""
    if not is_yn(M):
        raise ValueError("input is not of the superdiagonal-ones shape")
    q, n = M.q, M.n
    one = LoopMat.identity(q, n)
    srows = [one.rows[0]]
    for i in range(n - 1):
        row = _row_times(_dilate_row(srows[i], q), M)
        srows.append(row)
    S = LoopMat(q, tuple(srows))
    w = _row_times(_dilate_row(srows[n - 1], q), M)
    u = [LaurentPoly()] * n
    for k in range(n - 1, -1, -1):
        acc = -w[k]
        for j in range(k + 1, n):
            acc = acc - u[j] * S[j, k]
        u[k] = acc
    C = companion_of(QOp.monic(q, u))
    if gauge(S, M) != C:
        raise ArithmeticError("gauge fixing failed the substitution check")
    return S, C


def _dilate_row(row, q):
    return tuple(dilate(a, 1, q) for a in row)


def _row_times(row, M: LoopMat):
    n = M.n
    out = []
    for j in range(n):
        acc = LaurentPoly()
        for k in range(n):
            if row[k] and M[k, j]:
                acc = acc + row[k] * M[k, j]
        out.append(acc)
    return tuple(out)


# -- the Coxeter twist --------------------------------------------------------


def _slots(d: LoopMat) -> list[LaurentPoly]:
    n = d.n
    for i in range(n):
        for j in range(n):
            if i != j and d[i, j]:
                raise ValueError("theta acts on diagonal matrices only")
    return d.diag()


def theta_apply(d: LoopMat) -> LoopMat:
    """theta = R_s h: slot k at z^m goes to slot k+1 with factor q^m."""
    x = _slots(d)
    n = d.n
    return LoopMat.diagonal(d.q, [dilate(x[(k - 1) % n], 1, d.q) for k in range(n)])


def _trace_mean_removed(x: list[LaurentPoly], q):
    n = len(x)
    total = sum((a.coeff(0) for a in x), 0)
    mean = total / scalar(q, n)
    return [a - mean for a in x]


def _by_exponent(x: list[LaurentPoly]) -> dict[int, list]:
    n = len(x)
    exps = sorted({m for a in x for m in a.support()})
    return {m: [x[k].coeff(m) for k in range(n)] for m in exps}


def theta_resolvent(d: LoopMat) -> LoopMat:
    """(1 - theta)^{-1} P0' d, normalised to have no identity component at z^0."""
    q, n = d.q, d.n
    x = _trace_mean_removed(_slots(d), q)
    out = [dict() for _ in range(n)]
    for m, c in _by_exponent(x).items():
        if m == 0:
            # (1 - R_s) y = c with sum(y) = 0
            y = [0] * n
            for k in range(1, n):
                y[k] = y[k - 1] + c[k]
            shift = sum(y, 0) / scalar(q, n)
            y = [v - shift for v in y]
        else:
            qm = qpow(q, m)
            denom = 1 - qpow(q, m * n)
            y = [0] * n
            for k in range(n):
                # sum_j theta^j c, theta^j moves slot k-j to k with factor q^{mj}
                acc = 0
                for j in range(n):
                    acc = acc + qm**j * c[(k - j) % n]
                y[k] = acc / denom
        for k in range(n):
            out[k][m] = y[k]
    return LoopMat.diagonal(q, [LaurentPoly(o) for o in out])


def theta_cayley(d: LoopMat) -> LoopMat:
    """(1 + theta)(1 - theta)^{-1} P0' d."""
    y = theta_resolvent(d)
    return y + theta_apply(y)


def mean_free_diagonal(Z: LoopMat) -> LoopMat:
    """P0' Z: diagonal part minus (1/n) integral Tr times the identity."""
    q = Z.q
    return LoopMat.diagonal(q, _trace_mean_removed(Z.diag(), q))


def eigvec(m: int, alpha: int, n: int, q) -> LoopMat:
    """E_{m,alpha} = z^m diag(1, w^{-alpha}, ..., w^{-(n-1)alpha}), numeric."""
    w = mpmath.exp(2j * mpmath.pi / n)
    return LoopMat.diagonal(q, [LaurentPoly.monomial(m, w ** (-k * alpha)) for k in range(n)])


def orthogonality_residual(n: int, m: int, alpha: int, l: int, beta: int, q):
    """<E_{m,a}, E_{l,b}> minus n delta_{m,-l} [a = -b mod n]."""
    val = pairing(eigvec(m, alpha, n, q), eigvec(l, beta, n, q))
    expected = n if (m == -l and (alpha + beta) % n == 0) else 0
    return abs(val - expected)


def eigen_residual(n: int, m: int, alpha: int, q):
    """|theta E - q^m w^alpha E|."""
    E = eigvec(m, alpha, n, q)
    w = mpmath.exp(2j * mpmath.pi / n)
    return (theta_apply(E) - E.scale(qpow(q, m) * w**alpha)).max_abs()


def eigenvector_sums(n: int, m: int, q=None) -> list:
    """Residuals of the six root-of-unity sums, in their printed order.

    The m = 0 sums skip alpha = 0, where the summand has a pole.
    """
    if q is None:
        q = mpmath.mpf(1) / 2
    q = mpmath.mpmathify(q)
    w = mpmath.exp(2j * mpmath.pi / n)
    out = []
    if m != 0:
        qm, qmn = q**m, q ** (m * n)
        cay = [(1 + qm * w**a) / (1 - qm * w**a) for a in range(n)]
        out.append(sum(cay) / n - (1 + qmn) / (1 - qmn))
        out.append(sum(c * w**a for a, c in enumerate(cay)) / n - 2 * q ** (m * (n - 1)) / (1 - qmn))
        out.append(sum(c * w ** (-a) for a, c in enumerate(cay)) / n - 2 * qm / (1 - qmn))
    cay0 = {a: (1 + w**a) / (1 - w**a) for a in range(1, n)}
    out.append(sum(cay0.values(), mpmath.mpc(0)) / n)
    out.append(sum((c * w**a for a, c in cay0.items()), mpmath.mpc(0)) / n + mpmath.mpf(n - 2) / n)
    out.append(sum((c * w ** (-a) for a, c in cay0.items()), mpmath.mpc(0)) / n - mpmath.mpf(n - 2) / n)
    return out


# -- gradient lifting and the reduced bracket ----------------------------------


@dataclass(frozen=True)
class LiftedGradient:
    d: LoopMat
    nabla: LoopMat
    Z: LoopMat


def normalized_differential(dphi: QOp, n: int) -> QOp:
    """Representative of dphi with degrees in 1-n..0."""
    if dphi.floor > 1 - n:
        raise ValueError("differential not trusted down to degree 1-n")
    out = dphi.restrict(1 - n, 0).with_floor(float("-inf"))
    return out


def lift_gradient(dphi: QOp, L: QOp) -> LiftedGradient:
    """Lift a scalar differential to the invariant matrix gradient at companion_of(L)."""
    n = check_monic(L)
    q = L.q
    d = normalized_differential(dphi, n)
    nab = mul(L, d)
    tails = [proj(mul(L, QOp.D(q, -(m + 1))), "(+)") for m in range(n)]
    dhat = [[-res(mul(mul(QOp.D(q, p), d), tails[m])) for m in range(n)] for p in range(n)]
    nhat = []
    for p in range(n):
        row = []
        for m in range(n):
            if p == n - 1:
                row.append(res(mul(nab, tails[m])))
            else:
                row.append(-res(mul(mul(QOp.D(q, p + 1), d), tails[m])))
        nhat.append(row)
    Z = [[LaurentPoly()] * n for _ in range(n)]
    nab_prime = mul(d, L)
    for m in range(n):
        Z[n - 1][m] = dilate(res(mul(nab, tails[m])), -1, q)
    Z[n - 1][0] = Z[n - 1][0] - res(mul(QOp.D(q, n - 1), d)) * L.coeff(0)
    # subdiagonal-column slots: the defining expression h^{-1}(C dhat) - dhat C
    # puts -(D^{p-1} grad' phi)_0 at (p-1, 0)
    for p in range(1, n):
        Z[p - 1][0] = Z[p - 1][0] - res(mul(QOp.D(q, p - 1), nab_prime))
    return LiftedGradient(LoopMat.build(q, dhat), LoopMat.build(q, nhat), LoopMat.build(q, Z))


def z_from_definition(g: LiftedGradient, C: LoopMat) -> LoopMat:
    """h^{-1}(C dhat) - dhat C, the defining expression for Z."""
    return (C @ g.d).dilate(-1) - g.d @ C


def reduced_bracket(dphi: QOp, dpsi: QOp, L: QOp):
    """The reduced matrix bracket evaluated from lifted gradients."""
    gphi, gpsi = lift_gradient(dphi, L), lift_gradient(dpsi, L)
    z1, z2 = mean_free_diagonal(gphi.Z), mean_free_diagonal(gpsi.Z)
    half = scalar(L.q, Fraction(1, 2))
    val = pairing(theta_cayley(z1), z2) + pairing(gphi.Z.dilate(1), gpsi.nabla) - pairing(gphi.nabla, gpsi.Z.dilate(1))
    return half * val


def random_gauge(rng, q, n: int, poly) -> LoopMat:
    rows = []
    for i in range(n):
        rows.append([poly() if j < i else (LaurentPoly.const(1) if j == i else LaurentPoly()) for j in range(n)])
    return LoopMat.build(q, rows)


def random_yn(rng, q, n: int, poly) -> LoopMat:
    rows = []
    for i in range(n):
        rows.append([poly() if j <= i else (LaurentPoly.const(1) if j == i + 1 else LaurentPoly()) for j in range(n)])
    return LoopMat.build(q, rows)

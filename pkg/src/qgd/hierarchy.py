"""Lax flows of the q-KdV hierarchy, their Hamiltonians and jet-based checks."""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .coeffs import is_exact
from .frac import check_monic, frac_power
from .psid import QOp, WindowError, commutator, jet_lift, jet_part, jet_split, proj, trace

__all__ = [
    "lax_rhs",
    "hamiltonian",
    "conservation_residual",
    "flow_commutator_residual",
    "fractional_power_flow",
    "tangent_part",
]


def _need_depth(m: int, K: int):
    # L^{m/n} is trusted down to degree m - K; degree 0 must be inside
    if m - K > 0:
        raise WindowError("insufficient depth")


def _ratio(a, b, q):
    if is_exact(q):
        return Fraction(a, b)
    return mpmath.mpf(a) / b


def lax_rhs(L: QOp, m: int, n: int, K: int) -> QOp:
    """[L^{m/n}_(+), L], a tangent vector to M_n."""
    if check_monic(L) != n:
        raise ValueError("operator order does not match n")
    _need_depth(m, K)
    A = proj(frac_power(L, m, n, K), "(+)")
    V = commutator(A, L)
    if V.degrees() and V.hi > n - 1:
        raise AssertionError("Lax vector field leaves M_n")
    return V


def hamiltonian(L: QOp, m: int, n: int, K: int):
    """H_m = (n/m) Tr L^{m/n}."""
    _need_depth(m, K)
    return _ratio(n, m, L.q) * trace(frac_power(L, m, n, K))


def conservation_residual(L: QOp, m: int, r: int, n: int, K: int):
    """Directional derivative of H_r along the m-th flow."""
    V = lax_rhs(L, m, n, K)
    return jet_part(hamiltonian(jet_lift(L, V), r, n, K))


def directional(fn, L: QOp, V: QOp) -> QOp:
    """Jet derivative of the operator-valued map ``fn`` at L along V."""
    return jet_split(fn(jet_lift(L, V)))[1]


def flow_commutator_residual(L: QOp, m1: int, m2: int, n: int, K: int) -> QOp:
    """D_{V1} V2 - D_{V2} V1 for the flows V_i = lax_rhs(., m_i)."""
    V1 = lax_rhs(L, m1, n, K)
    V2 = lax_rhs(L, m2, n, K)
    d12 = directional(lambda X: lax_rhs(X, m2, n, K), L, V1)
    d21 = directional(lambda X: lax_rhs(X, m1, n, K), L, V2)
    return d12 - d21


def fractional_power_flow(L: QOp, m: int, r: int, n: int, K: int) -> tuple[QOp, QOp]:
    """Both sides of d/dt L^{r/n} = [L^{m/n}_(+), L^{r/n}] along the m-th flow."""
    V = lax_rhs(L, m, n, K)
    lhs = directional(lambda X: frac_power(X, r, n, K), L, V)
    A = proj(frac_power(L, m, n, K), "(+)")
    rhs = commutator(A, frac_power(L, r, n, K))
    return lhs, rhs


def tangent_part(V: QOp, n: int) -> QOp:
    """Restriction of an operator to the tangent degrees 0..n-1."""
    return V.restrict(0, n - 1).with_floor(float("-inf"))

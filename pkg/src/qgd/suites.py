"""Verification suites: deterministic random instances, checks and reports."""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Callable

import mpmath

from . import cdeg
from .coeffs import Context, LaurentPoly, format_scalar, is_exact, scalar
from .dsred import (
    LoopMat,
    companion_of,
    eigen_residual,
    eigenvector_sums,
    gauge,
    gauge_to_companion,
    is_yn,
    lift_gradient,
    orthogonality_residual,
    random_gauge,
    random_yn,
    reduced_bracket,
    z_from_definition,
)
from .frac import _random_poly, frac_power, nth_root, random_monic
from .gdbracket import (
    BracketSpec,
    DoubledVector,
    TraceHamiltonian,
    bracket,
    canonical_r,
    casimir_functional,
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
from .hierarchy import (
    conservation_residual,
    flow_commutator_residual,
    fractional_power_flow,
    lax_rhs,
)
from .psid import COMPLETE, QOp, commutator, inner, mul, proj, reconstruct_from_slices, to_numeric, trace

__all__ = [
    "SCHEMA",
    "SUITES",
    "Controls",
    "CheckResult",
    "SuiteReport",
    "check_seed",
    "random_instance",
    "random_qop",
    "run_suite",
]

SCHEMA = "qgd-report-v1"
SUITES = ("algebra", "roots", "hierarchy", "bracket", "jacobi", "dsred", "cdeg")

# criterion number of every suite (the bracket suite carries two)
CRITERIA = {"algebra": 1, "roots": 2, "hierarchy": 3, "jacobi": 6, "dsred": 7, "cdeg": 8}


@dataclass(frozen=True)
class Controls:
    """Deliberate defects used to show the checks are not vacuous.

    ``half`` replaces the 1/2 in front of the diagonal Cayley term of the
    quadratic r-matrix; ``perturb_root`` shifts one coefficient of every
    computed n-th root.
    """

    half: object = None
    perturb_root: bool = False

    def is_default(self) -> bool:
        return self.half is None and not self.perturb_root


@dataclass
class CheckResult:
    name: str
    criterion: int
    passed: bool
    residual: str
    tolerance: str
    parameters: dict
    window: str | None = None
    witness: object = None

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "criterion": self.criterion,
            "status": "pass" if self.passed else "fail",
            "residual": self.residual,
            "tolerance": self.tolerance,
            "parameters": self.parameters,
            "trusted_window": self.window,
        }
        if not self.passed:
            out["witness"] = self.witness
        return out


@dataclass
class SuiteReport:
    suite: str
    seed: int
    config: dict
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self, criterion: int | None = None) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed and (criterion is None or c.criterion == criterion)]

    def by_criterion(self) -> dict[int, bool]:
        out: dict[int, bool] = {}
        for c in self.checks:
            out[c.criterion] = out.get(c.criterion, True) and c.passed
        return out

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "suite": self.suite,
            "seed": self.seed,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.to_json() for c in sorted(self.checks, key=lambda c: c.name)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# -- randomness -------------------------------------------------------------------


def check_seed(suite: str, check: str, seed: int) -> int:
    digest = hashlib.sha256(f"{suite}/{check}/{seed}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def random_qop(rng, q, lo: int = -2, hi: int = 2, floor=COMPLETE, exps=range(-3, 4), bound: int = 9) -> QOp:
    c = {}
    for i in range(lo, hi + 1):
        p = _random_poly(rng, q, exps, 2, bound)
        if p:
            c[i] = p
    return QOp(q, c, floor)


def random_instance(kind: str, ctx: Context, rng=None, n: int = 2):
    """Random M_n, QOp, Yn, LoopMat or CSymbol with the standard coefficient ranges."""
    rng = rng or random.Random(check_seed("instance", kind, ctx.seed))
    q = ctx.q
    poly = lambda: _random_poly(rng, q, range(-3, 4), 2, 9)
    if kind == "M_n":
        return random_monic(rng, q, n)
    if kind == "QOp":
        return random_qop(rng, q)
    if kind == "Yn":
        return random_yn(rng, q, n, poly)
    if kind == "LoopMat":
        return LoopMat.build(q, [[poly() for _ in range(n)] for _ in range(n)])
    if kind == "CSymbol":
        with mpmath.workdps(ctx.digits):
            return cdeg.random_csymbol(rng, ctx.numeric_q(), mpmath.mpf("0.7"), ctx.depth)
    raise ValueError(f"unknown instance kind {kind!r}")


# -- check plumbing ---------------------------------------------------------------------


@dataclass
class Tally:
    """Worst residual over the instances of one check."""

    tol: object = 0
    worst: object = 0
    witness: object = None
    window: str | None = None
    failures: int = 0

    def add(self, residual, witness=None, window=None):
        r = abs(residual)
        bad = r > self.tol
        if bad:
            self.failures += 1
        if r > self.worst or (bad and self.witness is None):
            self.worst = r
            if bad or self.witness is None:
                self.witness = witness() if callable(witness) else witness
            self.window = window

    def expect(self, ok: bool, witness=None):
        self.add(0 if ok else 1, witness)


def _fmt(x) -> str:
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return mpmath.nstr(mpmath.mpf(x), 6)


def _qop_witness(*ops):
    return [A.to_json() for A in ops]


CHECKS: dict[str, list[tuple[str, int, Callable]]] = {s: [] for s in SUITES}


def check(suite: str, name: str, criterion: int | None = None):
    def deco(fn):
        CHECKS[suite].append((name, criterion or CRITERIA[suite], fn))
        return fn

    return deco


def _run_one(args) -> CheckResult:
    suite, name, criterion, ctx, controls = args
    fn = next(f for n, c, f in CHECKS[suite] if n == name)
    rng = random.Random(check_seed(suite, name, ctx.seed))
    params, tally = fn(rng, ctx, controls)
    return CheckResult(
        name=f"{suite}.{name}",
        criterion=criterion,
        passed=tally.failures == 0,
        residual=_fmt(tally.worst),
        tolerance=_fmt(tally.tol),
        parameters=params,
        window=tally.window,
        witness=tally.witness,
    )


def run_suite(name: str, ctx: Context | None = None, controls: Controls | None = None, jobs: int = 1) -> SuiteReport:
    """Run one suite (or ``all``) and collect a deterministic report."""
    ctx = ctx or Context()
    controls = controls or Controls()
    if name == "all":
        names = SUITES
    elif name in SUITES:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}")
    tasks = [(s, n, c, ctx, controls) for s in names for n, c, _ in CHECKS[s]]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    config = {
        "q": str(ctx.q),
        "n": list(ctx.ns),
        "depth": ctx.depth,
        "digits": ctx.digits,
    }
    if not controls.is_default():
        config["controls"] = {"half": None if controls.half is None else str(controls.half), "perturb_root": controls.perturb_root}
    return SuiteReport(name, ctx.seed, config, sorted(results, key=lambda c: c.name))


# -- algebra -------------------------------------------------------------------------------

N_ALGEBRA = 20


@check("algebra", "associativity")
def _assoc(rng, ctx, controls):
    t = Tally()
    for _ in range(N_ALGEBRA):
        A, B, C = (random_qop(rng, ctx.q, floor=rng.choice([COMPLETE, -2, -3])) for _ in range(3))
        lhs, rhs = mul(mul(A, B), C), mul(A, mul(B, C))
        t.add(lhs.distance(rhs), lambda: _qop_witness(A, B, C), str(max(lhs.floor, rhs.floor)))
    return {"instances": N_ALGEBRA}, t


@check("algebra", "trace_cyclicity")
def _trace(rng, ctx, controls):
    t = Tally()
    for _ in range(N_ALGEBRA):
        A, B, C = (random_qop(rng, ctx.q) for _ in range(3))
        t.add(trace(mul(A, B)) - trace(mul(B, A)), lambda: _qop_witness(A, B))
        t.add(inner(mul(A, B), C) - inner(A, mul(B, C)), lambda: _qop_witness(A, B, C))
    return {"instances": N_ALGEBRA}, t


@check("algebra", "isotropy")
def _isotropy(rng, ctx, controls):
    t = Tally()
    for _ in range(N_ALGEBRA):
        A, B = random_qop(rng, ctx.q), random_qop(rng, ctx.q)
        for part in ("+", "-"):
            t.add(inner(proj(A, part), proj(B, part)), lambda: _qop_witness(A, B))
    return {"instances": N_ALGEBRA}, t


@check("algebra", "slice_reconstruction")
def _slices(rng, ctx, controls):
    t = Tally()
    for _ in range(N_ALGEBRA):
        B = random_qop(rng, ctx.q, -3, 3)
        t.add(reconstruct_from_slices(B).distance(B), lambda: _qop_witness(B))
    return {"instances": N_ALGEBRA}, t


# -- roots ------------------------------------------------------------------------------------

N_ROOTS = 20
ROOT_ORDERS = (2, 3, 4)


def _root(L, n, K, controls):
    P = nth_root(L, n, K)
    if controls.perturb_root:
        P = P + QOp(P.q, {-1: LaurentPoly.const(scalar(P.q, Fraction(1, 7)))})
    return P


@check("roots", "root_power")
def _root_power(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ROOT_ORDERS:
        for _ in range(N_ROOTS):
            L = random_monic(rng, ctx.q, n)
            P = _root(L, n, K, controls)
            Pn = P**n
            t.add(Pn.distance(L), lambda: _qop_witness(L), str(Pn.floor))
    return {"n": list(ROOT_ORDERS), "instances": N_ROOTS, "depth": K}, t


@check("roots", "power_additivity")
def _additivity(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    pairs = ((1, 1), (1, 2), (2, 3), (-1, 2), (-1, 1))
    for n in ROOT_ORDERS:
        for _ in range(N_ROOTS // 4):
            L = random_monic(rng, ctx.q, n)
            for a, b in pairs:
                lhs = mul(frac_power(L, a, n, K), frac_power(L, b, n, K))
                rhs = frac_power(L, a + b, n, K)
                t.add(lhs.distance(rhs), lambda: _qop_witness(L) + [a, b], str(max(lhs.floor, rhs.floor)))
    return {"n": list(ROOT_ORDERS), "pairs": [list(p) for p in pairs], "depth": K}, t


@check("roots", "power_commutation")
def _commute(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ROOT_ORDERS:
        for _ in range(N_ROOTS // 4):
            L = random_monic(rng, ctx.q, n)
            for a, b in ((1, 2), (1, 3), (-1, 2)):
                C = commutator(frac_power(L, a, n, K), frac_power(L, b, n, K))
                t.add(C.max_abs(), lambda: _qop_witness(L) + [a, b], str(C.floor))
    return {"n": list(ROOT_ORDERS), "depth": K}, t


# -- hierarchy ----------------------------------------------------------------------------------


@check("hierarchy", "lax_degree")
def _lax_degree(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ctx.ns:
        for _ in range(3):
            L = random_monic(rng, ctx.q, n)
            for m in range(1, 8):
                V = lax_rhs(L, m, n, K)
                t.expect(not V.degrees() or V.hi <= n - 1, lambda: _qop_witness(L) + [m])
    return {"n": list(ctx.ns), "m": "1..7"}, t


@check("hierarchy", "conservation")
def _conservation(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ctx.ns:
        L = random_monic(rng, ctx.q, n)
        for m, r in product(range(1, 8), repeat=2):
            t.add(conservation_residual(L, m, r, n, K), lambda: _qop_witness(L) + [m, r])
    return {"n": list(ctx.ns), "m": "1..7", "r": "1..7"}, t


@check("hierarchy", "flow_commutation")
def _flows(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    pairs = ((1, 3), (1, 2), (3, 5))
    for n in ctx.ns:
        L = random_monic(rng, ctx.q, n)
        for m1, m2 in pairs:
            R = flow_commutator_residual(L, m1, m2, n, K)
            t.add(R.max_abs(), lambda: _qop_witness(L) + [m1, m2], str(R.floor))
    return {"n": list(ctx.ns), "pairs": [list(p) for p in pairs]}, t


@check("hierarchy", "fractional_power_flow")
def _frac_flow(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ctx.ns:
        L = random_monic(rng, ctx.q, n)
        for m, r in ((1, 1), (2, 1), (1, 3), (3, 2)):
            lhs, rhs = fractional_power_flow(L, m, r, n, K)
            t.add(lhs.distance(rhs), lambda: _qop_witness(L) + [m, r], str(max(lhs.floor, rhs.floor)))
    return {"n": list(ctx.ns)}, t


# -- brackets -----------------------------------------------------------------------------------

N_BRACKET_L = 10


def _quadratic_spec(n, controls):
    return BracketSpec("quadratic", n, half=controls.half)


@check("bracket", "quadratic_vs_alternative", 4)
def _vs_alt(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        fs = elementary_functionals(n, 3)
        A, B = _quadratic_spec(n, controls), BracketSpec("quadratic_alt", n)
        for _ in range(N_BRACKET_L):
            L = random_monic(rng, ctx.q, n)
            for a, b in product(fs, fs):
                t.add(bracket(A, a, b, L) - bracket(B, a, b, L), lambda: _qop_witness(L) + [[a.i, a.j], [b.i, b.j]])
    return {"n": list(ctx.ns), "instances": N_BRACKET_L, "amax": 3}, t


@check("bracket", "quadratic_vs_coordinate", 4)
def _vs_coord(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        fs = elementary_functionals(n, 3)
        A, B = _quadratic_spec(n, controls), BracketSpec("coordinate", n)
        for _ in range(N_BRACKET_L):
            L = random_monic(rng, ctx.q, n)
            for a, b in product(fs, fs):
                t.add(bracket(A, a, b, L) - bracket(B, a, b, L), lambda: _qop_witness(L) + [[a.i, a.j], [b.i, b.j]])
    return {"n": list(ctx.ns), "instances": N_BRACKET_L, "amax": 3}, t


@check("bracket", "reference_value", 4)
def _reference(rng, ctx, controls):
    q = Fraction(1, 2)
    L = QOp.monic(q, [LaurentPoly({1: Fraction(1)}), LaurentPoly()])
    t = Tally()
    for spec in (BracketSpec("quadratic", 2, half=controls.half), BracketSpec("coordinate", 2)):
        t.add(bracket(spec, zeta(1, 0), zeta(1, 1), L) + Fraction(1, 2), [spec.kind])
    return {"q": "1/2", "n": 2, "L": "D^2 + z"}, t


@check("bracket", "zeta0_central", 4)
def _zeta0(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        fs = elementary_functionals(n, 3)
        for _ in range(3):
            L = random_monic(rng, ctx.q, n)
            for spec in (_quadratic_spec(n, controls), BracketSpec("coordinate", n)):
                for a in fs:
                    for b in range(-3, 4):
                        t.add(bracket(spec, a, zeta(0, b), L), lambda: _qop_witness(L) + [spec.kind, a.i, a.j, b])
    return {"n": list(ctx.ns)}, t


@check("bracket", "hamiltonian_fields", 5)
def _ham_fields(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ctx.ns:
        spec = _quadratic_spec(n, controls)
        for _ in range(N_BRACKET_L):
            L = random_monic(rng, ctx.q, n)
            for m in range(1, 5):
                V = vector_field(spec, TraceHamiltonian(m, n, K), L)
                W = lax_rhs(L, m, n, K)
                t.add(V.distance(W), lambda: _qop_witness(L) + [m], str(max(V.floor, W.floor)))
    return {"n": list(ctx.ns), "m": "1..4", "instances": N_BRACKET_L}, t


@check("bracket", "casimirs", 5)
def _casimirs(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        spec = _quadratic_spec(n, controls)
        fs = elementary_functionals(n, 2, include_top=False)
        for _ in range(N_BRACKET_L):
            L = random_monic(rng, ctx.q, n)
            f = _random_poly(rng, ctx.q, range(-3, 4), 2, 9) + LaurentPoly.const(Fraction(1))
            for b in fs:
                t.add(bracket(spec, casimir_functional(f, n, ctx.q), b, L), lambda: _qop_witness(L) + [f.to_json(), b.i, b.j])
    return {"n": list(ctx.ns), "instances": N_BRACKET_L}, t


@check("bracket", "bihamiltonian", 5)
def _biham(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ctx.ns:
        quad, lin = _quadratic_spec(n, controls), BracketSpec("linear", n)
        for _ in range(3):
            L = random_monic(rng, ctx.q, n)
            for m in (1, 2, 3):
                a = vector_field(quad, TraceHamiltonian(m, n, K), L)
                b = vector_field(lin, TraceHamiltonian(m + n, n, K + n), L)
                t.add(a.distance(b), lambda: _qop_witness(L) + [m], str(max(a.floor, b.floor)))
    return {"n": list(ctx.ns), "m": [1, 2, 3]}, t


@check("bracket", "linear_casimirs", 5)
def _lin_casimirs(rng, ctx, controls):
    t = Tally()
    K = ctx.depth
    for n in ctx.ns:
        lin = BracketSpec("linear", n)
        for _ in range(3):
            L = random_monic(rng, ctx.q, n)
            for m in range(1, n + 1):
                V = vector_field(lin, TraceHamiltonian(m, n, K), L)
                t.add(V.restrict(0, n - 1).max_abs(), lambda: _qop_witness(L) + [m])
    return {"n": list(ctx.ns)}, t


# -- Jacobi identity and the r-matrix -------------------------------------------------------------


def _random_doubled(rng, q):
    return DoubledVector(random_qop(rng, q, bound=5), random_qop(rng, q, bound=5))


def _triple(rng, n):
    return [zeta(rng.randrange(n), rng.randint(-2, 2)) for _ in range(3)]


@check("jacobi", "mcybe_canonical")
def _mcybe_canon(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        R = canonical_r(ctx.q, n, controls.half)
        for _ in range(3):
            X, Y = _random_doubled(rng, ctx.q), _random_doubled(rng, ctx.q)
            t.add(mcybe_residual(R, X, Y).max_abs(), [n])
            t.add(skew_residual(R, X, Y), [n])
    return {"n": list(ctx.ns)}, t


@check("jacobi", "mcybe_random_family")
def _mcybe_random(rng, ctx, controls):
    t = Tally()
    for _ in range(5):
        R = random_block_r(rng, ctx.q)
        X, Y = _random_doubled(rng, ctx.q), _random_doubled(rng, ctx.q)
        t.add(mcybe_residual(R, X, Y).max_abs())
        t.add(skew_residual(R, X, Y))
    return {"draws": 5}, t


@check("jacobi", "cyclic_identity")
def _cyclic_identity(rng, ctx, controls):
    t = Tally()
    Rs = [canonical_r(ctx.q, n, controls.half) for n in ctx.ns] + [random_block_r(rng, ctx.q) for _ in range(2)]
    for R in Rs:
        X, Y, Z = (_random_doubled(rng, ctx.q) for _ in range(3))
        lhs, rhs = r_cyclic_sides(R, X, Y, Z)
        t.add(lhs - rhs)
    return {"r_matrices": len(Rs)}, t


@check("jacobi", "schouten")
def _schouten(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        R = canonical_r(ctx.q, n, controls.half)
        for _ in range(10):
            L = random_monic(rng, ctx.q, n)
            tr = _triple(rng, n)
            t.add(schouten_delta(R, *tr, L), lambda: _qop_witness(L) + [[z.i, z.j] for z in tr])
    return {"n": list(ctx.ns), "triples": 10}, t


def _jacobi_specs(n, controls):
    return [
        BracketSpec("quadratic", n, half=controls.half),
        BracketSpec("linear", n),
        *(BracketSpec("pencil", n, alpha=Fraction(a), half=controls.half) for a in (1, -1, 2)),
    ]


@check("jacobi", "jacobi_identity")
def _jacobi(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        for _ in range(10):
            L = random_monic(rng, ctx.q, n)
            tr = _triple(rng, n)
            for spec in _jacobi_specs(n, controls):
                t.add(jacobi_residual(spec, *tr, L), lambda: _qop_witness(L) + [spec.kind, str(spec.alpha)] + [[z.i, z.j] for z in tr])
    return {"n": list(ctx.ns), "triples": 10, "pencil_alpha": [1, -1, 2]}, t


@check("jacobi", "poisson_submanifold")
def _tangency(rng, ctx, controls):
    t = Tally()
    for n in ctx.ns:
        for _ in range(10):
            L = random_monic(rng, ctx.q, n)
            phi = zeta(rng.randrange(n), rng.randint(-2, 2))
            for spec in _jacobi_specs(n, controls):
                t.add(tangency_defect(spec, phi, L).max_abs(), lambda: _qop_witness(L) + [spec.kind, phi.i, phi.j])
    return {"n": list(ctx.ns), "instances": 10}, t


# -- Drinfeld-Sokolov reduction ---------------------------------------------------------------------


def _poly_source(rng, q):
    return lambda: _random_poly(rng, q, range(-3, 4), 2, 9)


@check("dsred", "gauge_fixing")
def _gauge(rng, ctx, controls):
    t = Tally()
    poly = _poly_source(rng, ctx.q)
    for n in ctx.ns:
        for _ in range(10):
            M = random_yn(rng, ctx.q, n, poly)
            S, C = gauge_to_companion(M)
            t.expect(gauge(S, M) == C and is_yn(C), lambda: M.to_json())
            T = random_gauge(rng, ctx.q, n, poly)
            t.expect(gauge_to_companion(gauge(T, M))[1] == C, lambda: [M.to_json(), T.to_json()])
    return {"n": list(ctx.ns), "instances": 10}, t


@check("dsred", "reduced_vs_quadratic")
def _reduced(rng, ctx, controls):
    t = Tally()
    q = ctx.q
    for n in ctx.ns:
        fs = elementary_functionals(n, 2)
        spec = BracketSpec("quadratic", n)
        for _ in range(5):
            L = random_monic(rng, q, n)
            C = companion_of(L)
            lifts = {}
            for a in fs:
                g = lift_gradient(a.differential(q), L)
                t.expect(z_from_definition(g, C) == g.Z, lambda: _qop_witness(L) + [a.i, a.j])
                lifts[a] = a.differential(q)
            for a, b in product(fs, fs):
                t.add(reduced_bracket(lifts[a], lifts[b], L) - bracket(spec, a, b, L), lambda: _qop_witness(L) + [[a.i, a.j], [b.i, b.j]])
    return {"n": list(ctx.ns), "instances": 5, "amax": 2}, t


@check("dsred", "eigenvectors")
def _eigen(rng, ctx, controls):
    t = Tally(tol=mpmath.mpf(10) ** -12)
    with mpmath.workdps(20):
        q = mpmath.mpf(ctx.q.numerator) / ctx.q.denominator if is_exact(ctx.q) else mpmath.mpmathify(ctx.q)
        for n in range(1, 7):
            for m in range(-5, 6):
                for a in range(n):
                    t.add(eigen_residual(n, m, a, q), [n, m, a])
                    for l in (-m, m + 1):
                        for b in range(n):
                            t.add(orthogonality_residual(n, m, a, l, b, q), [n, m, a, l, b])
                if n >= 2:
                    for r in eigenvector_sums(n, m, q):
                        t.add(r, [n, m])
    return {"n": "1..6", "m": "-5..5", "digits": 20}, t


# -- complex degree ------------------------------------------------------------------------------------

ALPHA = "0.7"


def _numeric(ctx):
    return ctx.numeric_q(), mpmath.mpf(ALPHA), ctx.depth


def _ptol(ctx, e):
    return mpmath.mpf(10) ** (e - ctx.digits)


def _rel(a: QOp, b: QOp):
    return a.distance(b) / max(1, b.max_abs())


def _random_exponent(rng, q, K):
    c = {}
    for i in range(1, K + 1):
        c[-i] = LaurentPoly({rng.randint(-2, 2): mpmath.mpf(rng.randint(-5, 5)) / rng.randint(1, 7)})
    return QOp(q, c, -K)


def cdeg_check(name):
    """cdeg checks run at the configured working precision."""

    def deco(fn):
        def wrapped(rng, ctx, controls):
            with mpmath.workdps(ctx.digits):
                return fn(rng, ctx, controls)

        wrapped.__name__ = fn.__name__
        return check("cdeg", name)(wrapped)

    return deco


@cdeg_check("log_exp_roundtrip")
def _roundtrip(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 10))
    for _ in range(3):
        X = _random_exponent(rng, q, K)
        t.add(_rel(cdeg.log_map(cdeg.exp_map(X, a, K)), X))
        L = cdeg.random_csymbol(rng, q, a, K)
        t.add(_rel(cdeg.exp_map(cdeg.log_map(L), a, K).body, L.body), lambda: L.to_json())
    return {"alpha": ALPHA, "depth": K}, t


@cdeg_check("group_law")
def _group_law(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 5))
    X = _random_exponent(rng, q, K)
    for s, u in (("0.3", "0.45"), ("-0.2", "1.1")):
        s, u = mpmath.mpf(s), mpmath.mpf(u)
        lhs = cdeg.exp_map(X, s + u, K)
        rhs = cdeg.mul_c(cdeg.exp_map(X, s, K), cdeg.exp_map(X, u, K))
        t.add(_rel(lhs.body, rhs.body))
        t.add(lhs.alpha - rhs.alpha)
    return {"depth": K}, t


@cdeg_check("first_level_closed_form")
def _first_level(rng, ctx, controls):
    # exact comparison with symbolic lambda and rational q
    t = Tally()
    qe, lam = Fraction(1, 2), Fraction(3, 7)
    X = QOp(qe, {-1: LaurentPoly({m: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for m in (-2, 0, 1, 3)})}, -1)
    A = cdeg.exp_coefficients(X, 1, lam)
    for m, x in X.coeff(-1).items():
        if m == 0:
            expected = cdeg.ExpPoly(lam, {(1, 0): x})
        else:
            expected = cdeg.ExpPoly(lam, {(0, m): x / (m * lam), (0, 0): -x / (m * lam)})
        t.expect(A[1].get(m) == expected, [m, str(x)])
    # and the instantiated value at alpha
    q, a, K = _numeric(ctx)
    t2 = Tally(tol=_ptol(ctx, 5))
    Xn = _random_exponent(rng, q, 1)
    u = cdeg.exp_map(Xn, a, 1).coeff(1)
    lq = mpmath.log(q)
    for m, x in Xn.coeff(-1).items():
        g = a if m == 0 else (mpmath.exp(a * m * lq) - 1) / (m * lq)
        t2.add(u.coeff(m) - g * x)
    t.failures += t2.failures
    return {"lambda": "3/7"}, t


@cdeg_check("antiderivative")
def _antider(rng, ctx, controls):
    t = Tally()
    lam = Fraction(2, 5)
    for _ in range(10):
        terms = {(rng.randint(0, 4), rng.randint(-3, 3)): Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(4)}
        f = cdeg.ExpPoly(lam, terms)
        F = f.antiderivative()
        t.expect(F.derivative() == f and F.evaluate(0) == 0, [str(terms)])
    return {"instances": 10}, t


@cdeg_check("cocycle")
def _cocycle(rng, ctx, controls):
    t = Tally()
    q = Fraction(1, 2)
    X = QOp(q, {-1: LaurentPoly({1: Fraction(1)})})
    Y = QOp(q, {1: LaurentPoly({-1: Fraction(1)})})
    t.add(cdeg.cocycle(X, Y) - q)
    for _ in range(5):
        A, B, C = (random_qop(rng, q) for _ in range(3))
        t.add(cdeg.cocycle(A, A))
        t.add(cdeg.cocycle(A, B) + cdeg.cocycle(B, A))
        cyc = cdeg.cocycle(commutator(A, B), C) + cdeg.cocycle(commutator(C, A), B) + cdeg.cocycle(commutator(B, C), A)
        t.add(cyc, lambda: _qop_witness(A, B, C))
    return {"lambda": 1, "q": "1/2"}, t


@cdeg_check("tangent_maps")
def _tangent(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=mpmath.mpf(10) ** (-(ctx.digits // 4)))
    h = mpmath.mpf(10) ** (-(ctx.digits // 2))
    for _ in range(2):
        L = cdeg.random_csymbol(rng, q, a, K)
        Xb = QOp(q, {-i: LaurentPoly({rng.randint(-2, 2): mpmath.mpf(rng.randint(1, 5)) / 3}) for i in (1, 2)})
        Xt = mpmath.mpf(rng.randint(1, 9)) / 10
        rb, rd, lb, ld = cdeg.tangent_quotients(L, Xb, Xt, h)
        t.add(_rel(rb, cdeg.right_tangent(L, Xb, Xt)))
        t.add(_rel(lb, cdeg.left_tangent(L, Xb)))
        t.add((rd - Xt) / Xt)
        t.add((ld - Xt) / Xt)
    return {"step": f"1e-{ctx.digits // 2}"}, t


@cdeg_check("non_generic_guard")
def _guard(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally()
    L = cdeg.random_csymbol(rng, q, mpmath.mpf(0), K)
    try:
        cdeg.log_map(L)
        t.expect(False, "alpha = 0 accepted")
    except cdeg.NonGenericDegree:
        t.expect(True)
    t.expect(cdeg.is_generic(a, q))
    t.expect(not cdeg.is_generic(2j * mpmath.pi / mpmath.log(q) / 3, q))
    return {}, t


@cdeg_check("lax_consistency")
def _lax_c(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 10))
    for _ in range(2):
        L = cdeg.random_csymbol(rng, q, a, K)
        for m in (1, 2, 3):
            V = cdeg.lax_rhs_c(L, m)
            W = cdeg.vector_field_c(cdeg.grad_hamiltonian_c(L, m), L)
            t.add(_rel(W, V), lambda: L.to_json())
            t.add(V.coeff(0).max_abs() / max(1, V.max_abs()))
    return {"alpha": ALPHA, "m": [1, 2, 3], "scale": "relative to max |coefficient|"}, t


@cdeg_check("gradient_of_hamiltonian")
def _dbar(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 10))
    L = cdeg.random_csymbol(rng, q, a, K)
    for m in (1, 2):
        g = cdeg.gradients_c(cdeg.dbar_hamiltonian(L, m), L)
        M = cdeg._integer_power(L, m)
        t.add(_rel(g.nabla, M))
        t.add(_rel(g.nabla_prime, M))
    return {"m": [1, 2]}, t


@cdeg_check("involution")
def _involution(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 10))
    L = cdeg.random_csymbol(rng, q, a, K)
    grads = {m: cdeg.grad_hamiltonian_c(L, m) for m in range(1, 5)}
    for m in range(1, 5):
        for k in range(1, 5):
            t.add(cdeg.bracket_c(grads[m], grads[k], L), lambda: L.to_json())
            t.add(cdeg.p00_contribution(grads[m], grads[k], L))
    return {"m": "1..4"}, t


@cdeg_check("conservation")
def _cons_c(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 15))
    L = cdeg.random_csymbol(rng, q, a, K)
    for m, r in ((1, 2), (2, 3)):
        V = cdeg.lax_rhs_c(L, m)
        t.add(cdeg.directional_c(lambda S: cdeg.hamiltonian_c(S, r), L, V))
    return {"pairs": [[1, 2], [2, 3]]}, t


@cdeg_check("flow_commutation")
def _flows_c(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 8))
    L = cdeg.random_csymbol(rng, q, a, K)
    t.add(cdeg.flow_commutator_c(L, 1, 2).max_abs())
    return {"pair": [1, 2]}, t


def _small_poly(rng):
    return LaurentPoly({rng.randint(-2, 2): mpmath.mpf(rng.randint(-5, 5)) / rng.randint(1, 5) for _ in range(2)})


@cdeg_check("poisson_submanifolds")
def _submanifolds(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 10))
    for n in (1, 2, 3):
        L = cdeg.random_csymbol(rng, q, a, n, complete=True)
        f = _small_poly(rng)
        psis = [cdeg.phi_fl(_small_poly(rng), k, q) for k in range(1, n + 3)]
        psis.append(cdeg.grad_hamiltonian_c(cdeg.truncated(L, K), 2))
        for l in (n + 1, n + 2):
            for psi in psis:
                t.add(cdeg.submanifold_residual(L, f, l, psi), lambda: L.to_json())
        t.add(cdeg.submanifold_residual(L, LaurentPoly(), n + 1, psis[0]))
    return {"alpha": ALPHA, "n": [1, 2, 3]}, t


@cdeg_check("casimir_last_coefficient")
def _casimir_c(rng, ctx, controls):
    q, a, K = _numeric(ctx)
    t = Tally(tol=_ptol(ctx, 10))
    for n in (1, 2, 3):
        L = cdeg.random_csymbol(rng, q, mpmath.mpf(n), n, complete=True)
        f = _small_poly(rng)
        for k in range(1, n + 2):
            t.add(cdeg.casimir_un_residual(L, f, cdeg.phi_fl(_small_poly(rng), k, q)), lambda: L.to_json())
    return {"n": [1, 2, 3]}, t


@cdeg_check("integer_degree")
def _integer_degree(rng, ctx, controls):
    t = Tally(tol=_ptol(ctx, 10))
    qe = ctx.q if is_exact(ctx.q) else Fraction(1, 2)
    qn = mpmath.mpf(qe.numerator) / qe.denominator
    for n in ctx.ns:
        L = random_monic(rng, qe, n)
        S = cdeg.integer_symbol(to_numeric(L))
        fs = elementary_functionals(n, 2)
        Dn = QOp.D(qn, n)
        for a, b in product(fs, fs):
            exact = bracket(BracketSpec("quadratic", n), a, b, L)
            da = mul(Dn, to_numeric(a.differential(qe)))
            db = mul(Dn, to_numeric(b.differential(qe)))
            value = cdeg.bracket_c(da, db, S)
            t.add(value - mpmath.mpf(exact.numerator) / exact.denominator, lambda: _qop_witness(L) + [[a.i, a.j], [b.i, b.j]])
    return {"n": list(ctx.ns), "amax": 2}, t

"""Command line entry point: ``qgd verify | root | bracket | flow``."""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction
from pathlib import Path

from .coeffs import Context
from .frac import check_monic, nth_root
from .gdbracket import BracketSpec, bracket, zeta
from .hierarchy import lax_rhs
from .psid import QOp
from .suites import SUITES, run_suite

__all__ = ["main", "build_parser", "parse_functional"]


def _orders(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgd", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", default="all", choices=(*SUITES, "all"))
    v.add_argument("--q", type=Fraction, default=Fraction(1, 2))
    v.add_argument("--n", type=_orders, default=(2, 3))
    v.add_argument("--depth", type=int, default=8)
    v.add_argument("--digits", type=int, default=40)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--report", type=Path)

    r = sub.add_parser("root", help="n-th root of a monic operator")
    r.add_argument("--input", type=Path, required=True)
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--depth", type=int, default=8)

    b = sub.add_parser("bracket", help="evaluate a bracket of two functionals")
    b.add_argument("--spec", default="f134")
    b.add_argument("--phi", required=True)
    b.add_argument("--psi", required=True)
    b.add_argument("--op", type=Path, required=True)
    b.add_argument("--n", type=int)

    f = sub.add_parser("flow", help="right-hand side of the m-th Lax flow")
    f.add_argument("--op", type=Path, required=True)
    f.add_argument("--m", type=int, required=True)
    f.add_argument("--depth", type=int, default=8)
    return p


def parse_functional(text: str):
    m = re.fullmatch(r"\s*zeta\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*", text)
    if not m:
        raise ValueError(f"cannot parse functional {text!r}; expected zeta(i,j)")
    return zeta(int(m.group(1)), int(m.group(2)))


def _load(path: Path) -> QOp:
    return QOp.loads(path.read_text())


def _verify(args) -> int:
    ctx = Context(q=args.q, depth=args.depth, digits=args.digits, seed=args.seed, ns=args.n)
    report = run_suite(args.suite, ctx, jobs=args.jobs)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  residual={c.residual}")
    if args.report:
        args.report.write_text(report.dumps() + "\n")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "root":
            print(nth_root(_load(args.input), args.n, args.depth).dumps())
            return 0
        if args.command == "bracket":
            L = _load(args.op)
            n = args.n if args.n is not None else check_monic(L)
            spec = BracketSpec.parse(args.spec, n)
            print(bracket(spec, parse_functional(args.phi), parse_functional(args.psi), L))
            return 0
        if args.command == "flow":
            L = _load(args.op)
            print(lax_rhs(L, args.m, check_monic(L), args.depth).dumps())
            return 0
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())

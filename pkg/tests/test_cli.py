import json
from fractions import Fraction

import pytest

from qgd.cli import main, parse_functional
from qgd.coeffs import Context
from qgd.psid import QOp, mul
from qgd.suites import SCHEMA, random_instance, run_suite

from conftest import Q, lp


@pytest.fixture
def op_file(tmp_path):
    L = QOp.monic(Q, [lp((0, 3), (1, 1)), lp((-1, 2))])
    path = tmp_path / "op.json"
    path.write_text(L.dumps())
    return L, path


def test_verify_writes_schema(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", "--suite", "algebra", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["schema"] == SCHEMA and data["suite"] == "algebra" and data["passed"]
    assert {c["status"] for c in data["checks"]} == {"pass"}
    assert "PASS" in capsys.readouterr().out


def test_verify_is_deterministic(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        main(["verify", "--suite", "algebra", "--seed", "7", "--report", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_root_command(op_file, capsys):
    L, path = op_file
    assert main(["root", "--input", str(path), "--n", "2", "--depth", "6"]) == 0
    R = QOp.loads(capsys.readouterr().out)
    assert mul(R, R).agrees_with(L)


def test_bracket_command(op_file, capsys):
    _, path = op_file
    assert main(["bracket", "--spec", "f134", "--phi", "zeta(1,0)", "--psi", "zeta(2,1)", "--op", str(path)]) == 0
    Fraction(capsys.readouterr().out.strip())


def test_flow_command(op_file, capsys):
    _, path = op_file
    assert main(["flow", "--op", str(path), "--m", "1"]) == 0
    V = QOp.loads(capsys.readouterr().out)
    assert V.hi < 2


def test_errors_exit_nonzero(op_file, capsys):
    _, path = op_file
    assert main(["bracket", "--spec", "nonsense", "--phi", "zeta(1,0)", "--psi", "zeta(1,0)", "--op", str(path)]) == 1
    assert capsys.readouterr().err.startswith("error:")
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "nope"])


def test_parse_functional():
    assert parse_functional(" zeta( 2 ,-1)") == parse_functional("zeta(2,-1)")
    with pytest.raises(ValueError):
        parse_functional("xi(1,2)")


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")


@pytest.mark.parametrize("kind", ["M_n", "QOp", "Yn", "LoopMat", "CSymbol"])
def test_random_instances_are_seeded(kind):
    ctx = Context(depth=4)
    a = random_instance(kind, ctx)
    b = random_instance(kind, ctx)
    assert repr(a) == repr(b)
    assert repr(a) != repr(random_instance(kind, Context(depth=4, seed=43)))


def test_unknown_instance_kind():
    with pytest.raises(ValueError):
        random_instance("matrix", Context())


def test_bracket_suite_at_second_q():
    report = run_suite("bracket", Context(q=Fraction(1, 3)))
    assert report.passed, [c.name for c in report.failed()]

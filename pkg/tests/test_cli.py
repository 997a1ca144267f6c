import re

import pytest

from funcineq.cli import (EXIT_BUILD, EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION, CliError,
                          RunConfig, bundled_problems, int_range, main, resolve_problem)
from funcineq.sdp import parse_sdpa

from helpers import external_solve

INVALID = """
[domain]
n = 1
[field]
m = 1
p = 2
d = 2
[constraints]
dirichlet = 0
[functional]
I1 = (1; 1; 0)
I2 = (0; 0; 2)
lambda = lam
f = lam*I2 - I1^2
objective = minimize lam
[symmetry]
element = A=[-1] B=[1]
"""


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bundled_problems_listed():
    assert {"jensen_poincare.fi", "inhomogeneous.fi"} <= set(bundled_problems())
    text, source = resolve_problem("examples/inhomogeneous.fi")
    assert source.endswith("inhomogeneous.fi") and "[functional]" in text


def test_int_range():
    assert int_range("3") == [3] and int_range("1..4") == [1, 2, 3, 4]


def test_run_config_requires_mode_flags():
    with pytest.raises(CliError):
        RunConfig(mode="export", problem="jensen_poincare")


def test_validate_ok(capsys):
    code, out, _ = run_cli(capsys, "validate", "jensen_poincare")
    assert code == EXIT_OK
    assert "group: ok" in out and "invariance: ok" in out and out.rstrip().endswith("ok")


def test_validate_failure(capsys, tmp_path):
    path = tmp_path / "bad.fi"
    path.write_text(INVALID)
    code, out, _ = run_cli(capsys, "validate", str(path))
    assert code == EXIT_VALIDATION
    assert "invariance: FAILED" in out or "A4" in out


def test_parse_error_is_validation_failure(capsys, tmp_path):
    path = tmp_path / "bad.fi"
    path.write_text(INVALID.replace("p = 2", "p = two"))
    code, _, err = run_cli(capsys, "solve", str(path))
    assert code == EXIT_VALIDATION and "bad.fi:6:" in err


def test_missing_file(capsys):
    code, _, err = run_cli(capsys, "solve", "no_such_problem.fi")
    assert code == EXIT_IO and "no such problem file" in err


def test_solve_first_example(capsys):
    code, out, _ = run_cli(capsys, "solve", "examples/jensen_poincare.fi", "--omega", "1", "--K", "1")
    assert code == EXIT_OK
    lam = float(re.search(r"lam\* = (\S+)", out).group(1))
    assert lam == pytest.approx(2 / 3, abs=1e-4)
    assert "-> ok" in out


def test_solve_infeasible_exit_code(capsys):
    code, out, _ = run_cli(capsys, "solve", "inhomogeneous", "--param", "d=1", "--omega", "2",
                           "--K", "1")
    assert code == EXIT_SOLVER and "no certificate exists" in out


def test_certify_prints_gram_details(capsys):
    code, out, _ = run_cli(capsys, "certify", "jensen_poincare")
    assert code == EXIT_OK and "eigenvalue" in out


def test_build_and_dump(capsys, tmp_path):
    dump = tmp_path / "dump.txt"
    code, out, _ = run_cli(capsys, "build", "jensen_poincare", "--dump", str(dump))
    assert code == EXIT_OK
    assert "M1" in dump.read_text()


def test_export_then_import(capsys, tmp_path):
    sdp, sol = tmp_path / "jp.dat-s", tmp_path / "jp.out"
    code, _, _ = run_cli(capsys, "export", "jensen_poincare", "--export", str(sdp))
    assert code == EXIT_OK
    text = sdp.read_text()
    parse_sdpa(text)
    pytest.importorskip("cvxpy")
    sol.write_text(external_solve(text))
    code, out, _ = run_cli(capsys, "import", "jensen_poincare", "--import", str(sol))
    assert code == EXIT_OK
    lam = float(re.search(r"lam\* = (\S+)", out).group(1))
    assert lam == pytest.approx(2 / 3, abs=1e-4)


def test_import_unreadable(capsys, tmp_path):
    code, _, err = run_cli(capsys, "import", "jensen_poincare", "--import", str(tmp_path / "x"))
    assert code == EXIT_IO


def test_import_malformed(capsys, tmp_path):
    path = tmp_path / "x.out"
    path.write_text("xVec = {1\n")
    code, _, err = run_cli(capsys, "import", "jensen_poincare", "--import", str(path))
    assert code != EXIT_OK and "line" in err


def test_build_failure_exit_code(capsys, tmp_path):
    # u' = 1 contradicts zero boundary values: int u' = 2 and = 0
    text = """
[domain]
n = 1
[field]
m = 1
p = 2
d = 2
[constraints]
a = Z11 - 1
dirichlet = 0
[functional]
I1 = (0; 0; 2)
lambda = lam
f = lam*I1 - 1
objective = minimize lam
"""
    path = tmp_path / "inc.fi"
    path.write_text(text)
    code, _, err = run_cli(capsys, "solve", str(path))
    assert code == EXIT_BUILD and "inconsistent" in err


def test_table_small(capsys):
    code, out, _ = run_cli(capsys, "table", "inhomogeneous", "--omega", "1..2", "--d", "1..2",
                           "--K", "2")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("Upper bounds on the minimum lambda")
    row1 = next(l for l in lines if l.strip().startswith("1 "))
    assert row1.split()[1:] == ["4.000000", "16.00000"]
    row2 = next(l for l in lines if l.strip().startswith("2 "))
    assert row2.split()[1:] == ["1.333333", "1.777778"]


def test_table_marks_infeasible_cells(capsys):
    code, out, _ = run_cli(capsys, "table", "inhomogeneous", "--omega", "2", "--d", "1..2",
                           "--K", "1")
    assert code == EXIT_SOLVER
    assert "infeas" in out and "1.777778" in out
    assert "default degree rule" in out

from fractions import Fraction

import pytest

from funcineq.problem import BoxDomain, IntervalDomain, TableDomain
from funcineq.problem_file import ProblemFileError, load_problem, parse_problem

from helpers import example

GOOD = """# comment line
[domain]
n = 1
L = 2

[field]
m = 1
p = 2
d = 2

[constraints]
dirichlet = 0

[functional]
I1 = (0; 0; 2)
I2 = (0; 2; 0)
lambda = lam
f = lam*I1 - I2
objective = minimize lam
"""


def test_parse_minimal():
    spec = parse_problem(GOOD, "good.fi")
    assert isinstance(spec.domain, IntervalDomain) and spec.domain.L == 2
    assert spec.functional.objective == (Fraction(1),)
    assert spec.constraints.is_dirichlet
    assert len(spec.symmetry.elements) == 1
    assert spec.name == "good"


def test_bundled_examples():
    jp = example("jensen_poincare")
    assert jp.functional.lambda_names == ["lam"]
    assert [s.flat for s in jp.functional.S] == [(0, 1, 0), (0, 0, 2)]
    assert jp.certificate == {"Qdeg": [2], "resdeg": 2, "per_block": False}
    inh = example("inhomogeneous", d=3)
    assert inh.params == {"d": 3}
    f0, (fl,) = inh.functional.split_lambda()
    assert fl.degree() == 6 and f0.degree() == 3


def test_unknown_override_rejected():
    with pytest.raises(ProblemFileError):
        example("jensen_poincare", d=2)


@pytest.mark.parametrize("mutate, line, words", [
    (lambda t: t.replace("p = 2", "p = two"), 8, "integer"),
    (lambda t: t.replace("[field]", "[fields]"), 6, "unknown section"),
    (lambda t: t.replace("f = lam*I1 - I2", "f = lam*I1 - * I2"), 18, "polynomial"),
    (lambda t: t.replace("I2 = (0; 2; 0)", "I2 = (0; 2)"), 16, "exponent"),
    (lambda t: t.replace("L = 2", "L = 2\nwidth = 3"), 5, "unknown key"),
    (lambda t: t.replace("d = 2", "d = 2\nd = 3"), 10, "duplicate"),
    (lambda t: t.replace("f = lam*I1 - I2", "f = lam^2*I1"), 18, "affine"),
    (lambda t: "stray = 1\n" + t, 1, "before the first section"),
])
def test_errors_cite_lines(mutate, line, words):
    with pytest.raises(ProblemFileError) as err:
        parse_problem(mutate(GOOD), "bad.fi")
    assert err.value.line == line
    assert f"bad.fi:{line}:" in str(err.value)
    assert words in str(err.value)


def test_box_and_table_domains():
    box = GOOD.replace("n = 1\nL = 2", "n = 2\ntype = box\nhalf_widths = 1, 2").replace(
        "I1 = (0; 0; 2)", "I1 = (0 0; 0; 2 0)").replace("I2 = (0; 2; 0)", "I2 = (0 0; 2; 0 0)")
    spec = parse_problem(box)
    assert isinstance(spec.domain, BoxDomain) and spec.domain.Ls == (1, 2)
    table = GOOD.replace("n = 1\nL = 2", "n = 1\ntype = table\ng = 1 - x1^2\nnormal = x1\n"
                         "interior[0] = 2\nboundary[0] = 2\nsample = 1")
    spec = parse_problem(table)
    assert isinstance(spec.domain, TableDomain)
    assert spec.domain.interior_moment((0,)) == 2


def test_symmetry_and_certificate_sections():
    text = GOOD + "\n[symmetry]\nelement = A=[-1] B=[-1]\n\n[certificate]\nK = 2\nQdeg = 0, 2\nQvars = all\n"
    spec = parse_problem(text)
    assert len(spec.symmetry.elements) == 2
    assert spec.certificate == {"K": 2, "Qdeg": [0, 2], "Qvars": "all"}
    with pytest.raises(ProblemFileError) as err:
        parse_problem(text.replace("Qvars = all", "Qvars = some"))
    assert err.value.line == text.splitlines().index("Qvars = all") + 1


def test_load_missing_file(tmp_path):
    with pytest.raises(ProblemFileError):
        load_problem(tmp_path / "nope.fi")
    path = tmp_path / "ok.fi"
    path.write_text(GOOD)
    assert load_problem(path).name == "ok"

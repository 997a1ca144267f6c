from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcineq.polyalg import GroupElement, Poly, apply_group
from funcineq.problem import (BoxDomain, FieldSpec, IntervalDomain, MissingMomentError,
                              SymmetrySpec, TableDomain, domain_moments, validate_group,
                              validate_invariance, validate_structure)
from funcineq.problem_file import parse_problem

from helpers import example

BASE = """
[domain]
n = 1
type = interval
L = 1
[field]
m = 1
p = 2
d = 2
[constraints]
dirichlet = 0
[functional]
I1 = (0; 1; 0)
I2 = (0; 0; 2)
{extra}
lambda = lam
f = lam*I2 - I1^2
objective = minimize lam
[symmetry]
{sym}
"""


def spec_from(extra="", sym="element = A=[-1] B=[1]"):
    return parse_problem(BASE.format(extra=extra, sym=sym), "test.fi")


def el(a, b):
    return GroupElement(a, b)


# ---------------------------------------------------------------- groups

def test_reflection_group_ok():
    rep = validate_group(SymmetrySpec([el([[1]], [[1]]), el([[-1]], [[1]])]))
    assert rep.ok


def test_missing_identity_reported():
    rep = validate_group(SymmetrySpec([el([[-1]], [[1]])]))
    assert not rep.ok
    assert "identity" in str(rep)


def test_missing_product_reported():
    s = SymmetrySpec([el([[1, 0], [0, 1]], [[1]]), el([[-1, 0], [0, 1]], [[1]]),
                      el([[1, 0], [0, -1]], [[1]])])
    rep = validate_group(s)
    assert not rep.ok and rep.violation == "G3"


def test_diagonal_sign_group_ok():
    els = [el([[a, 0], [0, b]], [[1]]) for a in (1, -1) for b in (1, -1)]
    rep = validate_group(SymmetrySpec(els))
    assert rep.ok
    assert "16" in str(rep)


# ---------------------------------------------------------------- invariance

def test_shipped_example_invariant():
    assert validate_invariance(example("jensen_poincare")).ok
    assert validate_invariance(example("inhomogeneous", d=3)).ok


def test_odd_monomial_violates_a4():
    spec = spec_from(extra="I3 = (1; 1; 0)")
    rep = validate_invariance(spec)
    assert not rep.ok and rep.violation == "A4"
    assert "x1*y1" in str(rep)


def test_trivial_group_always_passes():
    spec = spec_from(extra="I3 = (1; 1; 0)", sym="")
    assert len(spec.symmetry.elements) == 1
    assert validate_invariance(spec).ok


def test_pde_constraint_must_be_invariant():
    text = BASE.format(extra="", sym="element = A=[-1] B=[1]").replace(
        "dirichlet = 0", "dirichlet = 0\na = Z11 - x1")
    rep = validate_invariance(parse_problem(text))
    assert not rep.ok and rep.violation == "A2"


@given(st.sampled_from([(0, 0, 1), (0, 2, 0), (2, 1, 0), (1, 0, 1), (0, 2, 0), (3, 1, 1)]))
@settings(max_examples=10, deadline=None)
def test_invariance_implies_invariant_monomials(extra):
    spec = spec_from(extra=f"I3 = ({extra[0]}; {extra[1]}; {extra[2]})")
    rep = validate_invariance(spec)
    invariant = all(apply_group(s.monomial(), g) == s.monomial()
                    for g in spec.symmetry.elements for s in spec.functional.S)
    assert rep.ok == invariant


# ---------------------------------------------------------------- structure

def test_structure_of_examples():
    assert validate_structure(example("jensen_poincare")).ok
    assert validate_structure(example("inhomogeneous", d=4)).ok


def test_structure_rejects_p_at_most_one():
    text = BASE.format(extra="", sym="").replace("p = 2", "p = 1").replace(
        "I2 = (0; 0; 2)", "I2 = (0; 0; 1)")
    rep = validate_structure(parse_problem(text))
    assert not rep.ok and rep.violation == "P1"


def test_structure_rejects_wrong_normal():
    text = """
[domain]
n = 1
type = table
g = 1 - x1^2
normal = -x1
interior[0] = 2
boundary[0] = 2
sample = 1
sample = -1
[field]
m = 1
p = 2
d = 2
[functional]
I1 = (0; 0; 2)
f = I1
objective = feasibility
"""
    rep = validate_structure(parse_problem(text))
    assert not rep.ok and rep.violation == "P5"
    ok = validate_structure(parse_problem(text.replace("normal = -x1", "normal = x1")))
    assert ok.ok


def test_field_spec_rejects_negative():
    with pytest.raises(ValueError):
        FieldSpec(0, 2, 2)


# ---------------------------------------------------------------- moments

def test_interval_moment_examples():
    dom = IntervalDomain()
    assert domain_moments(dom, (0,)) == 2
    assert domain_moments(dom, (2,)) == Fraction(2, 3)
    assert domain_moments(dom, (3,), "boundary") == 0
    assert domain_moments(dom, (2,), "boundary") == 2


@given(st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=6), st.integers(0, 9))
@settings(max_examples=50, deadline=None)
def test_interval_closed_forms(L, a):
    dom = IntervalDomain(L)
    interior = Fraction(0) if a % 2 else 2 * L ** (a + 1) / (a + 1)
    assert dom.interior_moment((a,)) == interior
    assert dom.boundary_moment((a,)) == L ** a * (1 + (-1) ** a)
    # against direct integration of the monomial
    x = Poly.var(0, nvars=1)
    assert dom.integrate_interior(x ** a) == interior


def test_box_moments_and_flux():
    box = BoxDomain([1, 2])
    assert box.interior_moment((0, 0)) == 8
    assert box.interior_moment((2, 0)) == Fraction(2, 3) * 4
    # perimeter of the 2 x 4 rectangle
    assert box.boundary_moment((0, 0)) == 12
    x1 = Poly.var(0, nvars=2)
    # flux of (x1, 0) through the boundary = area
    assert box.boundary_flux([x1, Poly.zero(nvars=2)]) == 8


def test_table_domain_missing_moment():
    x = Poly.var(0, nvars=1)
    dom = TableDomain(1, 1 - x * x, [x], {(0,): 2}, {(0,): 2})
    assert domain_moments(dom, (0,)) == 2
    with pytest.raises(MissingMomentError):
        domain_moments(dom, (4,))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcineq.certificate import (CertificateError, CertificateSolution, SProcConfig,
                                  assemble_sproc, extract_solution, identity_residual,
                                  iterated_trace, kron_symbolic, sos_matrix, symbolic_trace_term,
                                  verify_certificate)
from funcineq.polyalg import Poly
from funcineq.problem_file import parse_problem
from funcineq.relaxation import build_relaxation
from funcineq.sdp import solve
from funcineq.sdp.solver import EqualityForm

from helpers import ORACLE_US, example, moment_values, random_psd

JP = example("jensen_poincare")
FULL = SProcConfig(K=1, deg_Q=[2], deg_residual=2, per_block=False)


def kron_power(P, k):
    out = P
    for _ in range(k - 1):
        out = np.kron(out, P)
    return out


# ---------------------------------------------------------------- iterated trace

def test_trace_k1_is_inner_product():
    rng = np.random.default_rng(1)
    P, Q = random_psd(rng, 4), random_psd(rng, 4)
    assert iterated_trace(P, Q, 1) == pytest.approx(np.sum(P * Q))


def test_trace_of_identities():
    for r in (1, 2, 3, 5):
        assert iterated_trace(np.eye(r), np.eye(r * r), 2) == pytest.approx(r * r)
        value, steps = iterated_trace(np.eye(r), np.eye(r * r), 2, intermediates=True)
        assert np.allclose(steps[0], r * np.eye(r))


def test_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        iterated_trace(np.eye(2), np.eye(3), 1)
    with pytest.raises(ValueError):
        iterated_trace(np.eye(2), np.eye(4), 0)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2 ** 31))
@settings(max_examples=80, deadline=None)
def test_trace_matches_kronecker_route(r, k, seed):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((r, r))
    P = P + P.T
    Q = rng.standard_normal((r ** k, r ** k))
    Q = Q + Q.T
    assert iterated_trace(P, Q, k) == pytest.approx(np.sum(kron_power(P, k) * Q), abs=1e-9)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2 ** 31))
@settings(max_examples=80, deadline=None)
def test_trace_of_psd_pair_is_psd(r, k, seed):
    rng = np.random.default_rng(seed)
    P = random_psd(rng, r, rng.integers(1, r + 1))
    Q = random_psd(rng, r ** k, rng.integers(1, r ** k + 1))
    value, steps = iterated_trace(P, Q, k, intermediates=True)
    scale = np.linalg.norm(P, 2) ** k * np.linalg.norm(Q, 2)
    assert value >= -1e-10 * scale
    for T in steps:
        assert np.linalg.eigvalsh(T).min() >= -1e-10 * scale


# ---------------------------------------------------------------- symbolic side

def analytic_pieces(kappa: Fraction):
    """Full-matrix problem and the hand-built Q = kappa^2 v v^T + 3/2 w w^T."""
    problem = assemble_sproc(build_relaxation(JP, 1), FULL)
    (term,) = problem.terms
    (M,) = term.blocks
    F = problem.nvars
    pos = {v: i for i, v in enumerate(problem.free_vars)}
    z_row, x_row = M.rows.index((0, 0, 1)), M.rows.index((1, 0, 0))
    xi010 = Poly.var(pos[JP_ID["xi_010"]], nvars=F)
    R = M.size
    zero = Poly.zero(nvars=F)
    w = [zero] * R
    w[z_row] = Poly.const(Fraction(2, 3), nvars=F)
    w[x_row] = xi010
    v = [zero] * R
    v[z_row] = Poly.const(1, nvars=F)
    Q = [[v[i] * v[j] * (kappa * kappa) + w[i] * w[j] * Fraction(3, 2) for j in range(R)]
         for i in range(R)]
    return problem, M, Q, pos, z_row, x_row


_relax = build_relaxation(JP, 1)
JP_ID = {_relax.index.name(v): v for v in range(_relax.index.nvars)}


@pytest.mark.parametrize("kappa", [Fraction(0), Fraction(1), Fraction(3, 2)])
def test_analytic_certificate_reduces_f(kappa):
    problem, M, Q, pos, _, _ = analytic_pieces(kappa)
    term = symbolic_trace_term(M, Q, 1, pos, problem.nvars)
    xi002 = Poly.var(pos[JP_ID["xi_002"]], nvars=problem.nvars)
    (f_lam,) = problem.f_lambda
    assert f_lam == xi002
    # f - T_1 = (lambda - 2/3 - kappa^2) xi_002
    assert problem.f0 - term == xi002 * (-(Fraction(2, 3) + kappa * kappa))


def test_zero_q_gives_zero_term():
    problem, M, Q, pos, _, _ = analytic_pieces(Fraction(0))
    zero = [[Poly.zero(nvars=problem.nvars)] * M.size for _ in range(M.size)]
    assert symbolic_trace_term(M, zero, 1, pos, problem.nvars).is_zero()
    with pytest.raises(CertificateError):
        symbolic_trace_term(M, zero[:-1], 1, pos, problem.nvars)


def test_sos_matrix_matches_gram_layout():
    basis = [(0, 0), (1, 0), (0, 1)]
    rng = np.random.default_rng(3)
    G = rng.integers(-3, 4, (6, 6))
    G = G + G.T
    Q = sos_matrix([[Fraction(int(v)) for v in row] for row in G], basis, 2, 2)
    z = (Fraction(1, 3), Fraction(-2))
    b = np.array([1, z[0], z[1]], dtype=object)
    for a in range(2):
        for c in range(2):
            expect = sum(G[a * 3 + s, c * 3 + t] * b[s] * b[t] for s in range(3) for t in range(3))
            assert Q[a][c].evaluate(z) == expect


def test_kron_symbolic_matches_numeric():
    A = [[Poly.const(v, nvars=1) for v in row] for row in ([1, 2], [3, 4])]
    B = [[Poly.const(v, nvars=1) for v in row] for row in ([0, 5], [6, 7])]
    K = kron_symbolic([A, B])
    ref = np.kron([[1, 2], [3, 4]], [[0, 5], [6, 7]])
    assert [[int(e.constant_term()) for e in row] for row in K] == ref.tolist()


# ---------------------------------------------------------------- verification

def analytic_solution():
    problem, M, Q, pos, z_row, x_row = analytic_pieces(Fraction(0))
    (term,) = problem.terms
    nb = len(term.basis)
    one = tuple([0] * problem.nvars)
    lin = tuple(int(i == pos[JP_ID["xi_010"]]) for i in range(problem.nvars))
    c = np.zeros(M.size * nb)
    c[z_row * nb + term.basis.index(one)] = 2 / 3
    c[x_row * nb + term.basis.index(lin)] = 1.0
    G = 1.5 * np.outer(c, c)
    sol = CertificateSolution(np.array([2 / 3]), [G], np.zeros((len(problem.sigma_basis),) * 2))
    return problem, sol


def test_analytic_certificate_verifies():
    problem, sol = analytic_solution()
    diag = verify_certificate(sol, problem, samples=30, seed=4)
    assert diag["ok"], diag
    assert diag["identity_residual"] < 1e-12


def test_perturbed_gram_fails_eigen_check():
    problem, sol = analytic_solution()
    sol.grams[0][0, 0] -= 1.0
    diag = verify_certificate(sol, problem)
    assert not diag["eigen_ok"] and not diag["ok"]


def test_zero_certificate_fails_identity_check():
    text = """
[domain]
n = 1
[field]
m = 1
p = 2
d = 2
[constraints]
dirichlet = 0
[functional]
I1 = (0; 0; 2)
f = I1^2 - 1
objective = feasibility
"""
    problem = assemble_sproc(build_relaxation(parse_problem(text), 1), SProcConfig())
    sol = CertificateSolution(np.zeros(0), [np.zeros((problem.sdp.dims[t.sdp_block],) * 2)
                                            for t in problem.terms],
                              np.zeros((len(problem.sigma_basis),) * 2))
    r, fz = identity_residual(sol, problem, np.zeros(problem.nvars))
    assert r == -1.0 and fz == 1.0
    diag = verify_certificate(sol, problem)
    assert diag["eigen_ok"] and not diag["identity_ok"]


def test_constant_f_certified_by_residual():
    text = """
[domain]
n = 1
[field]
m = 1
p = 2
d = 2
[constraints]
dirichlet = 0
[functional]
I1 = (0; 0; 2)
f = 1 + 0*I1
objective = feasibility
"""
    problem = assemble_sproc(build_relaxation(parse_problem(text), 1),
                             SProcConfig(K=1, deg_Q=[0], deg_residual=0))
    assert problem.n_lambda == 0 and len(problem.sigma_basis) == 1
    rep = solve(problem.sdp)
    assert rep.status == "optimal"
    sol = extract_solution(problem, rep)
    r, fz = identity_residual(sol, problem, np.zeros(problem.nvars))
    assert fz == 1.0 and abs(r) < 1e-6
    assert verify_certificate(sol, problem)["ok"]


def test_unmatched_monomial_reported():
    text = """
[domain]
n = 1
[field]
m = 1
p = 2
d = 2
[constraints]
dirichlet = 0
[functional]
I1 = (0; 0; 2)
f = I1^2
objective = feasibility
"""
    with pytest.raises(CertificateError, match="xi_002\\^2"):
        assemble_sproc(build_relaxation(parse_problem(text), 1),
                       SProcConfig(K=1, deg_Q=[0], deg_residual=0))


# ---------------------------------------------------------------- assembled SDPs

def solve_lambda(spec, omega, cfg):
    problem = assemble_sproc(build_relaxation(spec, omega), cfg)
    rep = solve(problem.sdp)
    sol = extract_solution(problem, rep)
    return rep, sol, problem


def test_first_example_optimum_both_modes():
    for per_block in (False, True):
        cfg = SProcConfig(K=1, deg_Q=[2], deg_residual=2, per_block=per_block)
        rep, sol, problem = solve_lambda(JP, 1, cfg)
        assert rep.status == "optimal"
        assert sol.lam[0] == pytest.approx(2 / 3, abs=1e-6)
        assert verify_certificate(sol, problem)["ok"]


def test_second_example_lowest_cell():
    rep, sol, _ = solve_lambda(example("inhomogeneous", d=1), 1, SProcConfig(K=2))
    assert rep.status == "optimal" and sol.lam[0] == pytest.approx(4.0, abs=1e-5)


def test_more_trace_levels_restore_feasibility():
    spec = example("inhomogeneous", d=1)
    rep1, _, _ = solve_lambda(spec, 2, SProcConfig(K=1))
    rep2, sol2, _ = solve_lambda(spec, 2, SProcConfig(K=2))
    assert rep1.status == "primal_infeasible"
    assert rep2.status == "optimal" and sol2.lam[0] == pytest.approx(4 / 3, abs=1e-5)


def test_larger_residual_degree_never_worse():
    base = SProcConfig(K=1, deg_Q=[2], deg_residual=2, per_block=False)
    more = SProcConfig(K=1, deg_Q=[2], deg_residual=4, per_block=False)
    _, a, _ = solve_lambda(JP, 1, base)
    _, b, _ = solve_lambda(JP, 1, more)
    assert b.lam[0] <= a.lam[0] + 1e-6


def test_lambda_enters_linearly():
    problem = assemble_sproc(build_relaxation(example("inhomogeneous", d=2), 1), SProcConfig(K=2))
    form = EqualityForm(problem.sdp)
    lam = problem.lam_block

    def data(t):
        X = [np.zeros((n, n)) for n in problem.sdp.dims]
        X[lam][0, 0] = t
        return form.op(X)

    d0, d1, d2 = data(0.0), data(1.0), data(2.0)
    assert np.allclose(d0 - 2 * d1 + d2, 0)
    # first difference is minus the coefficient vector of f_lambda
    coeffs = np.zeros(problem.sdp.m)
    for e, c in problem.f_lambda[0].terms.items():
        coeffs[problem.monomials.index(e)] = float(c)
    assert np.allclose(d1 - d0, -coeffs)


@pytest.mark.parametrize("u", ORACLE_US, ids=["1-x^2", "x(1-x^2)", "(1-x^2)^2"])
def test_certificate_is_sound_on_oracle_points(u):
    rep, sol, problem = solve_lambda(JP, 1, FULL)
    relax = problem.relaxation
    vals = moment_values(u, relax.index)
    z = np.array([float(vals[v]) for v in problem.free_vars])
    lam = sol.lam[0]
    f = lam * problem.f_lambda[0].evaluate_float(z) + problem.f0.evaluate_float(z)
    assert f >= -1e-6
    r, _ = identity_residual(sol, problem, z)
    assert abs(r) < 1e-6

"""Shared fixtures: bundled examples and an independent moment oracle.

The oracle integrates x^a u^b (u')^c with sympy, so it shares no code with
the package's own polynomial arithmetic.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import sympy as sp

from funcineq.cli import resolve_problem
from funcineq.problem_file import parse_problem
from funcineq.relaxation import Affine, MomentIndex

X = sp.Symbol("x")


def example(name: str, **params):
    text, source = resolve_problem(name)
    return parse_problem(text, source, params or None)


def _frac(v) -> Fraction:
    v = sp.Rational(v)
    return Fraction(int(v.p), int(v.q))


def moment_values(u, index, L: int = 1) -> dict[int, Fraction]:
    """Exact moments of u on (-L, L) for every variable of a 1D index (n = m = 1)."""
    du = sp.diff(u, X)
    vals = {}
    for i, (a, b, c) in enumerate(index.xi):
        vals[i] = _frac(sp.integrate(X ** a * u ** b * du ** c, (X, -L, L)))
    if index.theta_is_variable:
        off = len(index.xi)
        for i, (a, b) in enumerate(index.theta):
            vals[off + i] = _frac(sum(xb ** a * u.subs(X, xb) ** b for xb in (-L, L)))
    return vals


def group_average(values: dict[int, Fraction], index, elements) -> dict[int, Fraction]:
    """Average of the pushed-forward moments over 1D signed elements (A, B)."""
    out = {}
    off = len(index.xi)
    for v, val in values.items():
        acc = Fraction(0)
        for g in elements:
            A, B = g.A[0][0], g.B[0][0]
            if v < off:
                a, b, c = index.xi[v]
                acc += A ** (a + c) * B ** (b + c) * val
            else:
                a, b = index.theta[v - off]
                acc += A ** a * B ** b * val
        out[v] = acc / len(elements)
    return out


def block_float(block, values) -> np.ndarray:
    return np.array([[float(e.evaluate(values)) for e in row] for row in block.entries])


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    G = rng.standard_normal((n, rank or n))
    return G @ G.T


# test functions vanishing at x = +-1
ORACLE_US = [1 - X ** 2, X * (1 - X ** 2), (1 - X ** 2) ** 2]


def read_sdpa_plain(text: str):
    """Minimal independent SDPA reader: (c, sizes, {(k, b): dense matrix})."""
    rows = [ln.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ")
            for ln in text.splitlines() if ln.strip() and ln.strip()[0] not in '"*']
    m, nb = int(rows[0].split()[0]), int(rows[1].split()[0])
    sizes = [int(t) for t in rows[2].split()[:nb]]
    c = np.array([float(t) for t in rows[3].split()[:m]])
    mats = {}
    for ln in rows[4:]:
        k, b, i, j, v = ln.split()[:5]
        k, b, i, j = int(k), int(b) - 1, int(i) - 1, int(j) - 1
        n = abs(sizes[b])
        M = mats.setdefault((k, b), np.zeros((n, n)))
        M[i, j] = M[j, i] = float(v)
    return c, sizes, mats


def external_solve(text: str) -> str:
    """Solve an SDPA file with cvxpy/Clarabel and answer in SDPA output layout."""
    import cvxpy as cp

    c, sizes, mats = read_sdpa_plain(text)
    Ys = [cp.Variable((abs(s), abs(s)), symmetric=True) for s in sizes]
    cons = [Y >> 0 for Y in Ys]
    for b, s in enumerate(sizes):
        if s < 0:
            cons.append(Ys[b] == cp.diag(cp.diag(Ys[b])))

    def inner(k):
        return sum(cp.trace(mats[(k, b)] @ Ys[b]) for b in range(len(sizes)) if (k, b) in mats)

    eqs = [inner(i + 1) == c[i] for i in range(len(c))]
    prob = cp.Problem(cp.Maximize(inner(0) if any(k == 0 for k, _ in mats) else 0), cons + eqs)
    prob.solve(solver="CLARABEL", tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    Y = [np.asarray(v.value) for v in Ys]
    x = np.array([float(e.dual_value) for e in eqs])
    # pick the multiplier sign for which c^T x matches <F0, Y>
    dual = prob.value
    if abs(c @ -x - dual) < abs(c @ x - dual):
        x = -x

    def zmat(b):
        n = abs(sizes[b])
        Z = -mats.get((0, b), np.zeros((n, n)))
        for i in range(len(c)):
            Z = Z + x[i] * mats.get((i + 1, b), np.zeros((n, n)))
        return Z

    def fmt(Ms):
        out = []
        for M, s in zip(Ms, sizes):
            if s < 0:
                out.append("{" + ",".join(repr(float(v)) for v in np.diag(M)) + "}")
            else:
                out.append("{ " + ", ".join("{" + ",".join(repr(float(v)) for v in r) + "}"
                                            for r in M) + " }")
        return "{\n" + "\n".join(out) + "\n}"

    Zs = [zmat(b) for b in range(len(sizes))]
    return (f"objValPrimal = {c @ x!r}\nobjValDual = {dual!r}\n"
            f"xVec = \n{{{','.join(repr(float(v)) for v in x)}}}\n"
            f"xMat = \n{fmt(Zs)}\nyMat = \n{fmt(Y)}\n")


# Reference matrices, rows labelled by the monomial x^a y^b Z^c.
M1_ROWS = [(0, 0, 0), (0, 1, 0), (1, 0, 1), (0, 0, 1), (1, 0, 0), (1, 1, 0)]
M1_EXPECTED = [
    ["2", "xi_010", "-xi_010", "0", "0", "0"],
    ["xi_010", "-2*xi_111", "xi_111", "0", "0", "0"],
    ["-xi_010", "xi_111", "xi_202", "0", "0", "0"],
    ["0", "0", "0", "xi_002", "-xi_010", "xi_111"],
    ["0", "0", "0", "-xi_010", "2/3", "xi_210"],
    ["0", "0", "0", "xi_111", "xi_210", "xi_220"],
]
MG_ROWS = [(0, 0, 0), (0, 1, 0), (0, 0, 1)]
# (y, y) entry is xi_020 - xi_220 with xi_020 = -2 xi_111
MG_EXPECTED = [
    ["4/3", "xi_010 - xi_210", "0"],
    ["xi_010 - xi_210", "-2*xi_111 - xi_220", "0"],
    ["0", "0", "xi_002 - xi_202"],
]


def parse_entry(text: str, index: MomentIndex) -> Affine:
    names = {index.name(v): v for v in range(index.nvars)}
    syms = {n: sp.Symbol(n) for n in names}
    expr = sp.expand(sp.sympify(text, locals=syms))
    const = expr.as_coefficients_dict().get(sp.Integer(1), 0)
    terms = {names[str(s)]: Fraction(str(expr.coeff(s))) for s in expr.free_symbols}
    return Affine(terms, Fraction(str(const)))


def matrix_matches(block, rows, expected, index) -> bool:
    pos = {r: i for i, r in enumerate(block.rows)}
    if sorted(pos) != sorted(rows):
        return False
    for i, ri in enumerate(rows):
        for j, rj in enumerate(rows):
            if block.entries[pos[ri]][pos[rj]] != parse_entry(expected[i][j], index):
                return False
    return True


def match_up_to_permutation(block, expected, index):
    """A row order under which ``block`` equals ``expected`` entry by entry, else None."""
    n = block.size
    if len(expected) != n:
        return None
    want = [[parse_entry(e, index) for e in row] for row in expected]
    # prune on the diagonal first
    cands = [[i for i in range(n) if block.entries[i][i] == want[k][k]] for k in range(n)]
    for perm in itertools.product(*cands):
        if len(set(perm)) < n:
            continue
        if all(block.entries[perm[i]][perm[j]] == want[i][j] for i in range(n) for j in range(n)):
            return [block.rows[i] for i in perm]
    return None


# acceptance bookkeeping: criterion number -> [(ok, detail)]
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(n, []).append((bool(ok), detail))
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok

"""S-procedure certificates built from iterated traces of the LMI.

After elimination, every moment variable is an affine form in the free
variables z, the LMI is M(z) = diag(M_1(z), ..., M_r(z)), and the target is
the polynomial identity

    f(z) - sum_k T_k(M(z), Q_k(z)) - sigma_0(z) = 0

with Q_k(z) = (I kron b(z))^T G_k (I kron b(z)) an SOS polynomial matrix and
sigma_0 = b(z)^T G_0 b(z) an SOS polynomial.  Matching coefficients gives
linear equations in the Gram matrices and the tunable parameters, i.e. an SDP
in equality form (Gram matrices = X).

Block handling
--------------
For a block-diagonal M, T_k(M, Q) only sees the principal submatrices of Q
indexed by k-tuples of blocks, and permuting a tuple is a congruence.  So
T_k(M, Q) over the whole matrix is the same as a sum over multisets
{b_1..b_k} of independent terms <M_b1 kron ... kron M_bk, Q_b>.  ``per_block``
uses that decomposition over the irreducible components of the LMI;
``cross_blocks=False`` keeps only the tuples (b, .., b).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polyalg import Poly
from .relaxation import Affine, LMIBlock, Relaxation, monomials
from .sdp.model import BlockSdp, SolveReport

__all__ = [
    "CertificateError",
    "SProcConfig",
    "TraceTerm",
    "SdpProblem",
    "CertificateSolution",
    "iterated_trace",
    "kron_symbolic",
    "symbolic_trace_term",
    "sos_matrix",
    "assemble_sproc",
    "extract_solution",
    "verify_certificate",
]


class CertificateError(ValueError):
    pass


# --------------------------------------------------------------------------
# iterated trace
# --------------------------------------------------------------------------

def _contract(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Blockwise trace: out[a, b] = tr(P Q_ab) with Q split into r x r blocks."""
    r = P.shape[0]
    m = Q.shape[0] // r
    blocks = Q.reshape(m, r, m, r)
    # tr(P Q_ab) = sum_ij P_ij (Q_ab)_ji
    return np.einsum("ij,ajbi->ab", P, blocks)


def iterated_trace(P, Q, k: int, intermediates: bool = False):
    """T_k(P, Q) for P of size r and Q of size r^k.

    With ``intermediates`` also return [T_1, ..., T_k] as matrices.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("P must be square")
    r = P.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if Q.shape != (r ** k, r ** k):
        raise ValueError(f"Q must be {r ** k} x {r ** k} for r = {r}, k = {k}, got {Q.shape}")
    steps = []
    cur = Q
    for _ in range(k):
        cur = _contract(P, cur)
        steps.append(cur)
    value = float(cur[0, 0])
    return (value, steps) if intermediates else value


# --------------------------------------------------------------------------
# symbolic helpers
# --------------------------------------------------------------------------

def affine_poly(a: Affine, pos: dict[int, int], nvars: int) -> Poly:
    terms = {}
    if a.const:
        terms[(0,) * nvars] = a.const
    for v, c in a.terms.items():
        e = [0] * nvars
        e[pos[v]] = 1
        terms[tuple(e)] = c
    return Poly(terms, nvars=nvars)


def _as_poly_matrix(M, pos, nvars) -> list[list[Poly]]:
    if isinstance(M, LMIBlock):
        M = M.entries
    out = []
    for row in M:
        out.append([affine_poly(e, pos, nvars) if isinstance(e, Affine) else e for e in row])
    return out


def kron_symbolic(mats: Sequence[list[list[Poly]]]) -> list[list[Poly]]:
    """Kronecker product of symbolic matrices (first factor outermost)."""
    out = mats[0]
    for nxt in mats[1:]:
        r, s = len(out), len(nxt)
        out = [[out[i // s][j // s] * nxt[i % s][j % s] for j in range(r * s)] for i in range(r * s)]
    return out


def block_diag_symbolic(mats: Sequence[list[list[Poly]]], zero: Poly) -> list[list[Poly]]:
    n = sum(len(m) for m in mats)
    out = [[zero] * n for _ in range(n)]
    off = 0
    for m in mats:
        for i, row in enumerate(m):
            for j, e in enumerate(row):
                out[off + i][off + j] = e
        off += len(m)
    return out


def symbolic_trace_term(M, Q: list[list[Poly]], k: int, pos: dict[int, int] | None = None,
                        nvars: int | None = None) -> Poly:
    """Exact <M^{kron k}, Q> for a symbolic M (LMIBlock or matrix of Poly/Affine)."""
    if pos is None:
        if isinstance(M, LMIBlock):
            vs = sorted(M.variables())
        else:
            vs = sorted({v for row in M for e in row if isinstance(e, Affine) for v in e.terms})
        pos = {v: i for i, v in enumerate(vs)}
    if nvars is None:
        nvars = Q[0][0].nvars if Q and Q[0] else len(pos)
    P = _as_poly_matrix(M, pos, nvars)
    r = len(P)
    if len(Q) != r ** k or any(len(row) != r ** k for row in Q):
        raise CertificateError(f"Q must be {r ** k} x {r ** k} for a {r} x {r} block and k = {k}")
    Pk = kron_symbolic([P] * k)
    acc = Poly.zero(nvars=nvars)
    for i in range(r ** k):
        for j in range(r ** k):
            if Pk[i][j] and Q[i][j]:
                acc = acc + Pk[i][j] * Q[i][j]
    return acc


def sos_matrix(G, basis: Sequence[tuple[int, ...]], R: int, nvars: int) -> list[list[Poly]]:
    """Q(z) = (I_R kron b(z))^T G (I_R kron b(z)) with exact (Fraction) Gram G."""
    nb = len(basis)
    if any(len(e) != nvars for e in basis):
        raise CertificateError(f"basis exponents must have {nvars} entries")
    if len(G) != R * nb:
        raise CertificateError(f"Gram matrix must be {R * nb} x {R * nb}")
    mons = [Poly.monomial(e) for e in basis]
    out = []
    for a in range(R):
        row = []
        for b in range(R):
            acc = Poly.zero(nvars=nvars)
            for s in range(nb):
                for t in range(nb):
                    g = G[a * nb + s][b * nb + t]
                    if g:
                        acc = acc + mons[s] * mons[t] * Fraction(g)
            row.append(acc)
        out.append(row)
    return out


# --------------------------------------------------------------------------
# configuration and assembled problem
# --------------------------------------------------------------------------

@dataclass
class SProcConfig:
    K: int = 1
    deg_q: int | None = None
    deg_Q: list[int] | None = None
    Q_vars: str = "f"
    per_block: bool = True
    cross_blocks: bool = True
    deg_residual: int | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.Q_vars not in ("f", "all"):
            raise ValueError("Q_vars must be 'f' or 'all'")
        if self.deg_Q is not None:
            if len(self.deg_Q) == 1 and self.K > 1:
                self.deg_Q = list(self.deg_Q) * self.K
            if len(self.deg_Q) != self.K:
                raise ValueError(f"deg_Q needs {self.K} entries")

    def resolved(self, deg_f: int) -> "SProcConfig":
        """Fill unset degrees with the defaults derived from deg(f)."""
        return SProcConfig(
            K=self.K,
            deg_q=deg_f if self.deg_q is None else self.deg_q,
            deg_Q=[max(deg_f - 2, 0)] * self.K if self.deg_Q is None else list(self.deg_Q),
            Q_vars=self.Q_vars,
            per_block=self.per_block,
            cross_blocks=self.cross_blocks,
            deg_residual=deg_f + deg_f % 2 if self.deg_residual is None else self.deg_residual,
        )

    def describe(self) -> str:
        mode = ("per block" + (" with cross terms" if self.cross_blocks else ", diagonal tuples only")
                if self.per_block else "full matrix")
        return (f"K={self.K}, deg_Q={self.deg_Q}, deg_residual={self.deg_residual}, "
                f"Q_vars={self.Q_vars}, trace mode: {mode}")


@dataclass
class TraceTerm:
    k: int
    blocks: tuple[LMIBlock, ...]
    basis: list[tuple[int, ...]]
    sdp_block: int

    @property
    def R(self) -> int:
        return int(np.prod([b.size for b in self.blocks]))

    @property
    def label(self) -> str:
        return f"T{self.k}(" + " x ".join(b.label for b in self.blocks) + ")"


@dataclass
class SdpProblem:
    sdp: BlockSdp
    relaxation: Relaxation
    config: SProcConfig
    free_vars: list[int]
    q_vars: list[int]
    monomials: list[tuple[int, ...]]
    terms: list[TraceTerm]
    sigma_basis: list[tuple[int, ...]]
    sigma_block: int
    lam_block: int | None
    n_lambda: int
    f0: Poly
    f_lambda: list[Poly]
    lambda_names: list[str] = field(default_factory=list)
    objective: tuple | None = None

    @property
    def nvars(self) -> int:
        return len(self.free_vars)

    def var_names(self) -> list[str]:
        return [self.relaxation.index.name(v) for v in self.free_vars]

    def summary(self) -> str:
        names = self.var_names()
        lines = [f"certificate: {self.config.describe()}",
                 f"free variables: {len(self.free_vars)}; Q depends on "
                 + (", ".join(names[i] for i in self.q_vars) or "nothing"),
                 f"trace terms: {len(self.terms)}; Gram sizes "
                 + " ".join(str(self.sdp.dims[t.sdp_block]) for t in self.terms),
                 f"residual Gram size {len(self.sigma_basis)}",
                 f"SDP: {self.sdp.summary()}"]
        return "\n".join(lines)


def _deg_f(f0: Poly, fl: list[Poly]) -> int:
    return max([f0.degree()] + [p.degree() for p in fl] + [0])


def _basis(q_vars: list[int], nvars: int, deg: int) -> list[tuple[int, ...]]:
    out = []
    for e in monomials(len(q_vars), (deg + 1) // 2):
        full = [0] * nvars
        for i, v in enumerate(q_vars):
            full[v] = e[i]
        out.append(tuple(full))
    return out


class _MonomialTable:
    def __init__(self):
        self.ids: dict[tuple[int, ...], int] = {}
        self.items: list[tuple[int, ...]] = []

    def get(self, e: tuple[int, ...]) -> int:
        i = self.ids.get(e)
        if i is None:
            i = self.ids[e] = len(self.items)
            self.items.append(e)
        return i


def _add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def _gram_triplets(P: list[list[Poly]], basis, table: _MonomialTable, blk: int, out: list):
    """Coefficient-matching entries for <P(z), (I kron b)^T G (I kron b)>."""
    R, nb = len(P), len(basis)
    bb = _MonomialTable()
    bbid = np.array([[bb.get(_add(basis[s], basis[t])) for t in range(nb)] for s in range(nb)],
                    dtype=np.int64)
    ptab = _MonomialTable()
    pI, pJ, pid, pc = [], [], [], []
    for i in range(R):
        for j in range(i, R):
            for e, c in P[i][j].terms.items():
                pI.append(i)
                pJ.append(j)
                pid.append(ptab.get(e))
                pc.append(float(c))
    if not pI:
        return
    combo = np.array([[table.get(_add(pe, be)) for be in bb.items] for pe in ptab.items], dtype=np.int64)
    pI, pJ, pid, pc = map(np.asarray, (pI, pJ, pid, pc))
    S1, S2 = np.meshgrid(np.arange(nb), np.arange(nb), indexing="ij")
    allpairs = (S1.ravel(), S2.ravel())
    up = S1 <= S2
    uppairs = (S1[up], S2[up])
    for sel, (s1, s2) in ((pI < pJ, allpairs), (pI == pJ, uppairs)):
        if not sel.any():
            continue
        I, J, ids, cs = pI[sel], pJ[sel], pid[sel], pc[sel]
        mono = combo[ids[:, None], bbid[s1, s2][None, :]]
        u = I[:, None] * nb + s1[None, :]
        v = J[:, None] * nb + s2[None, :]
        val = np.broadcast_to(cs[:, None], mono.shape)
        out.append((mono.ravel() + 1, np.full(mono.size, blk), u.ravel(), v.ravel(), val.ravel()))


def _trace_tuples(relax: Relaxation, cfg: SProcConfig) -> list[tuple[int, tuple[LMIBlock, ...]]]:
    if cfg.per_block:
        comps = relax.lmi.components()
    else:
        blocks = relax.lmi.blocks
        full = _concat_blocks(blocks)
        comps = [full] if full.size else []
    out = []
    for k in range(1, cfg.K + 1):
        if not comps:
            continue
        if cfg.per_block and cfg.cross_blocks:
            for combo in itertools.combinations_with_replacement(range(len(comps)), k):
                out.append((k, tuple(comps[i] for i in combo)))
        else:
            for c in comps:
                out.append((k, (c,) * k))
    return out


def _concat_blocks(blocks: Sequence[LMIBlock]) -> LMIBlock:
    n = sum(b.size for b in blocks)
    entries = [[Affine() for _ in range(n)] for _ in range(n)]
    rows = []
    off = 0
    for b in blocks:
        for i in range(b.size):
            for j in range(b.size):
                entries[off + i][off + j] = b.entries[i][j]
        rows.extend(b.rows)
        off += b.size
    return LMIBlock("M", rows, entries)


def assemble_sproc(relax: Relaxation, cfg: SProcConfig | None = None) -> SdpProblem:
    """Coefficient-matched SDP for f - sum_k T_k(M, Q_k) - sigma_0 = 0."""
    eq = relax.eq
    if not eq.consistent:
        raise CertificateError("equality constraints are inconsistent; nothing to certify")
    spec = relax.spec
    free = list(eq.free_vars)
    pos = {v: i for i, v in enumerate(free)}
    F = len(free)
    fun = spec.functional
    images = [affine_poly(eq.expr(relax.index.xi_id(s.flat)), pos, F) for s in fun.S]
    f0_raw, fl_raw = fun.split_lambda()
    f0 = f0_raw.compose(images) if f0_raw.nvars else f0_raw
    fl = [p.compose(images) for p in fl_raw]
    cfg = (cfg or SProcConfig()).resolved(_deg_f(f0, fl))

    if cfg.Q_vars == "all":
        q_vars = list(range(F))
    else:
        q_vars = sorted({i for p in [f0] + fl for i in p.variables()})

    table = _MonomialTable()
    chunks: list = []
    block_sizes: list[int] = []
    terms: list[TraceTerm] = []
    for k, blocks in _trace_tuples(relax, cfg):
        basis = _basis(q_vars, F, cfg.deg_Q[k - 1])
        P = kron_symbolic([_as_poly_matrix(b, pos, F) for b in blocks])
        blk = len(block_sizes)
        term = TraceTerm(k, blocks, basis, blk)
        block_sizes.append(term.R * len(basis))
        terms.append(term)
        _gram_triplets(P, basis, table, blk, chunks)

    sigma_basis = _basis(q_vars, F, cfg.deg_residual)
    sigma_block = len(block_sizes)
    block_sizes.append(len(sigma_basis))
    nbs = len(sigma_basis)
    s1, s2 = np.triu_indices(nbs)
    mono = np.array([table.get(_add(sigma_basis[a], sigma_basis[b])) for a, b in zip(s1, s2)],
                    dtype=np.int64)
    chunks.append((mono + 1, np.full(len(mono), sigma_block), s1, s2, np.ones(len(mono))))

    n_lam = len(fun.lambda_names)
    lam_block = None
    if n_lam:
        lam_block = len(block_sizes)
        block_sizes.append(-2 * n_lam)
        mats, rs, vs = [], [], []
        for i, p in enumerate(fl):
            for e, c in p.terms.items():
                mid = table.ids.get(e)
                if mid is None:
                    raise CertificateError(
                        f"monomial {_mono_str(e, relax, free)} of the parameter part of f lies "
                        f"outside every certificate term; raise deg_Q or deg_residual")
                mats += [mid + 1, mid + 1]
                rs += [i, n_lam + i]
                vs += [-float(c), float(c)]
        chunks.append((np.asarray(mats), np.full(len(mats), lam_block), np.asarray(rs),
                       np.asarray(rs), np.asarray(vs)))
        if fun.objective is not None:
            cvec = [float(c) for c in fun.objective]
            idx = np.arange(2 * n_lam)
            # F_0 = -C with C = diag(c, -c)
            chunks.append((np.zeros(2 * n_lam, dtype=np.int64), np.full(2 * n_lam, lam_block),
                           idx, idx, np.asarray([-v for v in cvec] + cvec)))

    for e in f0.terms:
        if e not in table.ids:
            raise CertificateError(f"monomial {_mono_str(e, relax, free)} of f lies outside every "
                                   f"certificate term; raise deg_Q or deg_residual")
    rhs = np.zeros(len(table.items))
    for e, c in f0.terms.items():
        rhs[table.ids[e]] = float(c)

    cat = [np.concatenate([np.asarray(ch[i]) for ch in chunks]) for i in range(5)]
    names = [_mono_str(e, relax, free) for e in table.items]
    sdp = BlockSdp.from_triplets(block_sizes, rhs, *cat, names=names)
    return SdpProblem(sdp, relax, cfg, free, q_vars, list(table.items), terms, sigma_basis,
                      sigma_block, lam_block, n_lam, f0, fl, list(fun.lambda_names), fun.objective)


def _mono_str(e, relax: Relaxation, free: list[int]) -> str:
    parts = []
    for i, k in enumerate(e):
        if k:
            nm = relax.index.name(free[i])
            parts.append(nm if k == 1 else f"{nm}^{k}")
    return "*".join(parts) or "1"


# --------------------------------------------------------------------------
# solutions and verification
# --------------------------------------------------------------------------

@dataclass
class CertificateSolution:
    lam: np.ndarray
    grams: list[np.ndarray]
    sigma_gram: np.ndarray
    q: np.ndarray = field(default_factory=lambda: np.zeros(0))
    report: SolveReport | None = None
    diagnostics: dict = field(default_factory=dict)


def extract_solution(problem: SdpProblem, report: SolveReport) -> CertificateSolution:
    X = report.X
    lam = np.zeros(problem.n_lambda)
    if problem.lam_block is not None:
        d = np.diag(X[problem.lam_block])
        lam = d[:problem.n_lambda] - d[problem.n_lambda:]
    grams = [X[t.sdp_block] for t in problem.terms]
    return CertificateSolution(lam, grams, X[problem.sigma_block], report=report)


def _eval_basis(basis, z: np.ndarray) -> np.ndarray:
    return np.array([np.prod(z ** np.asarray(e)) for e in basis])


def identity_residual(sol: CertificateSolution, problem: SdpProblem, z: np.ndarray) -> tuple[float, float]:
    """(f - sum T_k - sigma_0)(z) evaluated numerically, and |f(z)|."""
    free = problem.free_vars
    values = {v: z[i] for i, v in enumerate(free)}
    f = problem.f0.evaluate_float(z) + sum(l * p.evaluate_float(z) for l, p in zip(sol.lam, problem.f_lambda))
    total = 0.0
    for term, G in zip(problem.terms, sol.grams):
        mats = [np.array(b.evaluate(values), dtype=float) for b in term.blocks]
        P = mats[0]
        for m in mats[1:]:
            P = np.kron(P, m)
        bz = _eval_basis(term.basis, z)
        R, nb = P.shape[0], len(bz)
        Q = np.einsum("asbt,s,t->ab", G.reshape(R, nb, R, nb), bz, bz)
        total += float(np.sum(P * Q))
    bs = _eval_basis(problem.sigma_basis, z)
    sigma = float(bs @ sol.sigma_gram @ bs)
    return f - total - sigma, abs(f)


def verify_certificate(sol: CertificateSolution, problem: SdpProblem, samples: int = 20,
                       seed: int = 0, tol_eig: float = 1e-7, tol_id: float = 1e-6) -> dict:
    """Eigenvalue and sampled identity checks; never trusts the solver."""
    eigs = [float(np.linalg.eigvalsh(G).min()) if G.size else 0.0 for G in sol.grams]
    eigs.append(float(np.linalg.eigvalsh(sol.sigma_gram).min()) if sol.sigma_gram.size else 0.0)
    min_eig = min(eigs)
    scale = max(1.0, max((float(np.abs(G).max()) for G in sol.grams + [sol.sigma_gram] if G.size),
                         default=1.0))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = rng.uniform(-1.0, 1.0, problem.nvars)
        r, fz = identity_residual(sol, problem, z)
        worst = max(worst, abs(r) / (1.0 + fz))
    diag = {
        "min_eigenvalue": min_eig,
        "eigen_ok": min_eig >= -tol_eig * scale,
        "identity_residual": worst,
        "identity_ok": worst <= tol_id,
        "samples": samples,
    }
    diag["ok"] = diag["eigen_ok"] and diag["identity_ok"]
    sol.diagnostics = diag
    return diag

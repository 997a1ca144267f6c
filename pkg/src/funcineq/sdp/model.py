"""Block-diagonal SDP data in SDPA convention.

The problem is stored the way SDPA stores it::

    (primal)  minimize   c^T x   s.t.  sum_i x_i F_i - F_0  >= 0
    (dual)    maximize   <F_0, Y>  s.t.  <F_i, Y> = c_i,  Y >= 0

The solver works on the equivalent equality form with C = -F_0, A_i = F_i,
b = c and X = Y, y = -x::

    (P) minimize <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
    (D) maximize b^T y   s.t.  sum_i y_i A_i + S = C,  S >= 0

Status names refer to (P).  Certificates built by :mod:`funcineq.certificate`
put their Gram matrices in X, so ``primal_infeasible`` means that no
certificate exists at the requested degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BlockSdp", "SolverOptions", "SolveReport", "STATUSES"]

STATUSES = ("optimal", "primal_infeasible", "dual_infeasible", "max_iter", "numerical")


@dataclass
class BlockSdp:
    """SDPA data: sizes (negative = diagonal block), objective c, sparse F_0..F_m.

    Entries are kept as sorted, deduplicated upper-triangle COO arrays with
    0-based block and row/column indices; ``mat`` is the SDPA matrix number
    (0 for F_0).
    """

    block_sizes: list[int]
    c: np.ndarray
    mat: np.ndarray
    blk: np.ndarray
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray
    names: list[str] | None = None

    @classmethod
    def from_triplets(cls, block_sizes, c, mat, blk, row, col, val, names=None,
                      drop_tol: float = 0.0) -> "BlockSdp":
        mat = np.asarray(mat, dtype=np.int64)
        blk = np.asarray(blk, dtype=np.int64)
        row = np.asarray(row, dtype=np.int64)
        col = np.asarray(col, dtype=np.int64)
        val = np.asarray(val, dtype=np.float64)
        c = np.asarray(c, dtype=np.float64).copy()
        sizes = [int(s) for s in block_sizes]
        if any(s == 0 for s in sizes):
            raise ValueError("block sizes must be nonzero")
        lo, hi = np.minimum(row, col), np.maximum(row, col)
        dims = np.abs(np.asarray(sizes, dtype=np.int64))
        if len(val):
            if blk.min() < 0 or blk.max() >= len(sizes):
                raise ValueError("block index out of range")
            if lo.min() < 0 or np.any(hi >= dims[blk]):
                raise ValueError("entry index outside its block")
            if mat.min() < 0 or mat.max() > len(c):
                raise ValueError("matrix number out of range")
            diag_blocks = np.asarray([s < 0 for s in sizes])
            if np.any(diag_blocks[blk] & (lo != hi)):
                raise ValueError("off-diagonal entry in a diagonal block")
        if not np.all(np.isfinite(val)) or not np.all(np.isfinite(c)):
            raise ValueError("non-finite data")
        # canonical order and duplicate summation
        order = np.lexsort((hi, lo, blk, mat))
        mat, blk, lo, hi, val = mat[order], blk[order], lo[order], hi[order], val[order]
        if len(val):
            key_change = np.ones(len(val), dtype=bool)
            key_change[1:] = ((mat[1:] != mat[:-1]) | (blk[1:] != blk[:-1])
                              | (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1]))
            starts = np.flatnonzero(key_change)
            val = np.add.reduceat(val, starts)
            mat, blk, lo, hi = mat[starts], blk[starts], lo[starts], hi[starts]
            keep = np.abs(val) > drop_tol
            mat, blk, lo, hi, val = mat[keep], blk[keep], lo[keep], hi[keep], val[keep]
        return cls(sizes, c, mat, blk, lo, hi, val, names)

    @property
    def m(self) -> int:
        return len(self.c)

    @property
    def dims(self) -> list[int]:
        return [abs(s) for s in self.block_sizes]

    def matrix(self, k: int, b: int) -> np.ndarray:
        """Dense symmetric F_k restricted to block b."""
        n = abs(self.block_sizes[b])
        out = np.zeros((n, n))
        sel = (self.mat == k) & (self.blk == b)
        out[self.row[sel], self.col[sel]] = self.val[sel]
        out[self.col[sel], self.row[sel]] = self.val[sel]
        return out

    def same_as(self, other: "BlockSdp") -> bool:
        return (self.block_sizes == other.block_sizes and np.array_equal(self.c, other.c)
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ("mat", "blk", "row", "col", "val")))

    def summary(self) -> str:
        return (f"{self.m} equality constraints, blocks "
                + " ".join(str(s) for s in self.block_sizes) + f", {len(self.val)} nonzeros")


@dataclass
class SolverOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    tol_infeas: float = 1e-8
    verbose: bool = False

    def __post_init__(self):
        for name in ("tol_gap", "tol_feas", "tol_infeas", "step_fraction"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.step_fraction >= 1:
            raise ValueError("step_fraction must be below 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class SolveReport:
    """Outcome of a solve or an imported external solution.

    ``X`` and ``S`` are lists of dense blocks (diagonal blocks as full
    matrices), ``y`` the (D) multipliers; ``x = -y`` are the SDPA decisions.
    ``objective`` is the SDPA primal objective c^T x.
    """

    status: str
    X: list[np.ndarray]
    y: np.ndarray
    S: list[np.ndarray]
    primal_objective: float = float("nan")
    dual_objective: float = float("nan")
    gap: float = float("nan")
    errors: dict = field(default_factory=dict)
    iterations: int = 0
    wall_time: float = 0.0
    message: str = ""
    history: list = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return -self.y

    @property
    def objective(self) -> float:
        return -self.dual_objective

    def summary(self) -> str:
        errs = " ".join(f"{k}={v:.1e}" for k, v in self.errors.items())
        return (f"status {self.status} after {self.iterations} iterations ({self.wall_time:.2f} s); "
                f"<C,X> = {self.primal_objective:.10g}, b^T y = {self.dual_objective:.10g}; {errs}")

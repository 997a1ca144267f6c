"""SDPA sparse input (``.dat-s``) and SDPA-style solution files.

Input layout, one item per line::

    mDIM
    nBLOCK
    size_1 size_2 ...          (negative = diagonal block)
    c_1 c_2 ... c_mDIM
    matno blkno i j value      (1-based, i <= j, F_0 has matno 0)

Values are written with 17 significant digits so that parsing and writing
again reproduces the file byte for byte.  A problem with no decisions is
written with a single dummy decision (c = 0, F_1 = 0).

Solution layout (as printed by SDPA)::

    objValPrimal = ...
    objValDual = ...
    xVec =
    {x_1,...,x_m}
    xMat =
    { {block 1 rows}, ... }     primal slack  sum x_i F_i - F_0
    yMat =
    { ... }                     dual matrix Y
"""

from __future__ import annotations

import re

import numpy as np

from .model import BlockSdp, SolveReport
from .solver import EqualityForm, dimacs_errors

__all__ = ["SdpaFormatError", "export_sdpa", "parse_sdpa", "write_solution", "import_solution"]


class SdpaFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _num(v: float) -> str:
    s = f"{v:.17g}"
    return "0" if s == "-0" else s


def export_sdpa(p: BlockSdp) -> str:
    m = p.m
    c = p.c if m else np.zeros(1)
    lines = [str(max(m, 1)), str(len(p.block_sizes)), " ".join(str(s) for s in p.block_sizes),
             " ".join(_num(v) for v in c)]
    for k, b, i, j, v in zip(p.mat, p.blk, p.row, p.col, p.val):
        lines.append(f"{k} {b + 1} {i + 1} {j + 1} {_num(v)}")
    return "\n".join(lines) + "\n"


_SEP = re.compile(r"[,(){}\s]+")


def _tokens(line: str) -> list[str]:
    return [t for t in _SEP.split(line.strip()) if t]


def parse_sdpa(text: str) -> BlockSdp:
    lines = text.splitlines()
    pos = 0
    # leading comment lines start with '"' or '*'
    while pos < len(lines) and (not lines[pos].strip() or lines[pos].lstrip()[:1] in ('"', "*")):
        pos += 1

    def header(what: str) -> tuple[list[str], int]:
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise SdpaFormatError(f"unexpected end of file, expected {what}", pos + 1)
        toks, ln = _tokens(lines[pos]), pos + 1
        pos += 1
        return toks, ln

    def ints(toks, ln, what):
        try:
            return [int(t) for t in toks]
        except ValueError:
            raise SdpaFormatError(f"bad {what}: {' '.join(toks)!r}", ln) from None

    toks, ln = header("mDIM")
    if not toks:
        raise SdpaFormatError("missing mDIM", ln)
    m = ints(toks[:1], ln, "mDIM")[0]
    toks, ln = header("nBLOCK")
    if not toks:
        raise SdpaFormatError("missing nBLOCK", ln)
    nb = ints(toks[:1], ln, "nBLOCK")[0]
    if m < 1 or nb < 1:
        raise SdpaFormatError("mDIM and nBLOCK must be positive", ln)
    toks, ln = header("block sizes")
    sizes = ints(toks, ln, "block sizes")
    if len(sizes) != nb or any(s == 0 for s in sizes):
        raise SdpaFormatError(f"expected {nb} nonzero block sizes", ln)
    toks, ln = header("objective vector")
    try:
        c = [float(t) for t in toks]
    except ValueError:
        raise SdpaFormatError("bad objective vector", ln) from None
    if len(c) != m:
        raise SdpaFormatError(f"objective vector has {len(c)} entries, expected {m}", ln)
    mat, blk, row, col, val = [], [], [], [], []
    dims = [abs(s) for s in sizes]
    for idx in range(pos, len(lines)):
        toks = _tokens(lines[idx])
        if not toks:
            continue
        ln = idx + 1
        if len(toks) != 5:
            raise SdpaFormatError(f"expected 'matno blkno i j value', got {lines[idx].strip()!r}", ln)
        try:
            k, b, i, j = (int(t) for t in toks[:4])
            v = float(toks[4])
        except ValueError:
            raise SdpaFormatError(f"bad entry {lines[idx].strip()!r}", ln) from None
        if not (0 <= k <= m and 1 <= b <= nb and 1 <= i <= dims[b - 1] and 1 <= j <= dims[b - 1]):
            raise SdpaFormatError(f"entry out of range: {lines[idx].strip()!r}", ln)
        if sizes[b - 1] < 0 and i != j:
            raise SdpaFormatError("off-diagonal entry in a diagonal block", ln)
        mat.append(k)
        blk.append(b - 1)
        row.append(i - 1)
        col.append(j - 1)
        val.append(v)
    return BlockSdp.from_triplets(sizes, c, mat, blk, row, col, val)


# --------------------------------------------------------------------------
# solutions
# --------------------------------------------------------------------------

def _fmt_block(M: np.ndarray, diagonal: bool) -> str:
    if diagonal:
        return "{" + ",".join(_num(v) for v in np.diag(M)) + "}"
    return "{ " + ", ".join("{" + ",".join(_num(v) for v in r) + "}" for r in M) + " }"


def _fmt_mats(p: BlockSdp, mats) -> str:
    return "{\n" + "\n".join(_fmt_block(M, s < 0) for M, s in zip(mats, p.block_sizes)) + "\n}"


def write_solution(p: BlockSdp, rep: SolveReport) -> str:
    """SDPA-style solution text for a report (xMat = slack S, yMat = X)."""
    x = rep.x if p.m else np.zeros(1)
    return (f"objValPrimal = {_num(rep.objective)}\n"
            f"objValDual   = {_num(-rep.primal_objective)}\n"
            f"xVec = \n{{{','.join(_num(v) for v in x)}}}\n"
            f"xMat = \n{_fmt_mats(p, rep.S)}\n"
            f"yMat = \n{_fmt_mats(p, rep.X)}\n")


_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def _scan_braced(lines: list[str], start: int) -> tuple[str, int]:
    """Collect text from ``start`` until braces balance; return (text, next line)."""
    depth, seen, buf = 0, False, []
    i = start
    while i < len(lines):
        line = lines[i]
        buf.append(line)
        for ch in line:
            if ch == "{":
                depth += 1
                seen = True
            elif ch == "}":
                depth -= 1
        i += 1
        if seen and depth == 0:
            return "\n".join(buf), i
        if depth < 0:
            raise SdpaFormatError("unbalanced '}'", i)
    raise SdpaFormatError("unterminated '{' block", i)


def _blocks_from(text: str, p: BlockSdp, ln: int, what: str) -> list[np.ndarray]:
    vals = [float(t) for t in _NUMBER.findall(text)]
    need = sum(abs(s) if s < 0 else s * s for s in p.block_sizes)
    if len(vals) != need:
        raise SdpaFormatError(f"{what} has {len(vals)} numbers, expected {need}", ln)
    out, k = [], 0
    for s in p.block_sizes:
        if s < 0:
            out.append(np.diag(vals[k:k - s]))
            k -= s
        else:
            out.append(np.array(vals[k:k + s * s]).reshape(s, s))
            k += s * s
    return out


def import_solution(p: BlockSdp, text: str) -> SolveReport:
    """Read an SDPA-style solution and recompute every residual locally."""
    lines = text.splitlines()
    found: dict[str, tuple[str, int]] = {}
    i = 0
    while i < len(lines):
        stripped = lines[i].strip()
        key = stripped.split("=", 1)[0].strip() if "=" in stripped else None
        if key in ("xVec", "xMat", "yMat"):
            rest = stripped.split("=", 1)[1]
            start_ln = i + 1
            if rest.strip():
                lines_view = [rest] + lines[i + 1:]
                blob, used = _scan_braced(lines_view, 0)
                i = i + used
            else:
                blob, nxt = _scan_braced(lines, i + 1)
                i = nxt
            found[key] = (blob, start_ln)
            continue
        i += 1
    for key in ("xVec", "yMat"):
        if key not in found:
            raise SdpaFormatError(f"missing section {key}", len(lines))
    xblob, xln = found["xVec"]
    try:
        x = np.array([float(t) for t in _NUMBER.findall(xblob)])
    except ValueError:
        raise SdpaFormatError("bad xVec", xln) from None
    m = max(p.m, 1)
    if len(x) != m:
        raise SdpaFormatError(f"xVec has {len(x)} entries, expected {m}", xln)
    x = x[:p.m]
    X = _blocks_from(found["yMat"][0], p, found["yMat"][1], "yMat")
    X = [0.5 * (M + M.T) for M in X]
    form = EqualityForm(p)
    y = -x
    if "xMat" in found:
        S = _blocks_from(found["xMat"][0], p, found["xMat"][1], "xMat")
        S = [0.5 * (M + M.T) for M in S]
    else:
        S = [c - a for c, a in zip(form.C, form.adj(y))]
    errs = dimacs_errors(form, X, y, S)
    pobj = float(sum(np.vdot(c, xb) for c, xb in zip(form.C, X)))
    dobj = float(form.b @ y)
    worst = max(errs.values())
    status = "optimal" if worst <= 1e-6 else "numerical"
    return SolveReport(status, X, y, S, pobj, dobj, pobj - dobj, errs,
                       message="imported; residuals recomputed locally")

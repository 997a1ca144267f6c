"""Reader for the plain-text ``.fi`` problem format.

Sections hold ``key = value`` lines; ``#`` starts a comment.  Grammar::

    [domain]
    n = 1
    type = interval            # interval | box | table
    L = 1                      # interval half-width
    half_widths = 1, 2         # box half-widths
    g = 1 - x1^2               # optional for interval/box, required for table
    normal = x1                # table only, comma separated components
    interior[2 0] = 1/3        # table moments, one line per multi-index
    boundary[0 0] = 4
    sample = 1 0               # boundary sample points for the normal check

    [field]
    m = 1
    p = 2
    d = 2

    [constraints]
    a = Z11 - y1               # optional PDE constraint
    b = y1                     # boundary constraint, or
    dirichlet = 0              # u = h on the boundary, one entry per component

    [functional]
    I1 = (0; 1; 0)             # alpha; beta; gamma rows separated by ','
    I2 = (0; 0; 2)
    lambda = lam
    f = lam*I2 - I1^2
    objective = minimize lam   # or: feasibility

    [symmetry]
    element = A=[-1] B=[1]     # matrix rows separated by ';'

    [parameters]
    d = 1                      # integers usable in exponents and coefficients

    [certificate]              # optional defaults for the certificate search
    K = 1
    Qdeg = 2                   # one degree, or one per trace level
    resdeg = 2
    qdeg = 2
    per_block = off            # on | off
    cross_blocks = on          # on | off
    Qvars = f                  # f | all

Identity is always added to the symmetry list if missing.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .polyalg import (Exponent, GroupElement, Poly, PolySyntaxError, PolyVec, VarShape,
                      parse_poly, xyz_resolver)
from .problem import (BoxDomain, ConstraintSpec, FieldSpec, FunctionalSpec, IntervalDomain,
                      ProblemSpec, SymmetrySpec, TableDomain)

__all__ = ["ProblemFileError", "parse_problem", "load_problem", "SECTIONS"]

SECTIONS = ("domain", "field", "constraints", "functional", "symmetry", "parameters",
            "certificate")


class ProblemFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<problem>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


_SECTION = re.compile(r"^\[(\w+)\]$")
_KEY = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*(?:\[[^\]]*\])?)\s*=\s*(.*)$")
_INTEGRAL = re.compile(r"^I\d+$")


def _split_sections(text: str, source: str) -> dict[str, list[tuple[str, str, int]]]:
    out: dict[str, list[tuple[str, str, int]]] = {s: [] for s in SECTIONS}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sec = _SECTION.match(line)
        if sec:
            current = sec.group(1).lower()
            if current not in out:
                raise ProblemFileError(f"unknown section [{current}]", lineno, source)
            continue
        if current is None:
            raise ProblemFileError("content before the first section header", lineno, source)
        kv = _KEY.match(line)
        if not kv:
            raise ProblemFileError(f"expected 'key = value', got {line!r}", lineno, source)
        out[current].append((kv.group(1), kv.group(2).strip(), lineno))
    return out


class _Section:
    """Key lookup with line numbers and single-use checking."""

    def __init__(self, name: str, entries, source: str):
        self.name = name
        self.entries = entries
        self.source = source
        self.used: set[int] = set()

    def error(self, message: str, line: int | None = None) -> ProblemFileError:
        return ProblemFileError(f"[{self.name}] {message}", line, self.source)

    def get(self, key: str, default=None, required: bool = False):
        hits = [(v, ln) for k, v, ln in self.entries if k == key]
        if len(hits) > 1:
            raise self.error(f"duplicate key {key!r}", hits[1][1])
        if not hits:
            if required:
                raise self.error(f"missing required key {key!r}")
            return default, None
        self.used.add(hits[0][1])
        return hits[0]

    def all(self, pred):
        out = []
        for k, v, ln in self.entries:
            if pred(k):
                self.used.add(ln)
                out.append((k, v, ln))
        return out

    def check_unused(self):
        for k, _, ln in self.entries:
            if ln not in self.used:
                raise self.error(f"unknown key {k!r}", ln)


def _int(sec: _Section, key: str, default=None, required=True, params=None) -> int:
    val, ln = sec.get(key, required=required and default is None)
    if val is None:
        return default
    params = params or {}
    if val in params:
        return int(params[val])
    try:
        return int(val)
    except ValueError:
        raise sec.error(f"{key} must be an integer, got {val!r}", ln) from None


def _frac(text: str, sec: _Section, ln: int) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise sec.error(f"expected a rational number, got {text.strip()!r}", ln) from None


def _poly(text: str, resolve, zero: Poly, params, sec: _Section, ln: int) -> Poly:
    try:
        return parse_poly(text, resolve, zero, params)
    except PolySyntaxError as exc:
        raise sec.error(f"bad polynomial {text!r}: {exc}", ln) from None


def _int_list(text: str, sec: _Section, ln: int) -> tuple[int, ...]:
    parts = text.replace(",", " ").split()
    try:
        vals = tuple(int(v) for v in parts)
    except ValueError:
        raise sec.error(f"expected natural numbers, got {text!r}", ln) from None
    if any(v < 0 for v in vals):
        raise sec.error(f"negative exponent in {text!r}", ln)
    return vals


def _exponent(text: str, n: int, m: int, sec: _Section, ln: int) -> Exponent:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise sec.error(f"exponent must look like (alpha; beta; gamma), got {text!r}", ln)
    parts = body[1:-1].split(";")
    if len(parts) != 3:
        raise sec.error(f"exponent needs three ';'-separated groups, got {text!r}", ln)
    alpha = _int_list(parts[0], sec, ln)
    beta = _int_list(parts[1], sec, ln)
    rows = [r for r in parts[2].split(",")] if m > 1 else [parts[2]]
    gamma_flat = [_int_list(r, sec, ln) for r in rows]
    if len(alpha) != n or len(beta) != m or len(gamma_flat) != m or any(len(r) != n for r in gamma_flat):
        raise sec.error(f"exponent {text!r} does not match n={n}, m={m}", ln)
    return Exponent(alpha, beta, tuple(gamma_flat))


def _matrix(text: str, sec: _Section, ln: int):
    rows = [r.split() for r in text.split(";")]
    try:
        return tuple(tuple(Fraction(v) for v in r) for r in rows)
    except (ValueError, ZeroDivisionError):
        raise sec.error(f"bad matrix literal [{text}]", ln) from None


_ELEMENT = re.compile(r"^A\s*=\s*\[([^\]]*)\]\s*,?\s*B\s*=\s*\[([^\]]*)\]$")


def parse_problem(text: str, source: str = "<problem>",
                  overrides: Mapping[str, int] | None = None, name: str | None = None) -> ProblemSpec:
    """Parse problem text; ``overrides`` replaces entries of ``[parameters]``."""
    raw = _split_sections(text, source)
    secs = {k: _Section(k, v, source) for k, v in raw.items()}

    params: dict[str, int] = {}
    psec = secs["parameters"]
    for k, v, ln in psec.all(lambda k: True):
        try:
            params[k] = int(v)
        except ValueError:
            raise psec.error(f"parameter {k} must be an integer, got {v!r}", ln) from None
    for k, v in (overrides or {}).items():
        if k not in params:
            raise ProblemFileError(f"override for undeclared parameter {k!r}", None, source)
        params[k] = int(v)

    # field
    fsec = secs["field"]
    try:
        fld = FieldSpec(_int(fsec, "m", params=params), _int(fsec, "p", params=params),
                        _int(fsec, "d", params=params))
    except ValueError as exc:
        if isinstance(exc, ProblemFileError):
            raise
        raise fsec.error(str(exc)) from None
    fsec.check_unused()

    # domain
    dsec = secs["domain"]
    n = _int(dsec, "n", params=params)
    if n < 1:
        raise dsec.error("dimension n must be positive")
    xshape = VarShape(n, 0)
    xres = xyz_resolver(xshape)
    xzero = Poly.zero(shape=xshape)
    kind, kind_ln = dsec.get("type", "interval")
    g_txt, g_ln = dsec.get("g")
    g = _poly(g_txt, xres, xzero, params, dsec, g_ln) if g_txt is not None else None
    try:
        if kind == "interval":
            if n != 1:
                raise dsec.error("interval domains need n = 1", kind_ln)
            L_txt, L_ln = dsec.get("L", "1")
            domain = IntervalDomain(_frac(L_txt, dsec, L_ln), g)
        elif kind == "box":
            hw, hw_ln = dsec.get("half_widths", required=True)
            widths = [_frac(v, dsec, hw_ln) for v in hw.replace(",", " ").split()]
            if len(widths) != n:
                raise dsec.error(f"expected {n} half-widths", hw_ln)
            domain = BoxDomain(widths, g)
        elif kind == "table":
            if g is None:
                raise dsec.error("table domains need g")
            nt, n_ln = dsec.get("normal", required=True)
            normal = PolyVec(tuple(_poly(c, xres, xzero, params, dsec, n_ln) for c in nt.split(",")))
            if len(normal) != n:
                raise dsec.error(f"normal needs {n} components", n_ln)
            tables: dict[str, dict] = {"interior": {}, "boundary": {}}
            for k, v, ln in dsec.all(lambda k: k.startswith(("interior[", "boundary["))):
                where, idx = k[:-1].split("[", 1)
                alpha = _int_list(idx, dsec, ln)
                if len(alpha) != n:
                    raise dsec.error(f"moment index {idx!r} needs {n} entries", ln)
                tables[where][alpha] = _frac(v, dsec, ln)
            samples = []
            for _, v, ln in dsec.all(lambda k: k == "sample"):
                pt = tuple(_frac(t, dsec, ln) for t in v.replace(",", " ").split())
                if len(pt) != n:
                    raise dsec.error(f"sample point needs {n} coordinates", ln)
                samples.append(pt)
            domain = TableDomain(n, g, normal, tables["interior"], tables["boundary"], samples)
        else:
            raise dsec.error(f"unknown domain type {kind!r}", kind_ln)
    except ProblemFileError:
        raise
    except ValueError as exc:
        raise dsec.error(str(exc)) from None
    dsec.check_unused()

    shape = VarShape(n, fld.m)
    res = xyz_resolver(shape)
    zero = Poly.zero(shape=shape)

    # constraints
    csec = secs["constraints"]
    a_txt, a_ln = csec.get("a")
    b_txt, b_ln = csec.get("b")
    h_txt, h_ln = csec.get("dirichlet")
    if b_txt is not None and h_txt is not None:
        raise csec.error("give either b or dirichlet, not both", h_ln)
    a = _poly(a_txt, res, zero, params, csec, a_ln) if a_txt is not None else None
    b = _poly(b_txt, res, zero, params, csec, b_ln) if b_txt is not None else None
    if b is not None and any(b.depends_on(i) for i in range(n + fld.m, shape.nvars)):
        raise csec.error("boundary condition b may not depend on Z", b_ln)
    dirichlet = None
    if h_txt is not None:
        comps = [_poly(c, xres, xzero, params, csec, h_ln) for c in h_txt.split(",")]
        if len(comps) != fld.m:
            raise csec.error(f"dirichlet data needs m = {fld.m} components", h_ln)
        dirichlet = PolyVec(tuple(comps))
    csec.check_unused()

    # functional
    usec = secs["functional"]
    integrals = usec.all(lambda k: bool(_INTEGRAL.match(k)))
    if not integrals:
        raise usec.error("declare at least one integral I1 = (alpha; beta; gamma)")
    integrals.sort(key=lambda t: int(t[0][1:]))
    names = [k for k, _, _ in integrals]
    if names != [f"I{i + 1}" for i in range(len(names))]:
        raise usec.error(f"integrals must be numbered I1..I{len(names)} without gaps", integrals[0][2])
    S = [_exponent(v, n, fld.m, usec, ln) for _, v, ln in integrals]
    lam_txt, _ = usec.get("lambda", "")
    lam_names = [t.strip() for t in lam_txt.split(",") if t.strip()]
    for nm in lam_names:
        if nm in names or nm in params:
            raise usec.error(f"parameter name {nm!r} clashes with another name")
    nv = len(S) + len(lam_names)
    table = {nm: Poly.var(i, nvars=nv) for i, nm in enumerate(names + lam_names)}
    f_txt, f_ln = usec.get("f", required=True)
    f = _poly(f_txt, table, Poly.zero(nvars=nv), params, usec, f_ln)
    obj_txt, obj_ln = usec.get("objective", "minimize " + lam_names[0] if lam_names else "feasibility")
    objective = None
    if obj_txt.strip() != "feasibility":
        if not obj_txt.startswith("minimize"):
            raise usec.error("objective must be 'feasibility' or 'minimize <linear form>'", obj_ln)
        if not lam_names:
            raise usec.error("a minimization objective needs lambda declarations", obj_ln)
        lam_table = {nm: Poly.var(i, nvars=len(lam_names)) for i, nm in enumerate(lam_names)}
        form = _poly(obj_txt[len("minimize"):], lam_table, Poly.zero(nvars=len(lam_names)),
                     params, usec, obj_ln)
        if form.degree() > 1 or form.constant_term():
            raise usec.error("objective must be a linear form in the parameters", obj_ln)
        objective = tuple(form.coeff(tuple(int(i == j) for j in range(len(lam_names))))
                          for i in range(len(lam_names)))
    try:
        functional = FunctionalSpec(S, f, names, lam_names, objective)
    except ValueError as exc:
        raise usec.error(str(exc), f_ln) from None
    usec.check_unused()

    # symmetry
    ssec = secs["symmetry"]
    elements = [GroupElement.identity(n, fld.m)]
    for _, v, ln in ssec.all(lambda k: k == "element"):
        mt = _ELEMENT.match(v)
        if not mt:
            raise ssec.error("element must look like A=[..] B=[..]", ln)
        A, B = _matrix(mt.group(1), ssec, ln), _matrix(mt.group(2), ssec, ln)
        if len(A) != n or len(B) != fld.m:
            raise ssec.error(f"element needs A of size {n} and B of size {fld.m}", ln)
        try:
            el = GroupElement(A, B)
        except ValueError as exc:
            raise ssec.error(str(exc), ln) from None
        if el not in elements:
            elements.append(el)
    ssec.check_unused()

    cert = _certificate(secs["certificate"], params)
    return ProblemSpec(domain, fld, ConstraintSpec(a, b, dirichlet), functional,
                       SymmetrySpec(elements), name=name or Path(source).stem, params=params,
                       certificate=cert)


def _certificate(sec: _Section, params) -> dict:
    out: dict = {}
    for key in ("K", "qdeg", "resdeg"):
        val = _int(sec, key, required=False, params=params)
        if val is not None:
            out[key] = val
    txt, ln = sec.get("Qdeg")
    if txt is not None:
        out["Qdeg"] = list(_int_list(txt, sec, ln))
    for key in ("per_block", "cross_blocks"):
        txt, ln = sec.get(key)
        if txt is not None:
            if txt not in ("on", "off"):
                raise sec.error(f"{key} must be on or off", ln)
            out[key] = txt == "on"
    txt, ln = sec.get("Qvars")
    if txt is not None:
        if txt not in ("f", "all"):
            raise sec.error("Qvars must be f or all", ln)
        out["Qvars"] = txt
    sec.check_unused()
    return out


def load_problem(path: str | Path, overrides: Mapping[str, int] | None = None) -> ProblemSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read file: {exc.strerror}", None, str(path)) from exc
    return parse_problem(text, str(path), overrides)

"""Moment relaxation at a fixed order: index sets, linear equalities, elimination, LMI.

Moment variables are numbered consecutively: first every xi (interior
occupation-measure moment) in graded-lex order, then every theta (boundary
measure moment) unless Dirichlet data fixes them to rationals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .polyalg import Poly, PolyVec, VarShape, apply_group, grlex_key, total_divergence
from .problem import ProblemSpec

__all__ = [
    "RelaxationError",
    "MomentIndex",
    "Affine",
    "LinRow",
    "EqualitySystem",
    "LMIBlock",
    "SymbolicLMI",
    "Relaxation",
    "enumerate_indices",
    "divergence_constraints",
    "marginal_constraints",
    "pde_bc_constraints",
    "symmetry_constraints",
    "dirichlet_specialize",
    "assemble_and_eliminate",
    "build_lmi",
    "build_relaxation",
]


class RelaxationError(ValueError):
    pass


def monomials(nvars: int, maxdeg: int) -> Iterator[tuple[int, ...]]:
    """All exponent tuples in ``nvars`` variables with total degree <= maxdeg."""
    if nvars == 0:
        if maxdeg >= 0:
            yield ()
        return
    for deg in range(maxdeg + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            yield tuple(e)


def _fmt_exp(flat: Sequence[int], shape: VarShape, with_z: bool) -> str:
    n, m = shape.n, shape.m
    a = "".join(map(str, flat[:n]))
    b = "".join(map(str, flat[n:n + m]))
    if not with_z:
        return f"{a},{b}" if max(n, m) > 1 else f"{a}{b}"
    g = "".join(map(str, flat[n + m:]))
    return f"{a},{b},{g}" if max(n, m) > 1 else f"{a}{b}{g}"


@dataclass
class MomentIndex:
    shape: VarShape
    omega: int
    p: int
    deg_normal: int
    xi: list[tuple[int, ...]]
    theta: list[tuple[int, ...]]
    theta_is_variable: bool = True

    def __post_init__(self):
        self.xi_pos = {e: i for i, e in enumerate(self.xi)}
        self.theta_pos = {e: i for i, e in enumerate(self.theta)}

    @property
    def nvars(self) -> int:
        return len(self.xi) + (len(self.theta) if self.theta_is_variable else 0)

    def xi_id(self, flat: tuple[int, ...]) -> int:
        try:
            return self.xi_pos[flat]
        except KeyError:
            raise RelaxationError(f"moment xi{_fmt_exp(flat, self.shape, True)} is outside "
                                  f"the order-{self.omega} index set") from None

    def theta_id(self, flat: tuple[int, ...]) -> int:
        try:
            return len(self.xi) + self.theta_pos[flat]
        except KeyError:
            raise RelaxationError(f"moment theta{_fmt_exp(flat, self.shape, False)} is outside "
                                  f"the order-{self.omega} index set") from None

    def key(self, var: int) -> tuple:
        """Graded-lex position used for pivoting; theta entries rank above xi."""
        if var < len(self.xi):
            return (0, grlex_key(self.xi[var]))
        return (1, grlex_key(self.theta[var - len(self.xi)]))

    def name(self, var: int) -> str:
        if var < len(self.xi):
            return "xi_" + _fmt_exp(self.xi[var], self.shape, True)
        return "theta_" + _fmt_exp(self.theta[var - len(self.xi)], self.shape, False)

    def exponent(self, var: int) -> tuple[str, tuple[int, ...]]:
        if var < len(self.xi):
            return "xi", self.xi[var]
        return "theta", self.theta[var - len(self.xi)]


def enumerate_indices(field_spec, domain, omega: int) -> MomentIndex:
    if omega < 0 or 2 * omega < field_spec.d:
        raise RelaxationError(f"relaxation order {omega} is too small: need 2*omega >= d = {field_spec.d}")
    shape = VarShape(domain.n, field_spec.m)
    n, m = shape.n, shape.m
    xs = list(monomials(n, 2 * omega))
    yz = list(monomials(m + m * n, field_spec.p))
    xi = sorted((a + b for a in xs for b in yz), key=grlex_key)
    xt = list(monomials(n, 2 * omega + domain.deg_normal))
    ys = list(monomials(m, field_spec.p))
    theta = sorted((a + b for a in xt for b in ys), key=grlex_key)
    return MomentIndex(shape, omega, field_spec.p, domain.deg_normal, xi, theta)


# --------------------------------------------------------------------------
# affine forms and rows
# --------------------------------------------------------------------------

class Affine:
    """const + sum_v coef_v * var_v with exact coefficients."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: dict[int, Fraction] | None = None, const=0):
        self.terms = {v: Fraction(c) for v, c in (terms or {}).items() if c}
        self.const = Fraction(const)

    @classmethod
    def var(cls, v: int) -> "Affine":
        return cls({v: Fraction(1)})

    def __add__(self, other: "Affine") -> "Affine":
        out = dict(self.terms)
        for v, c in other.terms.items():
            out[v] = out.get(v, 0) + c
        return Affine(out, self.const + other.const)

    def __sub__(self, other: "Affine") -> "Affine":
        return self + other.scale(-1)

    def scale(self, c) -> "Affine":
        c = Fraction(c)
        return Affine({v: c * a for v, a in self.terms.items()}, c * self.const)

    def is_zero(self) -> bool:
        return not self.terms and not self.const

    def __eq__(self, other) -> bool:
        return isinstance(other, Affine) and self.terms == other.terms and self.const == other.const

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.const))

    def evaluate(self, values) -> Fraction | float:
        return self.const + sum(c * values[v] for v, c in self.terms.items())

    def substitute(self, mapping: dict[int, "Affine"]) -> "Affine":
        out = Affine({}, self.const)
        for v, c in self.terms.items():
            out = out + (mapping[v].scale(c) if v in mapping else Affine({v: c}))
        return out

    def to_str(self, name=str) -> str:
        parts = []
        for v in sorted(self.terms):
            c = self.terms[v]
            coef = "" if c == 1 else "-" if c == -1 else f"{c}*"
            parts.append(f"{coef}{name(v)}")
        if self.const or not parts:
            parts.insert(0, str(self.const))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Affine({self.to_str()})"


@dataclass
class LinRow:
    """sum_v coeffs[v] * var_v + const = 0."""

    coeffs: dict[int, Fraction]
    const: Fraction
    tag: str
    source: str = ""

    def is_trivial(self) -> bool:
        return not self.coeffs and not self.const

    def as_affine(self) -> Affine:
        return Affine(self.coeffs, self.const)

    def evaluate(self, values) -> Fraction:
        return self.as_affine().evaluate(values)

    def to_str(self, index: MomentIndex) -> str:
        return f"{self.as_affine().to_str(index.name)} = 0"


def _primitive(row: LinRow) -> tuple:
    """Normalize to coprime integers, positive on the highest variable."""
    vals = list(row.coeffs.values()) + [row.const]
    den = math.lcm(*(v.denominator for v in vals))
    ints = {k: int(v * den) for k, v in row.coeffs.items()}
    c = int(row.const * den)
    g = math.gcd(*ints.values(), c) or 1
    top = max(ints) if ints else None
    sign = -1 if (top is not None and ints[top] < 0) or (top is None and c < 0) else 1
    ints = {k: sign * v // g for k, v in ints.items()}
    return tuple(sorted(ints.items())), sign * c // g


# --------------------------------------------------------------------------
# pairing polynomials with the measures
# --------------------------------------------------------------------------

class _Pairing:
    def __init__(self, spec: ProblemSpec, index: MomentIndex):
        self.spec = spec
        self.index = index
        self.shape = index.shape
        self.theta_values = dirichlet_specialize(spec, index.omega, index) \
            if spec.constraints.is_dirichlet else None

    def mu(self, poly: Poly) -> tuple[dict[int, Fraction], Fraction]:
        out: dict[int, Fraction] = {}
        for e, c in poly.terms.items():
            v = self.index.xi_id(e)
            out[v] = out.get(v, 0) + c
        return {k: v for k, v in out.items() if v}, Fraction(0)

    def nu(self, poly: Poly) -> tuple[dict[int, Fraction], Fraction]:
        nm = self.shape.n + self.shape.m
        out: dict[int, Fraction] = {}
        const = Fraction(0)
        for e, c in poly.terms.items():
            if any(e[nm:]):
                raise RelaxationError("boundary pairing of a Z-dependent polynomial")
            key = tuple(e[:nm])
            if self.theta_values is not None:
                try:
                    const += c * self.theta_values[key]
                except KeyError:
                    raise RelaxationError(f"boundary moment {key} outside the index set") from None
            else:
                v = self.index.theta_id(key)
                out[v] = out.get(v, 0) + c
        return {k: v for k, v in out.items() if v}, const


def _combine(a, b, sign_b=1):
    out = dict(a[0])
    for k, v in b[0].items():
        out[k] = out.get(k, 0) + sign_b * v
    return {k: v for k, v in out.items() if v}, a[1] + sign_b * b[1]


def _lift(p: Poly, shape: VarShape) -> Poly:
    pad = shape.nvars - p.nvars
    return Poly({e + (0,) * pad: c for e, c in p.terms.items()}, shape=shape)


def _describe(flat, shape: VarShape) -> str:
    return Poly.monomial(flat, shape=shape).to_str(shape.names())


def divergence_constraints(spec: ProblemSpec, omega: int, index: MomentIndex | None = None,
                           pairing: _Pairing | None = None) -> list[LinRow]:
    """<D phi, mu> - <phi . n, nu> = 0 for phi = x^alpha y^beta e_k."""
    index = index or _index_for(spec, omega)
    pairing = pairing or _Pairing(spec, index)
    shape = index.shape
    n, m = shape.n, shape.m
    dom = spec.domain
    zero = Poly.zero(shape=shape)
    normal = [_lift(c, shape) for c in dom.normal] if dom.normal is not None else None
    rows = []
    for a in monomials(n, 2 * omega):
        for b in monomials(m, spec.field.p):
            mono = Poly.monomial(a + b + (0,) * (m * n), shape=shape)
            for k in range(n):
                phi = PolyVec(tuple(mono if i == k else zero for i in range(n)))
                interior = pairing.mu(total_divergence(phi))
                if pairing.theta_values is not None:
                    flux = Fraction(dom.boundary_flux(
                        [_restrict_dirichlet(c, spec, shape) for c in phi]))
                    boundary = ({}, flux)
                else:
                    if normal is None:
                        raise RelaxationError("boundary flux needs a polynomial normal")
                    boundary = pairing.nu(mono * normal[k])
                coeffs, const = _combine(interior, boundary, -1)
                rows.append(LinRow(coeffs, const, "divergence",
                                   f"phi = {_describe(a + b + (0,) * (m * n), shape)} e{k + 1}"))
    return rows


def _restrict_dirichlet(p: Poly, spec: ProblemSpec, shape: VarShape) -> Poly:
    """p(x, h(x)) as a polynomial over the (x, y, Z) ring with only x present."""
    n = shape.n
    images = [Poly.var(i, shape=shape) for i in range(n)]
    images += [_lift(h, shape) for h in spec.constraints.dirichlet]
    images += [Poly.zero(shape=shape)] * (shape.nvars - len(images))
    return p.compose(images)


def marginal_constraints(spec: ProblemSpec, omega: int, index: MomentIndex | None = None,
                         pairing: _Pairing | None = None) -> list[LinRow]:
    index = index or _index_for(spec, omega)
    shape = index.shape
    n = shape.n
    pad = shape.nvars - n
    rows = []
    for a in monomials(n, 2 * omega):
        val = spec.domain.interior_moment(a)
        rows.append(LinRow({index.xi_id(a + (0,) * pad): Fraction(1)}, -val, "marginal_mu",
                           f"x^alpha = {_describe(a + (0,) * pad, shape)}"))
    if not spec.constraints.is_dirichlet:
        tpad = shape.m
        for a in monomials(n, 2 * omega + index.deg_normal):
            val = spec.domain.boundary_moment(a)
            rows.append(LinRow({index.theta_id(a + (0,) * tpad): Fraction(1)}, -val, "marginal_nu",
                               f"x^alpha = {_describe(a + (0,) * pad, shape)}"))
    return rows


def pde_bc_constraints(spec: ProblemSpec, omega: int, index: MomentIndex | None = None,
                       pairing: _Pairing | None = None) -> list[LinRow]:
    index = index or _index_for(spec, omega)
    pairing = pairing or _Pairing(spec, index)
    shape = index.shape
    n, m = shape.n, shape.m
    p = spec.field.p
    rows = []
    a = spec.constraints.a
    if a is not None:
        dyz, dx = a.deg_yz(), a.deg_x()
        for ax in monomials(n, 2 * omega - dx):
            for yz in monomials(m + m * n, p - dyz):
                psi = Poly.monomial(ax + yz, shape=shape)
                coeffs, const = pairing.mu(psi * a)
                rows.append(LinRow(coeffs, const, "pde", f"psi = {_describe(ax + yz, shape)}"))
    b = spec.constraints.b
    if b is not None and not spec.constraints.is_dirichlet:
        dy, dx = b.deg_y(), b.deg_x()
        for ax in monomials(n, 2 * omega + index.deg_normal - dx):
            for y in monomials(m, p - dy):
                flat = ax + y + (0,) * (m * n)
                coeffs, const = pairing.nu(Poly.monomial(flat, shape=shape) * b)
                rows.append(LinRow(coeffs, const, "bc", f"rho = {_describe(flat, shape)}"))
    return rows


def symmetry_constraints(spec: ProblemSpec, omega: int, index: MomentIndex | None = None,
                         pairing: _Pairing | None = None) -> list[LinRow]:
    """<eta o G - eta, mu> = 0 over the xi range and <zeta o H - zeta, nu> = 0 over theta."""
    index = index or _index_for(spec, omega)
    pairing = pairing or _Pairing(spec, index)
    shape = index.shape
    pad = shape.m * shape.n
    rows = []
    for gi, g in enumerate(spec.symmetry.elements):
        if g.is_identity():
            continue
        for flat in index.xi:
            eta = Poly.monomial(flat, shape=shape)
            moved = apply_group(eta, g, "full")
            if moved == eta:
                continue
            coeffs, const = pairing.mu(moved - eta)
            rows.append(LinRow(coeffs, const, "symmetry",
                               f"eta = {_describe(flat, shape)}, element #{gi + 1}"))
        for flat in index.theta:
            zeta = Poly.monomial(flat + (0,) * pad, shape=shape)
            moved = apply_group(zeta, g, "boundary")
            if moved == zeta:
                continue
            coeffs, const = pairing.nu(moved - zeta)
            rows.append(LinRow(coeffs, const, "symmetry",
                               f"zeta = {_describe(flat + (0,) * pad, shape)}, element #{gi + 1}"))
    return rows


def dirichlet_specialize(spec: ProblemSpec, omega: int,
                         index: MomentIndex | None = None) -> dict[tuple[int, ...], Fraction]:
    """theta_{alpha,beta} = int_boundary x^alpha h(x)^beta dS for every theta index."""
    if not spec.constraints.is_dirichlet:
        raise RelaxationError("problem has no Dirichlet data")
    index = index or _index_for(spec, omega)
    n = index.shape.n
    dom = spec.domain
    hs = list(spec.constraints.dirichlet)
    xshape = VarShape(n, 0)
    out = {}
    for flat in index.theta:
        alpha, beta = flat[:n], flat[n:]
        prod = Poly.monomial(alpha, shape=xshape)
        for h, bj in zip(hs, beta):
            if bj:
                prod = prod * Poly(h.terms, shape=xshape) ** bj
        out[flat] = dom.integrate_boundary(prod)
    return out


def _index_for(spec: ProblemSpec, omega: int) -> MomentIndex:
    index = enumerate_indices(spec.field, spec.domain, omega)
    index.theta_is_variable = not spec.constraints.is_dirichlet
    return index


# --------------------------------------------------------------------------
# elimination
# --------------------------------------------------------------------------

@dataclass
class EqualitySystem:
    index: MomentIndex
    rows: list[LinRow]
    elimination: dict[int, Affine]
    free_vars: list[int]
    consistent: bool = True
    conflict: LinRow | None = None
    theta_values: dict | None = None

    def expr(self, var: int) -> Affine:
        """Affine form of a moment variable in terms of free variables."""
        return self.elimination.get(var) or Affine.var(var)

    def substitute(self, row: LinRow) -> Affine:
        return row.as_affine().substitute(self.elimination)

    def full_values(self, free_values: dict[int, Fraction]) -> dict[int, Fraction]:
        """Extend an assignment of the free variables to every moment variable."""
        vals = dict(free_values)
        for v, a in self.elimination.items():
            vals[v] = a.evaluate(free_values)
        return vals

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rows:
            out[r.tag] = out.get(r.tag, 0) + 1
        return out


def assemble_and_eliminate(rows: Iterable[LinRow], index: MomentIndex,
                           theta_values: dict | None = None) -> EqualitySystem:
    """Exact Gauss-Jordan elimination with the pivot rule described in the README."""
    # normalize and drop duplicates, keeping the first provenance seen
    seen: dict[tuple, LinRow] = {}
    for r in rows:
        if r.is_trivial():
            continue
        key = _primitive(r)
        if key not in seen:
            seen[key] = r
    unique = list(seen.values())
    order = sorted(range(len(unique)), key=lambda i: (len(unique[i].coeffs), i))

    pivots: dict[int, Affine] = {}   # pivot var -> expression in non-pivot vars
    conflict = None
    for i in order:
        row = unique[i]
        reduced = row.as_affine().substitute(pivots)
        if not reduced.terms:
            if reduced.const:
                conflict = conflict or row
            continue
        unit = [v for v, c in reduced.terms.items() if abs(c) == 1]
        if unit:
            piv = max(unit, key=index.key)
        else:
            piv = max(reduced.terms, key=lambda v: (abs(reduced.terms[v]), index.key(v)))
        c = reduced.terms[piv]
        rest = Affine({v: a for v, a in reduced.terms.items() if v != piv}, reduced.const)
        expr = rest.scale(-1 / c)
        sub = {piv: expr}
        for v in list(pivots):
            if piv in pivots[v].terms:
                pivots[v] = pivots[v].substitute(sub)
        pivots[piv] = expr
    free = [v for v in range(index.nvars) if v not in pivots]
    return EqualitySystem(index, unique, pivots, free, conflict is None, conflict, theta_values)


# --------------------------------------------------------------------------
# LMI
# --------------------------------------------------------------------------

@dataclass
class LMIBlock:
    label: str
    rows: list[tuple[int, ...]]
    entries: list[list[Affine]]

    @property
    def size(self) -> int:
        return len(self.rows)

    def is_symmetric(self) -> bool:
        return all(self.entries[i][j] == self.entries[j][i]
                   for i in range(self.size) for j in range(i))

    def evaluate(self, values) -> list[list]:
        return [[e.evaluate(values) for e in row] for row in self.entries]

    def variables(self) -> set[int]:
        return {v for row in self.entries for e in row for v in e.terms}

    def components(self) -> list["LMIBlock"]:
        """Split into irreducible diagonal blocks (connected components of the support)."""
        n = self.size
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i):
                if not self.entries[i][j].is_zero():
                    parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        out = []
        for members in sorted(groups.values()):
            if len(members) == 1 and self.entries[members[0]][members[0]].is_zero():
                continue
            out.append(LMIBlock(f"{self.label}[{len(out)}]", [self.rows[i] for i in members],
                                [[self.entries[i][j] for j in members] for i in members]))
        return out


@dataclass
class SymbolicLMI:
    blocks: list[LMIBlock]

    def components(self) -> list[LMIBlock]:
        return [c for b in self.blocks for c in b.components()]

    def sizes(self) -> list[int]:
        return [b.size for b in self.blocks]


def _moment_block(label, rows, weight: Poly, lookup) -> LMIBlock:
    entries = []
    for r in rows:
        line = []
        for c in rows:
            acc = Affine()
            base = tuple(i + j for i, j in zip(r, c))
            for e, w in weight.terms.items():
                acc = acc + lookup(tuple(i + j for i, j in zip(base, e))).scale(w)
            line.append(acc)
        entries.append(line)
    return LMIBlock(label, rows, entries)


def build_lmi(spec: ProblemSpec, omega: int, eq: EqualitySystem) -> SymbolicLMI:
    """M_1(xi), M_g(xi) and, when any theta is free, M_1(theta)."""
    index = eq.index
    shape = index.shape
    n, m = shape.n, shape.m
    half_p = spec.field.p // 2
    g = _lift(spec.domain.g, shape)

    def xi_lookup(flat):
        return eq.expr(index.xi_id(flat))

    def rows_for(dh: int, groups: int) -> list[tuple[int, ...]]:
        xs = list(monomials(n, omega - (dh + 1) // 2))
        rest = list(monomials(groups, half_p))
        return sorted((a + b for a in xs for b in rest), key=grlex_key)

    one = Poly.const(1, shape=shape)
    blocks = [_moment_block("M1(xi)", rows_for(0, m + m * n), one, xi_lookup)]
    if g.degree() > 0 and omega - (g.degree() + 1) // 2 >= 0:
        blocks.append(_moment_block("Mg(xi)", rows_for(g.degree(), m + m * n), g, xi_lookup))
    if index.theta_is_variable:
        theta_free = any(v >= len(index.xi) for v in eq.free_vars)
        if theta_free:
            tone = Poly.const(1, nvars=n + m)

            def th_lookup(flat):
                return eq.expr(index.theta_id(flat))

            blocks.append(_moment_block("M1(theta)", rows_for(0, m), tone, th_lookup))
    for b in blocks:
        if not b.is_symmetric():
            raise RelaxationError(f"block {b.label} is not symmetric")
    return SymbolicLMI(blocks)


# --------------------------------------------------------------------------
# everything at once
# --------------------------------------------------------------------------

@dataclass
class Relaxation:
    spec: ProblemSpec
    omega: int
    index: MomentIndex
    eq: EqualitySystem
    lmi: SymbolicLMI
    builder_rows: dict[str, int] = field(default_factory=dict)

    def free_name(self, v: int) -> str:
        return self.index.name(v)

    def report(self) -> str:
        idx, eq = self.index, self.eq
        lines = [f"relaxation order omega = {self.omega}",
                 f"moment variables: |xi| = {len(idx.xi)}, |theta| = {len(idx.theta)}"
                 + ("" if idx.theta_is_variable else " (fixed by Dirichlet data)")]
        lines.append("constraint rows generated: " + ", ".join(
            f"{k} {v}" for k, v in self.builder_rows.items()))
        lines.append("distinct rows after normalization: " + ", ".join(
            f"{k} {v}" for k, v in eq.counts().items()))
        lines.append(f"eliminated variables: {len(eq.elimination)}")
        lines.append(f"free variables ({len(eq.free_vars)}): "
                     + " ".join(idx.name(v) for v in eq.free_vars))
        if not eq.consistent:
            lines.append(f"INCONSISTENT: row {eq.conflict.to_str(idx)} [{eq.conflict.tag}: "
                         f"{eq.conflict.source}] reduces to 0 = nonzero")
        if not self.lmi.blocks:
            lines.append("LMI blocks: none")
            return "\n".join(lines)
        lines.append("LMI blocks: " + ", ".join(f"{b.label} {b.size}x{b.size}" for b in self.lmi.blocks))
        comps = self.lmi.components()
        lines.append("irreducible components: " + ", ".join(str(c.size) for c in comps))
        return "\n".join(lines)

    def dump(self) -> str:
        """Machine-readable text dump of the equality system and the LMI."""
        idx, eq = self.index, self.eq
        out = [f"omega {self.omega}", f"variables {idx.nvars}"]
        for v in range(idx.nvars):
            out.append(f"var {v} {idx.name(v)}")
        for r in eq.rows:
            out.append(f"row {r.tag} | {r.to_str(idx)} | {r.source}")
        for v in sorted(eq.elimination):
            out.append(f"elim {idx.name(v)} = {eq.elimination[v].to_str(idx.name)}")
        out.append("free " + " ".join(idx.name(v) for v in eq.free_vars))
        for b in self.lmi.blocks:
            out.append(f"block {b.label} {b.size}")
            for row in b.entries:
                out.append("  " + " ; ".join(e.to_str(idx.name) for e in row))
        return "\n".join(out) + "\n"


def build_relaxation(spec: ProblemSpec, omega: int) -> Relaxation:
    index = _index_for(spec, omega)
    pairing = _Pairing(spec, index)
    builders = {
        "divergence": divergence_constraints,
        "marginal": marginal_constraints,
        "pde_bc": pde_bc_constraints,
        "symmetry": symmetry_constraints,
    }
    rows: list[LinRow] = []
    counts = {}
    for name, fn in builders.items():
        got = fn(spec, omega, index, pairing)
        counts[name] = len(got)
        rows.extend(got)
    eq = assemble_and_eliminate(rows, index, pairing.theta_values)
    lmi = build_lmi(spec, omega, eq) if eq.consistent else SymbolicLMI([])
    return Relaxation(spec, omega, index, eq, lmi, counts)

"""Declarative model of a functional inequality and checks of its structure.

A :class:`ProblemSpec` describes

    F(u) = f({ int_Omega x^alpha u^beta (grad u)^gamma dx }_{(alpha,beta,gamma) in S}) >= 0

for all u with a(x, u, grad u) = 0 in Omega and b(x, u) = 0 (or u = h) on the
boundary, optionally invariant under a finite group of orthonormal maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .polyalg import Exponent, GroupElement, Poly, PolyVec, VarShape, apply_group

__all__ = [
    "DomainSpec",
    "IntervalDomain",
    "BoxDomain",
    "TableDomain",
    "FieldSpec",
    "ConstraintSpec",
    "FunctionalSpec",
    "SymmetrySpec",
    "ProblemSpec",
    "ValidationReport",
    "MissingMomentError",
    "validate_group",
    "validate_invariance",
    "validate_structure",
    "domain_moments",
]


class MissingMomentError(KeyError):
    """A domain moment was requested that the domain cannot provide."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing moment"


@dataclass
class ValidationReport:
    ok: bool = True
    messages: list[str] = field(default_factory=list)
    violation: str | None = None

    def fail(self, axiom: str, message: str) -> "ValidationReport":
        if self.ok:
            self.ok = False
            self.violation = axiom
        self.messages.append(f"{axiom}: {message}")
        return self

    def note(self, message: str) -> None:
        self.messages.append(message)

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        head = "ok" if self.ok else f"violation of {self.violation}"
        return "\n".join([head] + [f"  {m}" for m in self.messages])


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------

def _x_ring(n: int) -> VarShape:
    return VarShape(n, 0)


class DomainSpec:
    """Omega = {g > 0}, boundary {g = 0}, with exact moment oracles.

    Subclasses provide ``interior_moment`` and ``boundary_moment``.  ``normal``
    is the outward unit normal as polynomials in x, or None when it is only
    piecewise constant (boxes), in which case boundary fluxes are computed
    face by face and only Dirichlet data is supported.
    """

    kind = "abstract"

    def __init__(self, n: int, g: Poly, normal: PolyVec | None, deg_normal: int):
        self.n = n
        self.g = g
        self.normal = normal
        self.deg_normal = deg_normal

    @property
    def shape(self) -> VarShape:
        return _x_ring(self.n)

    def interior_moment(self, alpha: Sequence[int]) -> Fraction:
        raise NotImplementedError

    def boundary_moment(self, alpha: Sequence[int]) -> Fraction:
        raise NotImplementedError

    def integrate_interior(self, p: Poly) -> Fraction:
        return sum((c * self.interior_moment(e[:self.n]) for e, c in p.terms.items()), Fraction(0))

    def integrate_boundary(self, p: Poly) -> Fraction:
        return sum((c * self.boundary_moment(e[:self.n]) for e, c in p.terms.items()), Fraction(0))

    def boundary_flux(self, components: Sequence[Poly]) -> Fraction:
        """int_{boundary} phi(x) . n(x) dS for a vector of polynomials in x."""
        if self.normal is None:
            raise ValueError(f"{self.kind} domain has no polynomial normal")
        total = Fraction(0)
        for comp, nk in zip(components, self.normal):
            if comp:
                total += self.integrate_boundary(_in_ring(comp, self.n) * nk)
        return total

    def boundary_samples(self) -> list[tuple[Fraction, ...]]:
        return []

    def describe(self) -> str:
        return f"{self.kind} domain in R^{self.n}, g = {self.g.to_str(_xnames(self.n))}"


def _xnames(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def _in_ring(p: Poly, n: int) -> Poly:
    """Restrict a polynomial in the first n variables of any ring to the pure-x ring."""
    shape = _x_ring(n)
    terms = {}
    for e, c in p.terms.items():
        if any(e[n:]):
            raise ValueError("polynomial depends on more than x")
        terms[tuple(e[:n])] = c
    return Poly(terms, shape=shape)


class IntervalDomain(DomainSpec):
    """(-L, L) with g = L^2 - x^2, boundary = atoms at +-L, normal x/L."""

    kind = "interval"

    def __init__(self, L: Fraction = Fraction(1), g: Poly | None = None):
        L = Fraction(L)
        if L <= 0:
            raise ValueError("interval half-width must be positive")
        self.L = L
        shape = _x_ring(1)
        x = Poly.var(0, shape=shape)
        if g is None:
            g = L * L - x * x
        normal = PolyVec((x * (1 / L),))
        super().__init__(1, g, normal, 1)

    def interior_moment(self, alpha) -> Fraction:
        (a,) = tuple(alpha)
        if a % 2:
            return Fraction(0)
        return 2 * self.L ** (a + 1) / (a + 1)

    def boundary_moment(self, alpha) -> Fraction:
        (a,) = tuple(alpha)
        return self.L ** a * (1 + (-1) ** a)

    def boundary_samples(self):
        return [(self.L,), (-self.L,)]

    def describe(self) -> str:
        return f"interval (-{self.L}, {self.L}), g = {self.g.to_str(['x1'])}, normal = x1/{self.L}"


class BoxDomain(DomainSpec):
    """Axis-aligned box prod_i (-L_i, L_i); boundary measure is the sum over faces."""

    kind = "box"

    def __init__(self, half_widths: Sequence[Fraction], g: Poly | None = None):
        Ls = tuple(Fraction(v) for v in half_widths)
        if not Ls or any(v <= 0 for v in Ls):
            raise ValueError("box half-widths must be positive")
        self.Ls = Ls
        n = len(Ls)
        shape = _x_ring(n)
        if g is None:
            g = Poly.const(1, shape=shape)
            for i, L in enumerate(Ls):
                xi = Poly.var(i, shape=shape)
                g = g * (L * L - xi * xi)
        super().__init__(n, g, None, 0)

    @staticmethod
    def _line(a: int, L: Fraction) -> Fraction:
        return Fraction(0) if a % 2 else 2 * L ** (a + 1) / (a + 1)

    def interior_moment(self, alpha) -> Fraction:
        out = Fraction(1)
        for a, L in zip(alpha, self.Ls):
            out *= self._line(a, L)
        return out

    def _face_moment(self, alpha, axis: int, side: int) -> Fraction:
        out = Fraction(side * self.Ls[axis]) ** alpha[axis]
        for i, (a, L) in enumerate(zip(alpha, self.Ls)):
            if i != axis:
                out *= self._line(a, L)
        return out

    def boundary_moment(self, alpha) -> Fraction:
        alpha = tuple(alpha)
        return sum((self._face_moment(alpha, i, s) for i in range(self.n) for s in (1, -1)),
                   Fraction(0))

    def boundary_flux(self, components) -> Fraction:
        total = Fraction(0)
        for i, comp in enumerate(components):
            if not comp:
                continue
            comp = _in_ring(comp, self.n)
            for s in (1, -1):
                total += s * sum((c * self._face_moment(e, i, s) for e, c in comp.terms.items()),
                                 Fraction(0))
        return total

    def boundary_samples(self):
        return [tuple(s * L for s, L in zip(signs, self.Ls))
                for signs in itertools.product((1, -1), repeat=self.n)]


class TableDomain(DomainSpec):
    """Domain whose moments come from user tables."""

    kind = "table"

    def __init__(self, n: int, g: Poly, normal: PolyVec, interior: dict, boundary: dict,
                 samples: Sequence[Sequence[Fraction]] = ()):
        deg_normal = max((c.degree() for c in normal), default=0)
        super().__init__(n, g, normal, max(deg_normal, 0))
        self.interior = {tuple(k): Fraction(v) for k, v in interior.items()}
        self.boundary = {tuple(k): Fraction(v) for k, v in boundary.items()}
        self.samples = [tuple(Fraction(v) for v in p) for p in samples]

    def interior_moment(self, alpha) -> Fraction:
        try:
            return self.interior[tuple(alpha)]
        except KeyError:
            raise MissingMomentError(f"interior moment for alpha={tuple(alpha)} is not in the table") from None

    def boundary_moment(self, alpha) -> Fraction:
        try:
            return self.boundary[tuple(alpha)]
        except KeyError:
            raise MissingMomentError(f"boundary moment for alpha={tuple(alpha)} is not in the table") from None

    def boundary_samples(self):
        return list(self.samples)


def domain_moments(domain: DomainSpec, alpha: Sequence[int], where: str = "interior") -> Fraction:
    """Exact moment of x^alpha over the domain (``interior``) or its boundary."""
    if where == "interior":
        return domain.interior_moment(alpha)
    if where == "boundary":
        return domain.boundary_moment(alpha)
    raise ValueError(f"unknown region {where!r}")


# --------------------------------------------------------------------------
# field, constraints, functional, symmetry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    m: int
    p: int
    d: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("field dimension m must be positive")
        if self.p < 0:
            raise ValueError("degree exponent p must be a natural number")
        if self.d < 0:
            raise ValueError("x-degree bound d must be a natural number")


@dataclass
class ConstraintSpec:
    """PDE constraint a(x,y,Z) = 0 and boundary condition b(x,y) = 0 or u = h."""

    a: Poly | None = None
    b: Poly | None = None
    dirichlet: PolyVec | None = None

    @property
    def is_dirichlet(self) -> bool:
        return self.dirichlet is not None


@dataclass
class FunctionalSpec:
    """f over variables (I_1..I_k, lambda_1..lambda_l), affine in lambda."""

    S: list[Exponent]
    f: Poly
    integral_names: list[str]
    lambda_names: list[str] = field(default_factory=list)
    objective: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        k, l = len(self.S), len(self.lambda_names)
        if self.f.nvars != k + l:
            raise ValueError(f"f must be a polynomial in {k} integrals and {l} parameters")
        if len(set(self.S)) != len(self.S):
            raise ValueError("integral exponents in S must be distinct")
        if self.f.degree(range(k, k + l)) > 1:
            raise ValueError("f must depend affinely on the tunable parameters")
        for e in self.f.terms:
            if sum(e[k:]) > 1:
                raise ValueError("f must depend affinely on the tunable parameters")
        if self.objective is not None and len(self.objective) != l:
            raise ValueError("objective length does not match the number of parameters")

    @property
    def k(self) -> int:
        return len(self.S)

    def split_lambda(self) -> tuple[Poly, list[Poly]]:
        """Return (f0, [f_1..f_l]) as polynomials in the k integral variables."""
        k, l = self.k, len(self.lambda_names)
        parts: list[dict] = [dict() for _ in range(l + 1)]
        for e, c in self.f.terms.items():
            lam = [i for i in range(l) if e[k + i]]
            slot = 0 if not lam else lam[0] + 1
            parts[slot][e[:k]] = c
        return Poly(parts[0], nvars=k), [Poly(t, nvars=k) for t in parts[1:]]


@dataclass
class SymmetrySpec:
    elements: list[GroupElement]

    @classmethod
    def trivial(cls, n: int, m: int) -> "SymmetrySpec":
        return cls([GroupElement.identity(n, m)])

    def nontrivial(self) -> list[GroupElement]:
        return [g for g in self.elements if not g.is_identity()]


@dataclass
class ProblemSpec:
    domain: DomainSpec
    field: FieldSpec
    constraints: ConstraintSpec
    functional: FunctionalSpec
    symmetry: SymmetrySpec
    name: str = "problem"
    params: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)

    @property
    def shape(self) -> VarShape:
        return VarShape(self.domain.n, self.field.m)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

def validate_group(sym: SymmetrySpec) -> ValidationReport:
    """Check G1-G3 (orthonormality, inverses, products) by exhaustive enumeration."""
    report = ValidationReport()
    elems = list(sym.elements)
    if not elems:
        return report.fail("G3", "group is empty")
    shapes = {g.shape for g in elems}
    if len(shapes) != 1:
        return report.fail("G1", f"elements act on different spaces {sorted(map(str, shapes))}")
    members = set(elems)
    for g in elems:
        # GroupElement construction already enforces A^T A = I and B^T B = I
        if g.inverse() @ g != GroupElement.identity(g.shape.n, g.shape.m):
            return report.fail("G1", f"{g} is not orthonormal")
    if not any(g.is_identity() for g in elems):
        return report.fail("G3", "identity element missing (closure fails)")
    for g in elems:
        if g.inverse() not in members:
            return report.fail("G2", f"inverse of {g} is missing")
    for g1, g2 in itertools.product(elems, repeat=2):
        if g1 @ g2 not in members:
            return report.fail("G3", f"product of {g1} and {g2} is missing")
    report.note(f"group of order {len(members)} verified: {len(elems) ** 2} products enumerated")
    return report


def _dirichlet_b(spec: ProblemSpec) -> list[Poly]:
    """b_j(x, y) = y_j - h_j(x) lifted to the (x, y, Z) ring."""
    shape = spec.shape
    out = []
    for j, h in enumerate(spec.constraints.dirichlet):
        lifted = Poly({e + (0,) * (shape.nvars - len(e)): c for e, c in h.terms.items()}, shape=shape)
        out.append(Poly.var(shape.y(j), shape=shape) - lifted)
    return out


def validate_invariance(spec: ProblemSpec) -> ValidationReport:
    """Check A1-A4 exactly (A1 through the sufficient condition g o A = g)."""
    report = ValidationReport()
    shape = spec.shape
    n = shape.n
    for idx, g in enumerate(spec.symmetry.elements):
        if g.is_identity():
            continue
        label = f"element #{idx + 1} {g}"
        # A1 (sufficient): g(Ax) = g(x), and the normal transforms as n(Ax) = A n(x)
        lifted_g = _lift_x(spec.domain.g, shape)
        if apply_group(lifted_g, g, "boundary") != lifted_g:
            report.fail("A1", f"{label}: domain polynomial g is not invariant")
            continue
        if isinstance(spec.domain, BoxDomain):
            if any(sum(1 for v in row if v) != 1 for row in g.A):
                report.fail("A1", f"{label}: box domains only admit signed permutations")
        if spec.domain.normal is not None:
            nl = [_lift_x(c, shape) for c in spec.domain.normal]
            moved = [apply_group(c, g, "boundary") for c in nl]
            for i in range(n):
                rot = sum((nl[k] * g.A[i][k] for k in range(n) if g.A[i][k]), Poly.zero(shape=shape))
                if moved[i] != rot:
                    report.fail("A1", f"{label}: normal does not satisfy n(Ax) = A n(x)")
                    break
        # A2
        a = spec.constraints.a
        if a is not None and apply_group(a, g, "full") != a:
            report.fail("A2", f"{label}: a o G != a")
        # A3
        bs = [spec.constraints.b] if spec.constraints.b is not None else []
        if spec.constraints.is_dirichlet:
            bs = _dirichlet_b(spec)
        for b in bs:
            if apply_group(b, g, "boundary") != b:
                report.fail("A3", f"{label}: b o H != b for b = {b}")
        # A4
        for name, s in zip(spec.functional.integral_names, spec.functional.S):
            mono = Poly.monomial(s.flat, shape=shape)
            if apply_group(mono, g, "full") != mono:
                report.fail("A4", f"{label}: monomial {name} = {mono} maps to "
                                  f"{apply_group(mono, g, 'full')}")
    if report.ok:
        report.note(f"A1-A4 hold for all {len(spec.symmetry.elements)} group elements")
    return report


def _lift_x(p: Poly, shape: VarShape) -> Poly:
    pad = shape.nvars - p.nvars
    return Poly({e + (0,) * pad: c for e, c in p.terms.items()}, shape=shape)


def validate_structure(spec: ProblemSpec) -> ValidationReport:
    """Degree bounds (P-assumptions) and the outward unit normal at boundary samples."""
    report = ValidationReport()
    fld, dom, con = spec.field, spec.domain, spec.constraints
    if fld.p <= 1:
        report.fail("P1", f"integrability exponent p = {fld.p} must exceed 1")
    if dom.g.degree() > fld.d:
        report.fail("P4", f"deg(g) = {dom.g.degree()} exceeds d = {fld.d}")
    for s in spec.functional.S:
        if s.deg_x > fld.d or s.deg_y + s.deg_z > fld.p:
            report.fail("E", f"exponent {s} outside the admissible set for d={fld.d}, p={fld.p}")
    if con.a is not None:
        if con.a.deg_yz() > fld.p:
            report.fail("P2", f"deg_(y,Z)(a) = {con.a.deg_yz()} exceeds p = {fld.p}")
        if con.a.deg_x() > fld.d:
            report.fail("P2", f"deg_x(a) = {con.a.deg_x()} exceeds d = {fld.d}")
    if con.b is not None:
        if con.b.deg_y() > fld.p:
            report.fail("P2", f"deg_y(b) = {con.b.deg_y()} exceeds p = {fld.p}")
        if any(con.b.depends_on(i) for i in range(spec.shape.n + spec.shape.m, spec.shape.nvars)):
            report.fail("P2", "boundary condition b depends on Z")
    if con.is_dirichlet and len(con.dirichlet) != fld.m:
        report.fail("P2", f"Dirichlet data has {len(con.dirichlet)} components, expected m = {fld.m}")
    if dom.normal is None:
        if not con.is_dirichlet:
            report.fail("P5", f"{dom.kind} domains have no polynomial normal; use Dirichlet data")
    else:
        grad = [dom.g.differentiate(i) for i in range(dom.n)]
        for pt in dom.boundary_samples():
            if dom.g.evaluate(pt) != 0:
                report.fail("P4", f"boundary sample {pt} does not satisfy g = 0")
                continue
            nv = [c.evaluate(pt) for c in dom.normal]
            gv = [c.evaluate(pt) for c in grad]
            if sum(v * v for v in nv) != 1:
                report.fail("P5", f"|n|^2 != 1 at boundary sample {pt}")
            # outward normal is a negative multiple of grad g for Omega = {g > 0}
            cross = any(nv[i] * gv[j] != nv[j] * gv[i] for i in range(dom.n) for j in range(i))
            if cross or sum(a * b for a, b in zip(nv, gv)) >= 0:
                report.fail("P5", f"normal at {pt} is not the outward direction -grad g/|grad g|")
    if report.ok:
        report.note("degree bounds and boundary normal checks passed")
    return report

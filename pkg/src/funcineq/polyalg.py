"""Exact sparse multivariate polynomials over the variable groups x, y, Z.

A polynomial lives in a ring with ``nvars`` variables.  Rings built from a
:class:`VarShape` ``(n, m)`` carry the layout ``x1..xn, y1..ym, Z11..Zmn``
(Z row-major), which is what the occupation-measure machinery works with.
Rings without a shape are plain (e.g. polynomials over moment variables).

All coefficients are :class:`fractions.Fraction`; nothing here touches
floating point except :meth:`Poly.evaluate_float`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

Rational = Fraction | int

__all__ = [
    "VarShape",
    "Exponent",
    "Poly",
    "PolyVec",
    "GroupElement",
    "ShapeError",
    "PolySyntaxError",
    "grlex_key",
    "total_divergence",
    "apply_group",
    "transform_field",
    "differentiate",
    "poly_arith",
    "parse_poly",
    "xyz_resolver",
]


class ShapeError(ValueError):
    """Raised when polynomials from incompatible rings are combined."""


class PolySyntaxError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message if position is None else f"{message} (at column {position + 1})")


def grlex_key(exp: Sequence[int]) -> tuple:
    """Sort key for graded lexicographic order with the first variable smallest."""
    return (sum(exp), tuple(reversed(exp)))


@dataclass(frozen=True)
class VarShape:
    """Layout of the (x, y, Z) variable groups: x in R^n, y in R^m, Z in R^{m x n}."""

    n: int
    m: int

    @property
    def nvars(self) -> int:
        return self.n + self.m + self.m * self.n

    def x(self, i: int) -> int:
        return i

    def y(self, j: int) -> int:
        return self.n + j

    def z(self, j: int, i: int) -> int:
        return self.n + self.m + j * self.n + i

    def group(self, index: int) -> str:
        if index < self.n:
            return "x"
        if index < self.n + self.m:
            return "y"
        return "Z"

    def names(self) -> list[str]:
        sep = "_" if max(self.n, self.m) > 9 else ""
        out = [f"x{i + 1}" for i in range(self.n)]
        out += [f"y{j + 1}" for j in range(self.m)]
        out += [f"Z{j + 1}{sep}{i + 1}" for j in range(self.m) for i in range(self.n)]
        return out

    def split(self, flat: Sequence[int]) -> "Exponent":
        n, m = self.n, self.m
        gamma = tuple(tuple(flat[n + m + j * n: n + m + (j + 1) * n]) for j in range(m))
        return Exponent(tuple(flat[:n]), tuple(flat[n:n + m]), gamma)


@dataclass(frozen=True)
class Exponent:
    """Multi-index (alpha, beta, gamma) of the monomial x^alpha y^beta Z^gamma."""

    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    gamma: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if any(e < 0 for e in self.flat):
            raise ValueError(f"negative exponent in {self}")

    @property
    def shape(self) -> VarShape:
        return VarShape(len(self.alpha), len(self.beta))

    @property
    def flat(self) -> tuple[int, ...]:
        gamma = self.gamma or tuple(() for _ in self.beta)
        n = len(self.alpha)
        rows = [tuple(r) if r else (0,) * n for r in gamma]
        return tuple(self.alpha) + tuple(self.beta) + tuple(e for r in rows for e in r)

    @property
    def deg_x(self) -> int:
        return sum(self.alpha)

    @property
    def deg_y(self) -> int:
        return sum(self.beta)

    @property
    def deg_z(self) -> int:
        return sum(sum(r) for r in self.gamma)

    def monomial(self) -> "Poly":
        return Poly.monomial(self.flat, shape=self.shape)

    def __str__(self) -> str:
        g = ",".join("".join(map(str, r)) for r in self.gamma)
        return f"({''.join(map(str, self.alpha))};{''.join(map(str, self.beta))};{g})"


def _add_exp(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(i + j for i, j in zip(a, b))


class Poly:
    """Sparse polynomial with exact rational coefficients.

    ``terms`` maps exponent tuples (length ``nvars``) to nonzero Fractions.
    Instances are treated as immutable.
    """

    __slots__ = ("terms", "nvars", "shape", "_hash")

    def __init__(self, terms: Mapping[tuple[int, ...], Rational] | None = None,
                 nvars: int | None = None, shape: VarShape | None = None):
        if shape is not None:
            if nvars is not None and nvars != shape.nvars:
                raise ShapeError(f"nvars={nvars} does not match shape {shape}")
            nvars = shape.nvars
        if nvars is None:
            raise ShapeError("either nvars or shape is required")
        clean: dict[tuple[int, ...], Fraction] = {}
        for exp, c in (terms or {}).items():
            if len(exp) != nvars:
                raise ShapeError(f"exponent {exp} has length {len(exp)}, expected {nvars}")
            if c:
                clean[tuple(exp)] = c if isinstance(c, Fraction) else Fraction(c)
        self.terms = clean
        self.nvars = nvars
        self.shape = shape
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict, nvars: int, shape: VarShape | None) -> "Poly":
        p = cls.__new__(cls)
        p.terms = terms
        p.nvars = nvars
        p.shape = shape
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int | None = None, shape: VarShape | None = None) -> "Poly":
        return cls({}, nvars, shape)

    @classmethod
    def const(cls, c: Rational, nvars: int | None = None, shape: VarShape | None = None) -> "Poly":
        n = shape.nvars if shape is not None else nvars
        return cls({(0,) * n: c}, nvars, shape)

    @classmethod
    def var(cls, index: int, nvars: int | None = None, shape: VarShape | None = None) -> "Poly":
        n = shape.nvars if shape is not None else nvars
        if not 0 <= index < n:
            raise IndexError(f"variable index {index} out of range for {n} variables")
        exp = [0] * n
        exp[index] = 1
        return cls({tuple(exp): 1}, nvars, shape)

    @classmethod
    def monomial(cls, exp: Sequence[int], coef: Rational = 1, shape: VarShape | None = None) -> "Poly":
        return cls({tuple(exp): coef}, len(exp) if shape is None else None, shape)

    def _like(self, terms: dict) -> "Poly":
        return Poly._raw(terms, self.nvars, self.shape)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars or (
                    self.shape is not None and other.shape is not None and self.shape != other.shape):
                raise ShapeError(f"incompatible rings: {self.nvars} vs {other.nvars} variables")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other, self.nvars, None)._with_shape(self.shape)
        return NotImplemented

    def _with_shape(self, shape):
        return Poly._raw(self.terms, self.nvars, shape)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(out, self.nvars, self.shape or other.shape)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return self._like({})
            return self._like({e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exp(e1, e2)
                out[e] = out.get(e, 0) + c1 * c2
        return Poly._raw({e: c for e, c in out.items() if c}, self.nvars, self.shape or other.shape)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a natural number")
        result = Poly.const(1, self.nvars)._with_shape(self.shape)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # comparison -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other, self.nvars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def coeff(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def sorted_terms(self, descending: bool = True) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=descending)

    def degree(self, indices: Iterable[int] | None = None) -> int:
        """Total degree, or the degree in the given subset of variables (-1 for zero)."""
        if not self.terms:
            return -1
        if indices is None:
            return max(sum(e) for e in self.terms)
        idx = list(indices)
        return max(sum(e[i] for i in idx) for e in self.terms)

    def _group_indices(self, groups: str) -> list[int]:
        if self.shape is None:
            raise ShapeError("group degrees need a VarShape ring")
        return [i for i in range(self.nvars) if self.shape.group(i) in groups]

    def deg_x(self) -> int:
        return self.degree(self._group_indices("x"))

    def deg_y(self) -> int:
        return self.degree(self._group_indices("y"))

    def deg_yz(self) -> int:
        return self.degree(self._group_indices("yZ"))

    def depends_on(self, index: int) -> bool:
        return any(e[index] for e in self.terms)

    def variables(self) -> list[int]:
        return [i for i in range(self.nvars) if self.depends_on(i)]

    # calculus and substitution --------------------------------------------
    def differentiate(self, index: int) -> "Poly":
        if not 0 <= index < self.nvars:
            raise IndexError(f"variable index {index} out of range")
        out = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                d = list(e)
                d[index] = k - 1
                out[tuple(d)] = c * k
        return self._like(out)

    def evaluate(self, point: Sequence) -> Fraction:
        """Exact evaluation at a point of rationals (or any numeric type)."""
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(point, e):
                if k:
                    t = t * v ** k
            total += t
        return total

    def evaluate_float(self, point: Sequence[float]) -> float:
        return float(sum(float(c) * _fprod(point, e) for e, c in self.terms.items()))

    def compose(self, images: Sequence["Poly"]) -> "Poly":
        """Substitute variable i by ``images[i]`` (all images share one ring)."""
        if len(images) != self.nvars:
            raise ShapeError(f"need {self.nvars} images, got {len(images)}")
        target = images[0] if images else None
        if target is None:
            return self
        powers: dict[tuple[int, int], Poly] = {}

        def pw(i: int, k: int) -> Poly:
            key = (i, k)
            if key not in powers:
                powers[key] = images[i] if k == 1 else pw(i, k - 1) * images[i]
            return powers[key]

        out = Poly.zero(target.nvars)._with_shape(target.shape)
        for e, c in self.terms.items():
            t = Poly.const(c, target.nvars)._with_shape(target.shape)
            for i, k in enumerate(e):
                if k:
                    t = t * pw(i, k)
            out = out + t
        return out

    def map_coefficients(self, fn: Callable[[Fraction], Rational]) -> "Poly":
        return self._like({e: Fraction(fn(c)) for e, c in self.terms.items() if fn(c)})

    # printing -------------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = self.shape.names() if self.shape is not None else [f"v{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = abs(c)
            if factors:
                body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
            else:
                body = str(mag)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        s = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.to_str()!r}, nvars={self.nvars})"


def _fprod(point, e) -> float:
    t = 1.0
    for v, k in zip(point, e):
        if k:
            t *= v ** k
    return t


def poly_arith(op: str, p: Poly, q: Poly | int) -> Poly:
    """Functional front end for ``add``, ``mul`` and ``pow``."""
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "pow":
        return p ** q
    raise ValueError(f"unknown operation {op!r}")


def differentiate(p: Poly, var: int) -> Poly:
    return p.differentiate(var)


@dataclass(frozen=True)
class PolyVec:
    entries: tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.entries:
            nv = self.entries[0].nvars
            if any(e.nvars != nv for e in self.entries):
                raise ShapeError("PolyVec entries must share a ring")

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> Poly:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def dot(self, other: "PolyVec") -> Poly:
        if len(self) != len(other):
            raise ShapeError("length mismatch in dot product")
        out = self.entries[0] * 0
        for a, b in zip(self, other):
            out = out + a * b
        return out


# --------------------------------------------------------------------------
# orthonormal group elements
# --------------------------------------------------------------------------

Matrix = tuple[tuple[Fraction, ...], ...]


def _as_matrix(rows) -> Matrix:
    return tuple(tuple(Fraction(v) for v in r) for r in rows)


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
                 for i in range(len(a)))


def _transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else a


def _identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class GroupElement:
    """Pair (A, B) of rational orthonormal matrices acting by (Ax, By, B Z A^T)."""

    A: Matrix
    B: Matrix

    def __post_init__(self):
        for label in ("A", "B"):
            raw = getattr(self, label)
            try:
                mat = _as_matrix(raw)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{label} must have rational entries; irrational orthonormal "
                                 f"matrices are not supported") from exc
            if any(len(r) != len(mat) for r in mat):
                raise ValueError(f"{label} must be square")
            if _matmul(_transpose(mat), mat) != _identity(len(mat)):
                raise ValueError(f"{label} is not orthonormal: {label}^T {label} != I")
            object.__setattr__(self, label, mat)

    @classmethod
    def identity(cls, n: int, m: int) -> "GroupElement":
        return cls(_identity(n), _identity(m))

    @property
    def shape(self) -> VarShape:
        return VarShape(len(self.A), len(self.B))

    def is_identity(self) -> bool:
        return self.A == _identity(len(self.A)) and self.B == _identity(len(self.B))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(_matmul(self.A, other.A), _matmul(self.B, other.B))

    def inverse(self) -> "GroupElement":
        return GroupElement(_transpose(self.A), _transpose(self.B))

    def __str__(self) -> str:
        fmt = lambda M: "[" + "; ".join(" ".join(str(v) for v in r) for r in M) + "]"
        return f"(A={fmt(self.A)}, B={fmt(self.B)})"


def _linear_images(shape: VarShape, g: GroupElement, with_z: bool) -> list[Poly]:
    n, m = shape.n, shape.m
    X = [Poly.var(shape.x(i), shape=shape) for i in range(n)]
    Y = [Poly.var(shape.y(j), shape=shape) for j in range(m)]
    zero = Poly.zero(shape=shape)
    images = []
    for i in range(n):
        images.append(sum((X[k] * g.A[i][k] for k in range(n) if g.A[i][k]), zero))
    for j in range(m):
        images.append(sum((Y[k] * g.B[j][k] for k in range(m) if g.B[j][k]), zero))
    for j in range(m):
        for i in range(n):
            if not with_z:
                images.append(zero)
                continue
            # (B Z A^T)_{ji} = sum_{k,l} B_jk Z_kl A_il
            acc = zero
            for k in range(m):
                if not g.B[j][k]:
                    continue
                for l in range(n):
                    if g.A[i][l]:
                        acc = acc + Poly.var(shape.z(k, l), shape=shape) * (g.B[j][k] * g.A[i][l])
            images.append(acc)
    return images


def apply_group(p: Poly, g: GroupElement, space: str = "full") -> Poly:
    """Return p o G_{A,B} (``space='full'``) or p o H_{A,B} (``space='boundary'``)."""
    shape = p.shape
    if shape is None:
        raise ShapeError("apply_group needs a polynomial over (x, y, Z)")
    if g.shape != shape:
        raise ShapeError(f"group element acts on {g.shape}, polynomial lives on {shape}")
    if space == "boundary":
        z_idx = range(shape.n + shape.m, shape.nvars)
        if any(p.depends_on(i) for i in z_idx):
            raise ValueError("boundary action applied to a polynomial that depends on Z")
    elif space != "full":
        raise ValueError(f"unknown space {space!r}")
    return p.compose(_linear_images(shape, g, with_z=space == "full"))


def total_divergence(phi: PolyVec) -> Poly:
    """Sum_i [d phi_i/d x_i + sum_j Z_ji d phi_i / d y_j]."""
    if not len(phi):
        raise ShapeError("empty field")
    shape = phi[0].shape
    if shape is None or len(phi) != shape.n:
        raise ShapeError("phi must have n entries over an (x, y, Z) ring")
    z_idx = range(shape.n + shape.m, shape.nvars)
    out = Poly.zero(shape=shape)
    for i, comp in enumerate(phi):
        if any(comp.depends_on(k) for k in z_idx):
            raise ValueError(f"entry {i + 1} of phi depends on Z")
        out = out + comp.differentiate(shape.x(i))
        for j in range(shape.m):
            dy = comp.differentiate(shape.y(j))
            if dy:
                out = out + dy * Poly.var(shape.z(j, i), shape=shape)
    return out


def transform_field(phi: PolyVec, g: GroupElement) -> PolyVec:
    """phi_{A,B}(x, y) = A^T phi(Ax, By)."""
    moved = [apply_group(c, g, "boundary") for c in phi]
    n = len(phi)
    zero = phi[0] * 0
    return PolyVec(tuple(sum((moved[k] * g.A[k][i] for k in range(n) if g.A[k][i]), zero)
                         for i in range(n)))


# --------------------------------------------------------------------------
# literal parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise PolySyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        num, name, op = mt.groups()
        start = mt.start(mt.lastindex)
        if num is not None:
            tokens.append(("num", Fraction(num), start))
        elif name is not None:
            tokens.append(("name", name, start))
        else:
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = mt.end()
    tokens.append(("end", None, len(text)))
    return tokens


def parse_poly(text: str, resolve: Callable[[str], Poly] | Mapping[str, Poly], zero: Poly,
               params: Mapping[str, int] | None = None) -> Poly:
    """Parse a polynomial literal such as ``3/2*x1^2*y1*Z11 - 1``.

    ``resolve`` maps variable names to polynomials (a dict, or a callable that
    raises KeyError for unknown names); ``zero`` fixes the target ring.
    Exponents may be integers or names from ``params``.
    """
    params = dict(params or {})
    lookup = resolve.__getitem__ if isinstance(resolve, Mapping) else resolve
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos]

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def is_op(chars):
        kind, val, _ = peek()
        return kind == "op" and val in chars

    def expr() -> Poly:
        negate = False
        if is_op("+-"):
            negate = take()[1] == "-"
        acc = term()
        if negate:
            acc = -acc
        while is_op("+-"):
            op = take()[1]
            rhs = term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term() -> Poly:
        acc = power()
        while is_op("*/"):
            op, at = take()[1], tokens[pos - 1][2]
            rhs = power()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant():
                    raise PolySyntaxError("division by a non-constant", at)
                if not rhs:
                    raise PolySyntaxError("division by zero", at)
                acc = acc * (1 / rhs.constant_term())
        return acc

    def power() -> Poly:
        base = atom()
        if is_op("^"):
            take()
            kind, val, at = take()
            if kind == "num" and val.denominator == 1:
                k = int(val)
            elif kind == "name" and val in params:
                k = int(params[val])
            else:
                raise PolySyntaxError("exponent must be a natural number or parameter", at)
            if k < 0:
                raise PolySyntaxError("negative exponent", at)
            base = base ** k
        return base

    def atom() -> Poly:
        kind, val, at = take()
        if kind == "num":
            return zero + val
        if kind == "name":
            if val in params:
                return zero + Fraction(params[val])
            try:
                return lookup(val)
            except KeyError:
                raise PolySyntaxError(f"unknown variable {val!r}", at) from None
        if kind == "op" and val == "(":
            inner = expr()
            if take()[1] != ")":
                raise PolySyntaxError("missing ')'", at)
            return inner
        if kind == "op" and val == "-":
            return -power()
        raise PolySyntaxError(f"unexpected token {val!r}" if val else "unexpected end of input", at)

    result = expr()
    if peek()[0] != "end":
        raise PolySyntaxError(f"unexpected token {peek()[1]!r}", peek()[2])
    return result


def xyz_resolver(shape: VarShape) -> Callable[[str], Poly]:
    """Name resolver for ``x1.., y1.., Zji`` (or ``Zj_i``) in the ring of ``shape``."""
    table = {name: Poly.var(i, shape=shape) for i, name in enumerate(shape.names())}
    for j in range(shape.m):
        for i in range(shape.n):
            table.setdefault(f"Z{j + 1}_{i + 1}", Poly.var(shape.z(j, i), shape=shape))
            table.setdefault(f"Z{j + 1}{i + 1}", Poly.var(shape.z(j, i), shape=shape))
    if shape.n == 1:
        table.setdefault("x", table["x1"])
    if shape.m == 1:
        table.setdefault("y", table["y1"])
        if shape.n == 1:
            table.setdefault("Z", table["Z11"])
    return table.__getitem__

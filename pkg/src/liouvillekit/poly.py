"""Exact univariate and bivariate polynomials over the rationals.

Text grammar (shared by both types, parsed with :mod:`ast`)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*        # '/' only by a constant
    factor := ('+' | '-') factor | atom ('^' | '**') INT | atom
    atom   := INT | VAR | '(' expr ')'

Univariate input uses the variable ``z``; bivariate input uses ``x``/``y``
(either case).  Rationals are written as quotients, e.g. ``1/2*z``.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParseError
from .reals import Interval, to_q

Monomial = tuple[int, int]


class PolyQ:
    """Polynomial in z with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [to_q(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def monomial(cls, d: int, c=1) -> PolyQ:
        return cls([0] * d + [c])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def coeff(self, d: int) -> Fraction:
        return self.coeffs[d] if 0 <= d < len(self.coeffs) else Fraction(0)

    @property
    def constant_term(self) -> Fraction:
        return self.coeff(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PolyQ([other])
        return isinstance(other, PolyQ) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if not isinstance(other, PolyQ):
            other = PolyQ([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyQ(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return PolyQ(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PolyQ) else PolyQ([-to_q(other)]))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolyQ):
            c = to_q(other)
            return PolyQ(c * a for a in self.coeffs)
        if self.is_zero() or other.is_zero():
            return PolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = PolyQ([1])
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, v):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def derivative(self) -> PolyQ:
        return PolyQ(i * c for i, c in enumerate(self.coeffs) if i)

    def __str__(self):
        return _format({(i, 0): c for i, c in enumerate(self.coeffs) if c}, ("z", "y"))

    def __repr__(self):
        return f"PolyQ({str(self)!r})"

    @classmethod
    def parse(cls, text: str, var: str = "z") -> PolyQ:
        terms = _parse(text, {var: 0})
        return cls.from_terms(terms)

    @classmethod
    def from_terms(cls, terms: Mapping[Monomial, Fraction]) -> PolyQ:
        if any(j for (_, j) in terms):
            raise ParseError("second variable in a univariate polynomial")
        deg = max((i for (i, _) in terms), default=-1)
        return cls(terms.get((i, 0), 0) for i in range(deg + 1))


class BivarPolyQ:
    """Sparse polynomial in X, Y: {(i, j): coefficient of X^i Y^j}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        self.terms: dict[Monomial, Fraction] = {}
        for (i, j), c in (terms or {}).items():
            c = to_q(c)
            if c:
                self.terms[(int(i), int(j))] = c

    X: BivarPolyQ
    Y: BivarPolyQ

    @classmethod
    def const(cls, c) -> BivarPolyQ:
        return cls({(0, 0): c})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self.terms)

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivarPolyQ.const(other)
        return isinstance(other, BivarPolyQ) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def _lift(self, other) -> BivarPolyQ:
        return other if isinstance(other, BivarPolyQ) else BivarPolyQ.const(other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return BivarPolyQ(out)

    __radd__ = __add__

    def __neg__(self):
        return BivarPolyQ({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        out: dict[Monomial, Fraction] = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                m = (i1 + i2, j1 + j2)
                out[m] = out.get(m, 0) + a * b
        return BivarPolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = BivarPolyQ.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __call__(self, x, y):
        """Evaluate at numbers, Intervals or ExactReals (grouped by powers of y)."""
        rows: dict[int, dict[int, Fraction]] = {}
        for (i, j), c in self.terms.items():
            rows.setdefault(j, {})[i] = c
        acc = 0
        for j in range(max(rows, default=0), -1, -1):
            row = rows.get(j, {})
            inner = 0
            for i in range(max(row, default=0), -1, -1):
                inner = inner * x + row.get(i, 0)
            acc = acc * y + inner
        return acc

    def eval_interval(self, x: Interval, y: Interval) -> Interval:
        total = Interval.point(0)
        for (i, j), c in self.terms.items():
            total = total + (x ** i) * (y ** j) * c
        return total

    def partial(self, var: int) -> BivarPolyQ:
        out = {}
        for (i, j), c in self.terms.items():
            k = (i, j)[var]
            if k:
                out[(i - 1, j) if var == 0 else (i, j - 1)] = c * k
        return BivarPolyQ(out)

    def __str__(self):
        return _format(self.terms, ("X", "Y"))

    def __repr__(self):
        return f"BivarPolyQ({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> BivarPolyQ:
        return cls(_parse(text, {"x": 0, "X": 0, "y": 1, "Y": 1}))


BivarPolyQ.X = BivarPolyQ({(1, 0): 1})
BivarPolyQ.Y = BivarPolyQ({(0, 1): 1})


def _format(terms: Mapping[Monomial, Fraction], names: tuple[str, str]) -> str:
    if not terms:
        return "0"
    parts = []
    for (i, j) in sorted(terms, key=lambda m: (-(m[0] + m[1]), -m[0])):
        c = terms[(i, j)]
        vars_ = [f"{n}^{e}" if e > 1 else n for n, e in zip(names, (i, j)) if e]
        mag = abs(c)
        if vars_:
            body = "*".join(([str(mag)] if mag != 1 else []) + vars_)
        else:
            body = str(mag)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    head_sign, head = parts[0]
    out = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _parse(text: str, names: Mapping[str, int]) -> dict[Monomial, Fraction]:
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse polynomial {text!r}: {exc.msg}") from None
    return _walk(tree.body, names, text).terms


def _walk(node, names, text) -> BivarPolyQ:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return BivarPolyQ.const(node.value)
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ParseError(f"unknown variable {node.id!r} in {text!r}")
        return BivarPolyQ.X if names[node.id] == 0 else BivarPolyQ.Y
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _walk(node.operand, names, text)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left = _walk(node.left, names, text)
        right = _walk(node.right, names, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right.is_constant() or right.is_zero():
                raise ParseError(f"division by a non-constant or zero in {text!r}")
            return left * (1 / right.terms[(0, 0)])
        if isinstance(node.op, ast.Pow):
            if not right.is_constant():
                raise ParseError(f"non-constant exponent in {text!r}")
            e = right.terms.get((0, 0), Fraction(0))
            if e.denominator != 1 or e < 0:
                raise ParseError(f"exponent must be a nonnegative integer in {text!r}")
            return left ** int(e)
    raise ParseError(f"unsupported syntax in polynomial {text!r}")

"""Certified real arithmetic on nested rational intervals.

An :class:`ExactReal` is a process ``k -> Interval`` whose answers are nested
and have width at most ``2**-k``.  Values are immutable; the per-object
refinement cache is guarded by a re-entrant lock, so an ExactReal may be
shared between threads and queried concurrently.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Union

from .errors import (
    AmbiguousNearestInteger,
    DivisorNotSeparatedFromZero,
    DomainError,
    NotSeparatedFromZero,
    RefinementBudgetExceeded,
)

Rational = Fraction
Number = Union[int, Fraction]

#: default precision budget for zero-separation searches
SEPARATION_BUDGET = 256


def to_q(v: Any) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"cannot convert {type(v).__name__} to an exact rational")


def _floor_div(a: Fraction, scale: int) -> int:
    return (a.numerator * scale) // a.denominator


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("iroot of a negative integer")
    if k < 1:
        raise ValueError("root index must be positive")
    if n < 2 or k == 1:
        return n
    # initial guess above the root, then Newton from above
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def is_perfect_power(n: int, k: int) -> bool:
    """True iff n == m**k for some integer m (negative n allowed for odd k)."""
    if k == 1:
        return True
    if n < 0:
        return k % 2 == 1 and is_perfect_power(-n, k)
    return iroot(n, k) ** k == n


@dataclass(frozen=True)
class Interval:
    """Closed interval with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", to_q(self.lo))
        object.__setattr__(self, "hi", to_q(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: Number) -> Interval:
        v = to_q(v)
        return cls(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def magnitude(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def mignitude(self) -> Fraction:
        """Smallest absolute value over the interval."""
        if self.lo <= 0 <= self.hi:
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    def contains(self, v: Number) -> bool:
        return self.lo <= v <= self.hi

    def contains_interval(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def intersect(self, other: Interval) -> Interval:
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def round_out(self, bits: int) -> Interval:
        """Widen outward to the dyadic grid of spacing 2**-bits."""
        if self.is_point and self.lo.denominator == 1:
            return self
        scale = 1 << bits
        lo = Fraction(_floor_div(self.lo, scale), scale)
        hi = Fraction(-_floor_div(-self.hi, scale), scale)
        return Interval(lo, hi)

    def __add__(self, other: Interval | Number) -> Interval:
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: Interval | Number) -> Interval:
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other: Number) -> Interval:
        return Interval.point(other) - self

    def __mul__(self, other: Interval | Number) -> Interval:
        if not isinstance(other, Interval):
            other = to_q(other)
            if other >= 0:
                return Interval(self.lo * other, self.hi * other)
            return Interval(self.hi * other, self.lo * other)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> Interval:
        if not self.excludes_zero():
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other: Interval | Number) -> Interval:
        if not isinstance(other, Interval):
            other = Interval.point(other)
        return self * other.reciprocal()

    def __pow__(self, n: int) -> Interval:
        if n < 0:
            return (self ** (-n)).reciprocal()
        if n == 0:
            return Interval.point(1)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 1:
            return Interval(a, b)
        if self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(0, max(a, b))

    def abs(self) -> Interval:
        return Interval(self.mignitude(), self.magnitude())

    def __repr__(self) -> str:
        return f"Interval({self.lo}, {self.hi})"


@dataclass(frozen=True)
class Recipe:
    """Provenance data from which a value can be recomputed.

    ``params`` holds strings, integers, Fractions and parent recipes as
    nested dicts; the certificate writer turns numbers into decimal strings.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}


def _rational_recipe(v: Fraction) -> Recipe:
    return Recipe("derived-arith", {"op": "const", "value": v})


class ExactReal:
    """A real number given by nested rational enclosures.

    ``approx(k)`` must return an interval containing the value with width at
    most ``2**-(k+2)``; :meth:`refine` adds nesting, outward dyadic rounding
    and memoization on top of it.
    """

    def __init__(
        self,
        approx: Callable[[int], Interval],
        recipe: Recipe | None = None,
        exact: Fraction | None = None,
        source: Any = None,
    ):
        self._approx = approx
        self.recipe = recipe
        self.exact = exact
        # construction object offering ``witness(n) -> (p, q) | None``
        self.source = source
        self._cache: dict[int, Interval] = {}
        self._lock = threading.RLock()

    @classmethod
    def rational(cls, v: Number) -> ExactReal:
        v = to_q(v)
        iv = Interval.point(v)
        return cls(lambda k: iv, recipe=_rational_recipe(v), exact=v)

    def refine(self, k: int) -> Interval:
        if k < 0:
            raise ValueError("precision index must be nonnegative")
        with self._lock:
            hit = self._cache.get(k)
            if hit is not None:
                return hit
            r = self._approx(k)
            if not r.is_point:
                r = r.round_out(k + 4)
            below = [j for j in self._cache if j < k]
            above = [j for j in self._cache if j > k]
            if below:
                r = r.intersect(self._cache[max(below)])
            if above:
                r = r.hull(self._cache[min(above)])
            if r.width > Fraction(1, 1 << k):
                raise AssertionError(f"refine({k}) produced width {float(r.width)}")
            self._cache[k] = r
            return r

    # -- conveniences -------------------------------------------------

    def separation(self, budget: int = SEPARATION_BUDGET) -> int | None:
        """Smallest tried precision at which the enclosure excludes zero."""
        if self.exact is not None:
            return None if self.exact == 0 else 0
        j = 0
        while j <= budget:
            if self.refine(j).excludes_zero():
                return j
            j = 2 * j + 1 if j else 1
        return None

    def sign(self, budget: int = SEPARATION_BUDGET) -> int:
        if self.exact is not None:
            return (self.exact > 0) - (self.exact < 0)
        j = self.separation(budget)
        if j is None:
            raise NotSeparatedFromZero("sign undecided within budget")
        return 1 if self.refine(j).lo > 0 else -1

    def __float__(self) -> float:
        return float(self.refine(60).mid)

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"ExactReal({self.exact})"
        kind = self.recipe.kind if self.recipe else "anonymous"
        return f"ExactReal<{kind}>~{float(self):.15g}"

    def __add__(self, other):
        return field_op("add", self, other)

    def __radd__(self, other):
        return field_op("add", other, self)

    def __sub__(self, other):
        return field_op("sub", self, other)

    def __rsub__(self, other):
        return field_op("sub", other, self)

    def __mul__(self, other):
        return field_op("mul", self, other)

    def __rmul__(self, other):
        return field_op("mul", other, self)

    def __truediv__(self, other):
        return field_op("div", self, other)

    def __rtruediv__(self, other):
        return field_op("div", other, self)

    def __neg__(self):
        return negate(self)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return elem_eval("pow_rational", self, to_q(n))
        if n < 0:
            return 1 / (self ** (-n))
        result = as_real(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


RealLike = Union[ExactReal, int, Fraction]


def as_real(v: RealLike) -> ExactReal:
    if isinstance(v, ExactReal):
        return v
    return ExactReal.rational(to_q(v))


def _recipe_of(x: ExactReal) -> dict | None:
    return x.recipe.to_json() if x.recipe is not None else None


def _adaptive(k: int, build: Callable[[int], Interval], start: int, limit: int = 1 << 20) -> Interval:
    """Evaluate ``build(j)`` at growing j until the width is at most 2**-(k+2)."""
    target = Fraction(1, 1 << (k + 2))
    j = max(start, 0)
    while j <= limit:
        iv = build(j)
        if iv.width <= target:
            return iv
        ratio = iv.width / target
        j += max(4, (ratio.numerator // ratio.denominator).bit_length() + 2)
    raise RefinementBudgetExceeded(f"no convergence at precision {k}")


def _bits(v: Fraction) -> int:
    """Bit length of ceil(|v|)."""
    v = abs(v)
    return (-(-v.numerator // v.denominator)).bit_length()


def negate(x: RealLike) -> ExactReal:
    x = as_real(x)
    if x.exact is not None:
        return ExactReal.rational(-x.exact)
    return ExactReal(lambda k: -x.refine(k + 2),
                     Recipe("derived-arith", {"op": "neg", "args": [_recipe_of(x)]}))


def field_op(op: str, x: RealLike, y: RealLike, budget: int = SEPARATION_BUDGET) -> ExactReal:
    """Certified add/sub/mul/div of two reals."""
    x, y = as_real(x), as_real(y)
    recipe = Recipe("derived-arith", {"op": op, "args": [_recipe_of(x), _recipe_of(y)]})
    if op == "div" and y.exact == 0:
        raise DivisorNotSeparatedFromZero("division by exact zero")
    if x.exact is not None and y.exact is not None:
        a, b = x.exact, y.exact
        value = {"add": lambda: a + b, "sub": lambda: a - b,
                 "mul": lambda: a * b, "div": lambda: a / b}[op]()
        iv = Interval.point(value)
        return ExactReal(lambda k: iv, recipe=recipe, exact=value)

    if op in ("add", "sub"):
        sgn = 1 if op == "add" else -1

        def approx(k):
            return _adaptive(k, lambda j: x.refine(j) + sgn * y.refine(j), k + 3)

        return ExactReal(approx, recipe)

    if op == "mul":
        mag = x.refine(0).magnitude() + y.refine(0).magnitude() + 1

        def approx(k):
            return _adaptive(k, lambda j: x.refine(j) * y.refine(j), k + 3 + _bits(mag))

        return ExactReal(approx, recipe)

    if op == "div":
        j0 = y.separation(budget)
        if j0 is None:
            raise DivisorNotSeparatedFromZero(f"divisor not separated from zero at precision {budget}")
        m = y.refine(j0).mignitude()
        lift = _bits(x.refine(0).magnitude() / m / m + 1 / m)

        def approx(k):
            return _adaptive(k, lambda j: x.refine(j) / y.refine(max(j, j0)), k + 3 + lift)

        return ExactReal(approx, recipe)

    raise ValueError(f"unknown field operation {op!r}")


# -- elementary functions on rationals --------------------------------

def exp_enclosure(a: Fraction, bits: int) -> Interval:
    """Interval of width about 2**-bits (relative to e**a) containing exp(a).

    Fixed-point integers at scale 2**work with directed rounding: halve a
    until it is below 1, sum the Taylor series (every omitted tail is at
    most twice its first term), then square back up.  Negative arguments go
    through exp(-a) and a reciprocal.
    """
    a = to_q(a)
    if a == 0:
        return Interval.point(1)
    if a < 0:
        return exp_enclosure(-a, bits + 2).reciprocal()
    s = _bits(a)
    work = bits + 2 * s + _bits(a) + 16
    one = 1 << work
    num, den = a.numerator, a.denominator << s
    lo = hi = one
    t_lo = t_hi = one
    j = 0
    while t_hi > 1:
        j += 1
        t_lo = t_lo * num // (den * j)
        t_hi = -(-t_hi * num // (den * j))
        lo += t_lo
        hi += t_hi
    hi += 2 * t_hi
    for _ in range(s):
        lo = lo * lo >> work
        hi = -(-hi * hi >> work)
    return Interval(Fraction(lo, one), Fraction(hi, one))


def root_enclosure(a: Fraction, q: int, bits: int) -> Interval:
    """Interval of width 2**-bits containing the real q-th root of a."""
    if a < 0:
        if q % 2 == 0:
            raise DomainError("even root of a negative number")
        return -root_enclosure(-a, q, bits)
    scale = 1 << bits
    r = iroot(_floor_div(a, scale ** q), q)
    return Interval(Fraction(r, scale), Fraction(r + 1, scale))


def _exact_root(v: Fraction, q: int) -> Fraction | None:
    if v < 0 and q % 2 == 0:
        return None
    sgn = -1 if v < 0 else 1
    n, d = abs(v.numerator), v.denominator
    rn, rd = iroot(n, q), iroot(d, q)
    if rn ** q == n and rd ** q == d:
        return sgn * Fraction(rn, rd)
    return None


def _nonneg_precision(x: ExactReal, budget: int, what: str) -> int:
    """Precision at which x is certified >= 0 (strictly, unless exactly zero)."""
    if x.exact is not None:
        if x.exact < 0:
            raise DomainError(f"{what} of a negative number")
        return 0
    j = 0
    while j <= budget:
        iv = x.refine(j)
        if iv.lo >= 0:
            return j
        if iv.hi < 0:
            raise DomainError(f"{what} of a negative number")
        j = 2 * j + 1 if j else 1
    raise DomainError(f"{what} operand not certifiably nonnegative within budget")


def elem_eval(fn: str, x: RealLike, param: Number | None = None,
              budget: int = SEPARATION_BUDGET) -> ExactReal:
    """Certified exp, sqrt or rational power of an ExactReal."""
    x = as_real(x)
    if fn == "exp":
        return _exp(x)
    if fn == "sqrt":
        return _pow(x, Fraction(1, 2), budget, recipe_fn="sqrt")
    if fn == "pow_rational":
        if param is None:
            raise ValueError("pow_rational needs an exponent")
        return _pow(x, to_q(param), budget)
    raise ValueError(f"unknown elementary function {fn!r}")


def _exp(x: ExactReal) -> ExactReal:
    recipe = Recipe("elementary", {"fn": "exp", "arg": _recipe_of(x)})
    if x.exact == 0:
        return ExactReal(lambda k: Interval.point(1), recipe, exact=Fraction(1))
    top = max(x.refine(0).hi, Fraction(0))
    lift = 4 + _bits(top * 3 / 2)

    def build(j):
        iv = x.refine(j)
        return Interval(exp_enclosure(iv.lo, j + lift).lo, exp_enclosure(iv.hi, j + lift).hi)

    return ExactReal(lambda k: _adaptive(k, build, k + lift), recipe)


def _pow(x: ExactReal, r: Fraction, budget: int, recipe_fn: str = "pow_rational") -> ExactReal:
    params = {"fn": recipe_fn, "arg": _recipe_of(x)}
    if recipe_fn == "pow_rational":
        params["param"] = str(r)
    recipe = Recipe("elementary", params)
    if r == 0:
        return ExactReal(lambda k: Interval.point(1), recipe, exact=Fraction(1))
    p, q = r.numerator, r.denominator
    j0 = 0
    if q % 2 == 0:
        j0 = _nonneg_precision(x, budget, "even root")
    if p < 0:
        sep = x.separation(budget)
        if sep is None:
            raise NotSeparatedFromZero("negative power of a value not separated from zero")
        j0 = max(j0, sep)
    if x.exact is not None:
        root = _exact_root(x.exact, q)
        if root is not None:
            v = root ** p
            return ExactReal(lambda k: Interval.point(v), recipe, exact=v)
    mag = x.refine(j0).magnitude() + 1

    def build(j):
        iv = x.refine(max(j, j0))
        if q == 1:
            base = iv
        else:
            lo = root_enclosure(max(iv.lo, Fraction(0)) if q % 2 == 0 else iv.lo, q, j).lo
            hi = root_enclosure(iv.hi, q, j).hi
            base = Interval(lo, hi)
        out = base ** abs(p)
        if p < 0:
            out = out.reciprocal()
        return out.round_out(j + 2)

    lift = 4 + abs(p) * _bits(mag)
    return ExactReal(lambda k: _adaptive(k, build, k + lift), recipe)


def exp(x: RealLike) -> ExactReal:
    return elem_eval("exp", x)


def sqrt(x: RealLike) -> ExactReal:
    return elem_eval("sqrt", x)


def pow_rational(x: RealLike, r: Number) -> ExactReal:
    return elem_eval("pow_rational", x, r)


def refine(x: RealLike, k: int) -> Interval:
    return as_real(x).refine(k)


# -- distance to the nearest integer ----------------------------------

def _floor(v: Fraction) -> int:
    return v.numerator // v.denominator


def nearest_int(q: int, x: RealLike, precision: int = 64,
                budget: int = 4096) -> tuple[int, Interval]:
    """Return (p, I) with p the integer nearest to q*x and I enclosing ||q x||."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    if not isinstance(x, ExactReal) or x.exact is not None:
        v = q * (x.exact if isinstance(x, ExactReal) else to_q(x))
        p = (2 * v.numerator + v.denominator) // (2 * v.denominator)
        return p, Interval.point(abs(v - p))
    j = precision + q.bit_length()
    while True:
        y = x.refine(j) * q
        # first half-integer m + 1/2 at or above y.lo
        m = -_floor(-(y.lo - Fraction(1, 2)))
        if Fraction(2 * m + 1, 2) > y.hi:
            p = _floor(y.lo + Fraction(1, 2))
            d_lo, d_hi = abs(y.lo - p), abs(y.hi - p)
            low = Fraction(0) if y.lo <= p <= y.hi else min(d_lo, d_hi)
            return p, Interval(low, max(d_lo, d_hi))
        if j >= budget:
            raise AmbiguousNearestInteger(f"q*x straddles a half-integer at precision {j}")
        j = min(2 * j, budget)


def nearest_int_dist(q: int, x: RealLike, precision: int = 64,
                     budget: int = 4096) -> Interval:
    """Certified enclosure of ||q x||, the distance from q*x to the nearest integer."""
    if q < 2:
        raise ValueError("q must be at least 2")
    return nearest_int(q, x, precision, budget)[1]

"""Strictly monotone maps used by the steering engine.

Every map can be applied to an ExactReal, reports whether it is defined and
strictly monotone on a rational interval (``admits``) and in which
direction, and encloses its image of an interval from the values at the two
endpoints.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from .errors import DomainEscape, NonMonotoneSlice, NotSeparatedFromZero, RefinementBudgetExceeded
from .reals import ExactReal, Interval, Recipe, as_real, elem_eval, field_op, to_q

SOLVE_BUDGET = 1 << 14
INVERSE_BRACKET = Interval(Fraction(-64), Fraction(64))


def _width_bits(I: Interval) -> int:
    """Smallest b with width(I) >= 2**-b (0 for wide intervals)."""
    w = I.width
    if w == 0:
        return 0
    return max(0, w.denominator.bit_length() - w.numerator.bit_length() + 1)


def _sign(x: ExactReal, budget: int = 4096) -> int:
    s = x.separation(budget)
    if s is None:
        raise NotSeparatedFromZero("map parameter not separated from zero")
    return 1 if x.refine(s).lo > 0 else -1


Probe = Callable[[Fraction, int], "tuple[Optional[int], Optional[Fraction]]"]


def _probe_until(probe: Probe, m: Fraction, j: int, cap: int):
    while True:
        sign, est = probe(m, j)
        if sign is not None or j >= cap:
            return sign, est
        j = min(2 * j, cap)


def bracket_root(probe: Probe, lo: Fraction, hi: Fraction, low_sign: int, k: int,
                 state: list | None = None, budget: int = SOLVE_BUDGET) -> Interval:
    """Enclose the unique sign change of h on [lo, hi] to width 2**-(k+2).

    ``probe(m, j)`` returns (sign, estimate): the sign of h(m) certified at
    working precision j (0 for an exact zero, None when undecided) and an
    approximate value of h(m).  h has sign ``low_sign`` left of the root.

    A round probes the secant point and then a point mirrored past the
    secant-predicted root, which usually brackets the root tightly.  A round
    that fails to halve the bracket is followed by a trisection round; of the
    two trisection points at least one is eventually decided, since the root
    cannot sit at both.  ``state`` carries the best bracket between calls.
    """
    if state:
        lo, hi = state[0]
    target = Fraction(1, 1 << (k + 2))
    ends: dict[int, Fraction] = {}
    g = 1 << (k + 6)

    def snap(v: Fraction) -> Fraction:
        return Fraction(round(v * g), g)

    def take(m: Fraction, sign: int, est) -> None:
        nonlocal lo, hi
        if sign == low_sign:
            lo, ends[-1] = m, est
        else:
            hi, ends[1] = m, est

    secant = True
    while hi - lo > target:
        before = hi - lo
        j0 = _width_bits(Interval(lo, hi)) + 8
        if secant and len(ends) == 2 and ends[-1] is not None and ends[1] is not None \
                and ends[-1] != ends[1]:
            slope = (ends[1] - ends[-1]) / (hi - lo)
            m = min(max(snap(lo - ends[-1] / slope), lo + target / 4), hi - target / 4)
            if lo < m < hi:
                sign, est = _probe_until(probe, m, j0, k + 24)
                if sign == 0:
                    return Interval.point(m)
                if sign is not None:
                    take(m, sign, est)
                    if est is not None and hi - lo > target:
                        toward = 1 if m == lo else -1
                        m2 = snap(m + toward * max(abs(2 * est / slope), target / 4))
                        if lo < m2 < hi:
                            s2, e2 = _probe_until(probe, m2, j0, k + 24)
                            if s2 == 0:
                                return Interval.point(m2)
                            if s2 is not None:
                                take(m2, s2, e2)
                    secant = hi - lo <= before / 2
                    continue
        secant = True
        h = 1 << (j0 + 2)
        third = (hi - lo) / 3
        m1 = Fraction(round((lo + third) * h), h)
        m2 = Fraction(round((hi - third) * h), h)
        j = j0
        while True:
            s1, e1 = probe(m1, j)
            if s1 == 0:
                return Interval.point(m1)
            if s1 is not None:
                take(m1, s1, e1)
                break
            s2, e2 = probe(m2, j)
            if s2 == 0:
                return Interval.point(m2)
            if s2 is not None:
                take(m2, s2, e2)
                break
            if j >= budget:
                raise RefinementBudgetExceeded(f"root not separated at precision {budget}")
            j = min(2 * j, budget)
    if state is not None:
        state[:] = [(lo, hi)]
    return Interval(lo, hi)


class CatalogMap:
    """Base class: a continuous map, strictly monotone wherever it is admitted."""

    def admits(self, I: Interval) -> bool:
        raise NotImplementedError

    def direction(self, I: Interval) -> int:
        raise NotImplementedError

    def apply(self, x) -> ExactReal:
        raise NotImplementedError

    def inverse(self) -> CatalogMap:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __call__(self, x) -> ExactReal:
        return self.apply(x)

    def enclose(self, a: Fraction, bits: int) -> Interval:
        return self.apply(ExactReal.rational(a)).refine(bits)

    def image(self, I: Interval, bits: int) -> tuple[Interval, Interval | None]:
        """(outer, inner): outer contains f(I); inner, if not None, lies inside f(I)."""
        if not self.admits(I):
            raise DomainEscape(f"{self} is not admitted on {I}")
        ea, eb = self.enclose(I.lo, bits), self.enclose(I.hi, bits)
        if self.direction(I) < 0:
            ea, eb = eb, ea
        outer = Interval(ea.lo, eb.hi)
        inner = Interval(ea.hi, eb.lo) if ea.hi < eb.lo else None
        return outer, inner

    def compose(self, inner: CatalogMap) -> CatalogMap:
        """self after inner."""
        return Composition(self, inner)


_VARIANTS = ("identity", "add", "sub", "scale", "recip", "sqrtdiff", "expscale", "pow")


class Elementary(CatalogMap):
    """One of the basic catalog maps, parameterized by a real t (or exponent r for pow).

    identity: x, add: x + t, sub: t - x, scale: t x, recip: t / x,
    sqrtdiff: sqrt(t - x^2), expscale: exp(t x), pow: x^r.
    """

    def __init__(self, variant: str, t=None, text: str | None = None):
        if variant not in _VARIANTS:
            raise ValueError(f"unknown map variant {variant!r}")
        self.variant = variant
        if variant == "identity":
            self.t = None
        elif variant == "pow":
            self.t = to_q(t)
            if self.t == 0:
                raise ValueError("pow exponent must be nonzero")
        else:
            self.t = as_real(t)
            if variant in ("scale", "recip", "expscale"):
                self._t_sign = _sign(self.t)
        self.text = text

    def _t_text(self) -> str:
        if self.text is not None:
            return self.text
        if isinstance(self.t, Fraction):
            return str(self.t)
        if self.t.exact is not None:
            return str(self.t.exact)
        return "<real>"

    def __str__(self):
        if self.variant == "identity":
            return "id"
        return f"{self.variant}:{self._t_text()}"

    def __repr__(self):
        return f"Elementary({str(self)!r})"

    def to_json(self) -> dict:
        out = {"variant": self.variant}
        if self.variant == "pow":
            out["r"] = str(self.t)
        elif self.t is not None:
            out["t"] = self.t.recipe.to_json() if self.t.recipe else None
            if self.text is not None:
                out["text"] = self.text
        return out

    def _t_positive_margin(self, m: Fraction) -> bool:
        """Certify t - m > 0."""
        j = 16
        while j <= 4096:
            iv = self.t.refine(j)
            if iv.lo > m:
                return True
            if iv.hi <= m:
                return False
            j *= 2
        return False

    def admits(self, I: Interval) -> bool:
        v = self.variant
        if v == "recip":
            return I.excludes_zero()
        if v == "sqrtdiff":
            return I.excludes_zero() and self._t_positive_margin(I.magnitude() ** 2)
        if v == "pow":
            return I.lo > 0
        return True

    def direction(self, I: Interval) -> int:
        v = self.variant
        if v in ("identity", "add"):
            return 1
        if v == "sub":
            return -1
        if v in ("scale", "expscale"):
            return self._t_sign
        if v == "recip":
            return -self._t_sign
        if v == "sqrtdiff":
            return -1 if I.lo > 0 else 1
        return 1 if self.t > 0 else -1

    def apply(self, x) -> ExactReal:
        x = as_real(x)
        v, t = self.variant, self.t
        if v == "identity":
            return x
        if v == "add":
            return field_op("add", x, t)
        if v == "sub":
            return field_op("sub", t, x)
        if v == "scale":
            return field_op("mul", t, x)
        if v == "recip":
            return field_op("div", t, x)
        if v == "sqrtdiff":
            return elem_eval("sqrt", field_op("sub", t, field_op("mul", x, x)))
        if v == "expscale":
            return elem_eval("exp", field_op("mul", t, x))
        return elem_eval("pow_rational", x, t)

    def inverse(self) -> CatalogMap:
        v, t = self.variant, self.t
        if v == "identity":
            return self
        if v == "add":
            neg = field_op("sub", 0, t)
            return Elementary("add", neg, None if self.text is None else f"-({self.text})")
        if v in ("sub", "recip"):
            return self
        if v == "sqrtdiff":
            # an involution on the positive branch, which is the branch returned
            return self
        if v == "scale":
            inv = field_op("div", 1, t)
            return Elementary("scale", inv, None if self.text is None else f"1/({self.text})")
        if v == "pow":
            return Elementary("pow", 1 / t)
        return InverseMap(self)


class Composition(CatalogMap):
    """outer after inner."""

    def __init__(self, outer: CatalogMap, inner: CatalogMap):
        self.outer, self.inner = outer, inner

    def __str__(self):
        return f"{self.outer}.{self.inner}"

    def __repr__(self):
        return f"Composition({str(self)!r})"

    def to_json(self) -> dict:
        return {"variant": "compose", "outer": self.outer.to_json(), "inner": self.inner.to_json()}

    def _inner_image(self, I: Interval) -> Interval:
        bits = _width_bits(I) + 32
        return self.inner.image(I, bits)[0]

    def admits(self, I: Interval) -> bool:
        return self.inner.admits(I) and self.outer.admits(self._inner_image(I))

    def direction(self, I: Interval) -> int:
        return self.outer.direction(self._inner_image(I)) * self.inner.direction(I)

    def apply(self, x) -> ExactReal:
        return self.outer.apply(self.inner.apply(x))

    def inverse(self) -> CatalogMap:
        return Composition(self.inner.inverse(), self.outer.inverse())


class InverseMap(CatalogMap):
    """Inverse of a monotone map on a bracket, evaluated by certified trisection."""

    def __init__(self, base: CatalogMap, bracket: Interval = INVERSE_BRACKET):
        if not base.admits(bracket):
            raise DomainEscape(f"{base} is not admitted on the inverse bracket {bracket}")
        self.base, self.bracket = base, bracket
        self._dir = base.direction(bracket)
        self._range = base.image(bracket, 64)[1]

    def __str__(self):
        return f"inv({self.base})"

    def __repr__(self):
        return f"InverseMap({str(self)!r})"

    def to_json(self) -> dict:
        return {"variant": "inverse", "base": self.base.to_json(),
                "bracket": [str(self.bracket.lo), str(self.bracket.hi)]}

    def admits(self, I: Interval) -> bool:
        return self._range is not None and self._range.contains_interval(I)

    def direction(self, I: Interval) -> int:
        return self._dir

    def inverse(self) -> CatalogMap:
        return self.base

    def apply(self, y) -> ExactReal:
        y = as_real(y)
        base, state = self.base, []

        def sign_at(m: Fraction, j: int):
            fm, yi = base.enclose(m, j), y.refine(j)
            est = fm.mid - yi.mid
            if fm.is_point and yi.is_point and fm.lo == yi.lo:
                return 0, est
            if fm.lo > yi.hi:
                return 1, est
            if fm.hi < yi.lo:
                return -1, est
            return None, est

        def approx(k):
            return bracket_root(sign_at, self.bracket.lo, self.bracket.hi, -self._dir, k, state)

        recipe = Recipe("elementary", {"fn": "inverse", "map": self.base.to_json(),
                                       "arg": y.recipe.to_json() if y.recipe else None})
        return ExactReal(approx, recipe)


class ImplicitMap(CatalogMap):
    """x -> the unique y in J with P(x, y) = 0, on a sub-interval of x-values."""

    def __init__(self, P, domain: Interval, J: Interval, y_sign: int, x_sign: int):
        self.P, self.domain, self.J = P, domain, J
        self._y_sign, self._dir = y_sign, -x_sign * y_sign

    def __str__(self):
        return f"implicit[{self.P}]"

    def to_json(self) -> dict:
        return {"variant": "implicit", "poly": str(self.P),
                "domain": [str(self.domain.lo), str(self.domain.hi)],
                "J": [str(self.J.lo), str(self.J.hi)]}

    def admits(self, I: Interval) -> bool:
        return self.domain.contains_interval(I)

    def direction(self, I: Interval) -> int:
        return self._dir

    def inverse(self) -> CatalogMap:
        raise NotImplementedError("inverse of an implicit map is not in the catalog")

    def apply(self, x) -> ExactReal:
        x = as_real(x)
        P, state = self.P, []

        def sign_at(m: Fraction, j: int):
            if x.exact is not None:
                v = P(x.exact, m)
                return (v > 0) - (v < 0), v
            iv = P.eval_interval(x.refine(j), Interval.point(m))
            if iv.lo > 0:
                return 1, iv.mid
            if iv.hi < 0:
                return -1, iv.mid
            return None, iv.mid

        def approx(k):
            return bracket_root(sign_at, self.J.lo, self.J.hi, -self._y_sign, k, state)

        recipe = Recipe("elementary", {"fn": "implicit", "map": self.to_json(),
                                       "arg": x.recipe.to_json() if x.recipe else None})
        return ExactReal(approx, recipe)


def identity() -> Elementary:
    return Elementary("identity")


def add_const(t, text=None) -> Elementary:
    return Elementary("add", t, text)


def sub_from(t, text=None) -> Elementary:
    return Elementary("sub", t, text)


def scale(t, text=None) -> Elementary:
    return Elementary("scale", t, text)


def reciprocal_scale(t, text=None) -> Elementary:
    return Elementary("recip", t, text)


def sqrt_diff(t, text=None) -> Elementary:
    return Elementary("sqrtdiff", t, text)


def exp_scale(t, text=None) -> Elementary:
    return Elementary("expscale", t, text)


def pow_map(r) -> Elementary:
    return Elementary("pow", r)


def iterate(f: CatalogMap, k: int) -> CatalogMap:
    """f^k for any integer k (negative k iterates the inverse)."""
    if k == 0:
        return identity()
    g = f if k > 0 else f.inverse()
    out = g
    for _ in range(abs(k) - 1):
        out = Composition(g, out)
    return out


def check_monotone_slice(P, I: Interval, J: Interval, depth: int = 6) -> tuple[int, int]:
    """Signs of dP/dy and dP/dx over I x J, certified on a grid of boxes."""
    Py, Px = P.partial(1), P.partial(0)
    signs = []
    for D in (Py, Px):
        s = _box_sign(D, I, J, depth)
        if s is None:
            what = "P(x, .)" if D is Py else "the implicit branch"
            raise NonMonotoneSlice(f"{what} is not certifiably monotone on {I} x {J}")
        signs.append(s)
    return signs[0], signs[1]


def _box_sign(D, I: Interval, J: Interval, depth: int) -> int | None:
    iv = D.eval_interval(I, J)
    if iv.lo > 0:
        return 1
    if iv.hi < 0:
        return -1
    if depth == 0:
        return None
    mi, mj = I.mid, J.mid
    signs = set()
    for a in (Interval(I.lo, mi), Interval(mi, I.hi)):
        for b in (Interval(J.lo, mj), Interval(mj, J.hi)):
            s = _box_sign(D, a, b, depth - 1)
            if s is None:
                return None
            signs.add(s)
    return signs.pop() if len(signs) == 1 else None

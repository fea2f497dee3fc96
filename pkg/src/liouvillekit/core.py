"""Liouville series constants, approximation levels and certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from .cfrac import cf_expand, convergents
from .errors import (
    InvalidSchedule,
    RefinementBudgetExceeded,
    WitnessSearchExhausted,
    ZeroDistance,
)
from .reals import ExactReal, Interval, Recipe, as_real, nearest_int, to_q

WITNESS_DEPTH = 64
WITNESS_PRECISION = 1024
U_LEVEL_BITS = 16

SCHEDULES: dict[str, Callable[[int], int]] = {
    "factorial": math.factorial,
    "double-exponential": lambda k: 1 << (1 << (k - 1)),
}


@dataclass(frozen=True)
class Witness:
    n: int
    p: int
    q: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("witness level must be positive")
        if self.q < 2:
            raise ValueError("witness denominator must be at least 2")


@dataclass(frozen=True)
class LiouvilleCertificate:
    """Witnesses for levels 1..N of a single subject."""

    subject: dict | None
    witnesses: tuple[Witness, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "witnesses", tuple(self.witnesses))

    @property
    def level(self) -> int:
        return len(self.witnesses)

    def is_contiguous(self) -> bool:
        return [w.n for w in self.witnesses] == list(range(1, len(self.witnesses) + 1))


# -- series constants ---------------------------------------------------

class SeriesConstant:
    """sum_{k>=1} a_k b^(-e_k) with a strictly increasing exponent schedule."""

    def __init__(self, base: int, schedule: str | Callable[[int], int] = "factorial",
                 digits: int | Sequence[int] = 1):
        if base < 2:
            raise InvalidSchedule("base must be at least 2")
        self.base = base
        if isinstance(schedule, str):
            if schedule not in SCHEDULES:
                raise InvalidSchedule(f"unknown schedule {schedule!r}")
            self.schedule_name = schedule
            self._exp = SCHEDULES[schedule]
        else:
            self.schedule_name = None
            self._exp = schedule
        head = [self._exp(k) for k in range(1, 9)]
        if head[0] < 1 or any(b <= a for a, b in zip(head, head[1:])):
            raise InvalidSchedule("exponent schedule must be positive and strictly increasing")
        pattern = (digits,) if isinstance(digits, int) else tuple(digits)
        if not pattern or any(not 0 <= d < base for d in pattern):
            raise InvalidSchedule(f"digits must lie in [0, {base - 1}]")
        if not any(pattern):
            raise InvalidSchedule("digit rule is identically zero")
        self.digits = pattern
        self.max_digit = max(pattern)
        self._sums = [Fraction(0)]

    def exponent(self, k: int) -> int:
        return self._exp(k)

    def digit(self, k: int) -> int:
        return self.digits[(k - 1) % len(self.digits)]

    def partial_sum(self, k: int) -> Fraction:
        while len(self._sums) <= k:
            i = len(self._sums)
            self._sums.append(self._sums[-1] + Fraction(self.digit(i), self.base ** self.exponent(i)))
        return self._sums[k]

    def tail_bound(self, k: int) -> Fraction:
        """Upper bound for x - partial_sum(k); geometric since e_j >= e_{k+1} + (j-k-1)."""
        b = self.base
        return Fraction(self.max_digit * b, (b - 1) * b ** self.exponent(k + 1))

    def approx(self, k: int) -> Interval:
        target = Fraction(1, 1 << (k + 2))
        m = 1
        while self.tail_bound(m) > target:
            m += 1
        s = self.partial_sum(m)
        return Interval(s, s + self.tail_bound(m))

    def witness(self, n: int) -> tuple[int, int] | None:
        k = 1
        while True:
            q = self.base ** self.exponent(k)
            if self.tail_bound(k) * q ** n <= 1:
                return int(self.partial_sum(k) * q), q
            k += 1

    def recipe(self) -> Recipe:
        params = {"base": self.base, "digits": list(self.digits)}
        params["schedule"] = self.schedule_name or "custom"
        return Recipe("series", params)


def series_constant(base: int = 10, schedule: str | Callable[[int], int] = "factorial",
                    digits: int | Sequence[int] = 1) -> ExactReal:
    """The Liouville-type constant sum_k a_k base^(-e_k)."""
    sc = SeriesConstant(base, schedule, digits)
    return ExactReal(sc.approx, recipe=sc.recipe(), source=sc)


# -- certified comparisons ------------------------------------------------

def _default_budget(n: int, q: int) -> int:
    return 4 * n * q.bit_length() + 2048


def _decide(x: ExactReal, p: int, q: int, n: int, strict: bool, budget: int | None) -> bool:
    """Decide 0 < |x - p/q| <= q^-n (or < when strict) by interval refinement."""
    center = Fraction(p, q)
    bound = Fraction(1, q ** n)
    if x.exact is not None:
        d = abs(x.exact - center)
        return 0 < d and (d < bound if strict else d <= bound)
    budget = budget or _default_budget(n, q)
    j = n * q.bit_length() + 16
    while True:
        d = (x.refine(j) - center).abs()
        too_big = d.lo >= bound if strict else d.lo > bound
        if too_big:
            return False
        small_enough = d.hi < bound if strict else d.hi <= bound
        if small_enough and d.lo > 0:
            return True
        if j >= budget:
            raise RefinementBudgetExceeded(
                f"|x - {p}/{q}| vs q^-{n} undecided at precision {budget}")
        j = min(2 * j, budget)


def verify_certificate(x: Union[ExactReal, Fraction], cert: LiouvilleCertificate,
                       budget: int | None = None) -> bool:
    """True iff every witness satisfies 0 < |x - p/q| <= q^-n."""
    x = as_real(x)
    return all(_decide(x, w.p, w.q, w.n, False, budget) for w in cert.witnesses)


def un_membership(x: Union[ExactReal, Fraction], n: int, witness: Witness,
                  budget: int | None = None) -> bool:
    """True iff x lies in the punctured open ball of radius q^-n around p/q."""
    if witness.q < 2:
        raise ValueError("witness denominator must be at least 2")
    return _decide(as_real(x), witness.p, witness.q, n, True, budget)


# -- approximation level u = -log||qx|| / log q ---------------------------

def log2_bracket(v: Fraction, bits: int) -> Interval:
    """Enclosure of log2(v) for rational v > 0 by repeated squaring.

    Each fractional bit is read off by comparing y**2 with 2, so no
    transcendental function is evaluated.
    """
    v = to_q(v)
    if v <= 0:
        raise ValueError("log2 of a nonpositive number")
    e = v.numerator.bit_length() - v.denominator.bit_length()
    y = v / Fraction(2) ** e
    if y < 1:
        e -= 1
        y *= 2
    work = bits + 16
    yi = Interval.point(y)
    acc = Fraction(e)
    step = Fraction(1)
    for _ in range(bits):
        step /= 2
        yi = (yi * yi).round_out(work)
        if yi.lo >= 2:
            acc += step
            yi = yi * Fraction(1, 2)
        elif yi.hi >= 2:
            return Interval(acc, acc + 2 * step)
    return Interval(acc, acc + step)


def u_level(x: Union[ExactReal, Fraction], q: int, bits: int = U_LEVEL_BITS,
            budget: int = 1 << 16) -> Interval:
    """Certified enclosure of -log||q x|| / log q on a 2**-bits grid."""
    if q < 2:
        raise ValueError("q must be at least 2")
    x = as_real(x)
    j = 64
    while True:
        _, d = nearest_int(q, x, precision=j, budget=max(budget, j + q.bit_length()))
        if d.hi == 0:
            raise ZeroDistance(f"||{q} x|| = 0")
        if d.lo > 0 and (d.is_point or d.width <= d.lo / (1 << (bits + 4))):
            break
        if j >= budget:
            raise RefinementBudgetExceeded("||q x|| not separated from zero within budget")
        j = min(2 * j, budget)
    if d.is_point:
        inv = 1 / d.lo
        if inv.denominator == 1:
            k, r = 0, inv.numerator
            while r % q == 0:
                r //= q
                k += 1
            if r == 1:
                return Interval.point(k)
    work = bits + 8 + q.bit_length().bit_length()
    while True:
        ld_lo = log2_bracket(d.lo, work)
        ld_hi = log2_bracket(d.hi, work)
        lq = log2_bracket(Fraction(q), work)
        u = Interval(-ld_hi.hi / lq.hi, -ld_lo.lo / lq.lo)
        out = u.round_out(bits)
        if out.width <= Fraction(2, 1 << bits) or work > 4 * bits + 64:
            return out
        work += 8


# -- witness search ------------------------------------------------------

def _search_convergents(x: ExactReal, levels: range, depth: int, budget: int) -> dict[int, Witness]:
    try:
        cf = cf_expand(x, depth, budget=budget)
    except RefinementBudgetExceeded as exc:
        cf = getattr(exc, "partial", None)
        if cf is None:
            return {}
    found: dict[int, Witness] = {}
    pending = list(levels)
    for p, q in convergents(cf):
        if q < 2:
            continue
        for n in list(pending):
            try:
                ok = _decide(x, p, q, n, False, budget + n * q.bit_length())
            except RefinementBudgetExceeded:
                ok = False
            if not ok:
                break
            found[n] = Witness(n, p, q)
            pending.remove(n)
        if not pending:
            break
    return found


def certify_level(x: Union[ExactReal, Fraction], N: int, depth: int = WITNESS_DEPTH,
                  precision: int = WITNESS_PRECISION) -> LiouvilleCertificate:
    """Witnesses (n, p, q) with 0 < |x - p/q| <= q^-n for n = 1..N."""
    if N < 1:
        raise ValueError("N must be at least 1")
    x = as_real(x)
    found: dict[int, Witness] = {}
    source = x.source
    if source is not None and hasattr(source, "witness"):
        for n in range(1, N + 1):
            pq = source.witness(n)
            if pq is not None:
                w = Witness(n, *pq)
                if _decide(x, w.p, w.q, n, False, None):
                    found[n] = w
    missing = [n for n in range(1, N + 1) if n not in found]
    if missing:
        found.update(_search_convergents(x, range(min(missing), max(missing) + 1), depth, precision))
    missing = [n for n in range(1, N + 1) if n not in found]
    if missing:
        raise WitnessSearchExhausted(
            f"no witness for levels {missing} within depth {depth}, precision {precision}")
    subject = x.recipe.to_json() if x.recipe is not None else None
    return LiouvilleCertificate(subject, tuple(found[n] for n in range(1, N + 1)))

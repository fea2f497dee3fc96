"""Continued fractions of rationals and certified reals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import RefinementBudgetExceeded
from .reals import ExactReal, Interval, as_real, is_perfect_power, nearest_int, to_q

CF_BUDGET = 512


@dataclass(frozen=True)
class CFrac:
    """Partial quotients [a0; a1, a2, ...].

    ``exact`` is True when the list is the complete canonical expansion of a
    rational, False when it is a certified prefix of a longer expansion.
    """

    quotients: tuple[int, ...]
    exact: bool

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))
        if any(a < 1 for a in self.quotients[1:]):
            raise ValueError("partial quotients after the first must be positive")
        if self.exact and len(self.quotients) >= 2 and self.quotients[-1] < 2:
            raise ValueError("canonical rational expansion cannot end in 1")

    def __len__(self):
        return len(self.quotients)

    def value(self) -> Fraction:
        """Evaluate the (finite) expansion back to a fraction."""
        p, q = convergents(self)[-1]
        return Fraction(p, q)

    def __str__(self):
        head, *rest = self.quotients
        body = f"[{head}" + (f"; {', '.join(map(str, rest))}" if rest else "") + "]"
        return body if self.exact else body[:-1] + ", ...]"


def _euclid(v: Fraction, limit: int) -> list[int]:
    out = []
    while len(out) < limit:
        a = v.numerator // v.denominator
        out.append(a)
        v -= a
        if v == 0:
            break
        v = 1 / v
    return out


def _common_prefix(a: list[int], b: list[int]) -> list[int]:
    n = 0
    for u, v in zip(a, b):
        if u != v:
            break
        n += 1
    return a[:n]


def cf_expand(x: Union[ExactReal, Fraction, int], depth: int, budget: int = CF_BUDGET) -> CFrac:
    """First ``depth`` partial quotients of x, each certified.

    For an ExactReal the enclosure at precision j is expanded at both
    endpoints; the set of reals sharing a given quotient prefix is an
    interval, so a prefix common to both endpoints is shared by x.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not isinstance(x, ExactReal):
        x = to_q(x)
    elif x.exact is not None:
        x = x.exact
    if isinstance(x, Fraction):
        full = _euclid(x, depth + 1)
        if len(full) <= depth:
            return CFrac(tuple(full), True)
        return CFrac(tuple(full[:depth]), False)

    j = 64
    best: list[int] = []
    while True:
        iv = x.refine(j)
        prefix = _common_prefix(_euclid(iv.lo, depth), _euclid(iv.hi, depth))
        if len(prefix) > len(best):
            best = prefix
        if len(best) >= depth:
            return CFrac(tuple(best[:depth]), False)
        if j >= budget:
            err = RefinementBudgetExceeded(
                f"only {len(best)} of {depth} quotients certified at precision {budget}")
            err.partial = CFrac(tuple(best), False) if best else None
            raise err
        j = min(2 * j, budget)


def convergents(cf: CFrac | list[int] | tuple[int, ...]) -> list[tuple[int, int]]:
    quotients = cf.quotients if isinstance(cf, CFrac) else tuple(cf)
    out = []
    p, p_prev = 1, 0
    q, q_prev = 0, 1
    for a in quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


_CHUNK = 1 << 20


def _min_residue_distance(a: int, b: int, q: int) -> int:
    """min over 1 <= q' < q of the distance from q' a to the nearest multiple of b."""
    a %= b
    best = b
    if (q * b) < (1 << 62):
        for start in range(1, q, _CHUNK):
            r = np.arange(start, min(q, start + _CHUNK), dtype=np.int64) * a % b
            best = min(best, int(np.minimum(r, b - r).min()))
    else:
        for qq in range(1, q):
            r = qq * a % b
            best = min(best, r, b - r)
    return best


def best_approx_check(x: Union[ExactReal, Fraction], p: int, q: int,
                      budget: int = 4096) -> bool:
    """True iff ||q' x|| > |q x - p| for every 1 <= q' < q (brute force)."""
    if q < 2:
        raise ValueError("q must be at least 2")
    if not isinstance(x, ExactReal) or x.exact is not None:
        v = x.exact if isinstance(x, ExactReal) else to_q(x)
        a, b = v.numerator, v.denominator
        err = abs(q * a - p * b)
        return _min_residue_distance(a, b, q) > err

    pending = list(range(1, q))
    j = 64 + q.bit_length()
    while True:
        iv = x.refine(j)
        dist = (iv * q - p).abs()
        still = []
        for qq in pending:
            _, d = nearest_int(qq, x, precision=j)
            if d.lo > dist.hi:
                continue
            if d.hi < dist.lo:
                return False
            still.append(qq)
        if not still:
            return True
        if j >= budget:
            raise RefinementBudgetExceeded(f"tie undecided for q' in {still[:5]}")
        pending = still
        j = min(2 * j, budget)


def maillet_root_witnesses(x: Union[ExactReal, Fraction], p: int, depth: int,
                           budget: int = 4096) -> list[int]:
    """Indices k whose convergent p_k/q_k has both parts perfect p-th powers.

    For p >= 2 the trivial convergents with q_k = 1 are skipped: they are
    integers, not rational approximations.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    cf = cf_expand(x, depth, budget=budget)
    out = []
    for k, (num, den) in enumerate(convergents(cf)):
        if p >= 2 and den < 2:
            continue
        if is_perfect_power(num, p) and is_perfect_power(den, p):
            out.append(k)
    return out

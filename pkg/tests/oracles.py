"""Independent reference computations used by the tests.

None of these call into the package; they use exact rational bisection,
mpmath at generous precision, sympy, or closed forms.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

mpmath.mp.prec = 2048


def bisect_sqrt(a: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rational bracket [lo, hi] of sqrt(a) of width 2^-bits by bisection on squares."""
    lo, hi = Fraction(0), max(Fraction(1), a)
    while hi - lo > Fraction(1, 2 ** bits):
        mid = (lo + hi) / 2
        if mid * mid <= a:
            lo = mid
        else:
            hi = mid
    return lo, hi


def mp_contains(iv, value, k: int) -> bool:
    """value (mpmath, computed at 2048 bits) lies in iv up to a slack of 2^-(k+64)."""
    slack = mpmath.mpf(2) ** (-(k + 64))
    lo = mpmath.mpf(iv.lo.numerator) / iv.lo.denominator
    hi = mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    return lo - slack <= value <= hi + slack


def factorial_sum(base: int, terms: int) -> Fraction:
    """sum_{k=1}^{terms} base^-(k!)."""
    return sum((Fraction(1, base ** math.factorial(k)) for k in range(1, terms + 1)), Fraction(0))


def euclid_cf(v: Fraction) -> list[int]:
    out = []
    a, b = v.numerator, v.denominator
    while b:
        q, r = divmod(a, b)
        out.append(q)
        a, b = b, r
    return out


def in_ball(x_lo: Fraction, x_hi: Fraction, p: int, q: int, n: int) -> bool:
    """Every point of [x_lo, x_hi] satisfies 0 < |x - p/q| <= q^-n."""
    c = Fraction(p, q)
    r = Fraction(1, q ** n)
    inside = c - r <= x_lo and x_hi <= c + r
    return inside and not (x_lo <= c <= x_hi)

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from liouvillekit.errors import DomainEscape, NonMonotoneSlice, ParseError
from liouvillekit.maps import (
    add_const,
    bracket_root,
    check_monotone_slice,
    exp_scale,
    identity,
    iterate,
    pow_map,
    reciprocal_scale,
    scale,
    sqrt_diff,
    sub_from,
)
from liouvillekit.poly import BivarPolyQ
from liouvillekit.reals import Interval, refine, sqrt
from liouvillekit.serialize import map_from_json, parse_map

from oracles import mp_contains


def mpq(v: Fraction):
    return mpmath.mpf(v.numerator) / v.denominator


X = Fraction(3, 7)
CASES = [
    (identity(), lambda x: x, 1),
    (add_const(Fraction(5, 2)), lambda x: x + mpmath.mpf(5) / 2, 1),
    (sub_from(1), lambda x: 1 - x, -1),
    (scale(-3), lambda x: -3 * x, -1),
    (reciprocal_scale(2), lambda x: 2 / x, -1),
    (sqrt_diff(1), lambda x: mpmath.sqrt(1 - x * x), -1),
    (exp_scale(Fraction(3, 2)), lambda x: mpmath.exp(mpmath.mpf(3) / 2 * x), 1),
    (pow_map(Fraction(5, 3)), lambda x: mpmath.power(x, mpmath.mpf(5) / 3), 1),
    (add_const(sqrt(2)), lambda x: x + mpmath.sqrt(2), 1),
]


@pytest.mark.parametrize("f,ref,direction", CASES, ids=[str(c[0]) for c in CASES])
def test_map_values_and_direction(f, ref, direction):
    I = Interval(Fraction(1, 5), Fraction(4, 5))
    assert f.admits(I)
    assert f.direction(I) == direction
    assert mp_contains(refine(f.apply(X), 60), ref(mpq(X)), 60)


@pytest.mark.parametrize("f,ref,direction", CASES, ids=[str(c[0]) for c in CASES])
def test_inverse_roundtrip(f, ref, direction):
    y = f.apply(X)
    back = f.inverse().apply(y)
    assert refine(back, 40).contains(X)


@pytest.mark.parametrize("f,ref,direction", CASES, ids=[str(c[0]) for c in CASES])
def test_image_encloses_endpoint_values(f, ref, direction):
    I = Interval(Fraction(1, 5), Fraction(4, 5))
    outer, inner = f.image(I, 40)
    for v in (I.lo, I.hi, I.mid):
        assert mp_contains(outer, ref(mpq(v)), 40)
    if inner is not None:
        assert outer.contains_interval(inner)


def test_composition_order():
    f = parse_map("add:1.scale:2")  # x -> 2x + 1
    assert refine(f.apply(Fraction(3)), 10) == Interval.point(7)
    g = parse_map("scale:2.add:1")  # x -> 2(x + 1)
    assert refine(g.apply(Fraction(3)), 10) == Interval.point(8)


def test_iterate_positive_and_negative():
    f = add_const(1)
    assert refine(iterate(f, 3).apply(Fraction(1, 2)), 10) == Interval.point(Fraction(7, 2))
    assert refine(iterate(f, -2).apply(Fraction(1, 2)), 10) == Interval.point(Fraction(-3, 2))
    assert refine(iterate(f, 0).apply(Fraction(1, 2)), 10) == Interval.point(Fraction(1, 2))


def test_exp_inverse_is_certified_log():
    g = exp_scale(1).inverse()
    assert mp_contains(refine(g.apply(Fraction(3)), 50), mpmath.log(3), 50)


def test_domain_checks():
    assert not sqrt_diff(1).admits(Interval(Fraction(1, 2), Fraction(3, 2)))
    assert not reciprocal_scale(1).admits(Interval(Fraction(-1), Fraction(1)))
    with pytest.raises(DomainEscape):
        sqrt_diff(1).image(Interval(Fraction(1, 2), Fraction(3, 2)), 20)


def test_bracket_root_on_rational_root():
    # the root 4/5 of 5x - 4 is found inside a bracket of width 2^-30
    def probe(m, j):
        v = 5 * m - 4
        return (0 if v == 0 else (1 if v > 0 else -1)), None

    iv = bracket_root(probe, Fraction(0), Fraction(1), -1, 30)
    assert iv.contains(Fraction(4, 5)) and iv.width <= Fraction(1, 2 ** 30)


def test_monotone_slice_check():
    I, J = Interval(Fraction(1, 10), Fraction(2, 10)), Interval(Fraction(0), Fraction(1))
    with pytest.raises(NonMonotoneSlice):
        check_monotone_slice(BivarPolyQ.parse("(y-1/5)*(y-1/2)*(y-4/5) + x/1000"), I, J)
    assert check_monotone_slice(BivarPolyQ.parse("x^2 + y^2 - 1"), I, Interval(Fraction(1, 10), Fraction(9, 10)))


SPECS = ["id", "sub:1", "add:1/3", "scale:-2", "recip:2", "sqrtdiff:1", "expscale:1", "pow:3/2",
         "pow:2", "sub:sqrt(2)", "add:L", "expscale:1.expscale:1", "sub:1.recip:2.add:e"]


@pytest.mark.parametrize("spec", SPECS)
def test_map_spec_roundtrip(spec):
    f = parse_map(spec)
    assert str(f) == spec
    g = map_from_json(f.to_json())
    assert str(g) == spec
    x = Fraction(2, 5)
    assert refine(f.apply(x), 40) == refine(g.apply(x), 40)


@pytest.mark.parametrize("bad", ["", "foo:1", "sub:", "pow:x", "add:1..scale:2", "sub:(1", "pow:1/0", "sub:1:2"])
def test_map_spec_rejects(bad):
    with pytest.raises(ParseError):
        parse_map(bad)

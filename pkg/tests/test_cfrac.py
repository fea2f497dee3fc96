from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from liouvillekit.cfrac import CFrac, best_approx_check, cf_expand, convergents, maillet_root_witnesses
from liouvillekit.errors import RefinementBudgetExceeded
from liouvillekit.reals import as_real, field_op, refine, sqrt

from oracles import euclid_cf


def test_half():
    cf = cf_expand(Fraction(1, 2), 5)
    assert cf.quotients == (0, 2) and cf.exact


def test_355_113():
    cf = cf_expand(Fraction(355, 113), 10)
    assert cf.quotients == tuple(euclid_cf(Fraction(355, 113))) == (3, 7, 16)
    assert cf.exact


def test_sqrt2_prefix():
    cf = cf_expand(sqrt(2), 6)
    assert cf.quotients == (1, 2, 2, 2, 2, 2) and not cf.exact
    assert str(cf) == "[1; 2, 2, 2, 2, 2, ...]"
    periodic = sympy.continued_fraction_periodic(0, 1, 2)
    assert [periodic[0]] + periodic[1] * 5 == list(cf.quotients)


@pytest.mark.parametrize("q,expect", [
    ((0, 2), [(0, 1), (1, 2)]),
    ((3, 7, 16), [(3, 1), (22, 7), (355, 113)]),
    ((1, 2, 2, 2), [(1, 1), (3, 2), (7, 5), (17, 12)]),
])
def test_convergents_examples(q, expect):
    assert convergents(list(q)) == expect


def test_canonical_form_rejected():
    with pytest.raises(ValueError):
        CFrac((1, 2, 1), exact=True)
    with pytest.raises(ValueError):
        CFrac((1, 0, 3), exact=False)


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6))
def test_rational_roundtrip_and_sympy_agreement(v):
    cf = cf_expand(v, 10 ** 4)
    assert cf.exact
    assert cf.value() == v
    assert list(cf.quotients) == list(sympy.continued_fraction(sympy.Rational(v.numerator, v.denominator)))


def _check_invariants(x, cf):
    conv = convergents(cf)
    for k in range(1, len(conv)):
        (p0, q0), (p1, q1) = conv[k - 1], conv[k]
        assert p1 * q0 - p0 * q1 == (-1) ** (k - 1)
    for k in range(len(conv) - 1):
        p, q = conv[k]
        q_next = conv[k + 1][1]
        iv = refine(x, 4 * (q * q_next).bit_length() + 64)
        err = max(abs(iv.lo - Fraction(p, q)), abs(iv.hi - Fraction(p, q)))
        bound = Fraction(1, q * q_next)
        if iv.is_point and k + 1 == len(conv) - 1 and cf.exact:
            assert err <= bound
        else:
            assert err < bound
    for p, q in conv:
        if q >= 2:
            assert best_approx_check(x, p, q)


def test_invariants_on_random_rationals():
    rng = random.Random(7)
    for _ in range(200):
        v = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 6))
        _check_invariants(as_real(v), cf_expand(v, 10))


def test_invariants_on_sqrt2():
    x = sqrt(2)
    _check_invariants(x, cf_expand(x, 10))


@pytest.mark.parametrize("p,q,expect", [(7, 5, True), (3, 2, True), (14, 10, False)])
def test_best_approx_examples(p, q, expect):
    assert best_approx_check(sqrt(2), p, q) is expect


def test_best_approx_requires_q_two():
    with pytest.raises(ValueError):
        best_approx_check(sqrt(2), 1, 1)


def test_maillet_p1_keeps_every_index():
    cf = cf_expand(sqrt(3), 7)
    assert maillet_root_witnesses(sqrt(3), 1, 7) == list(range(len(convergents(cf))))


def test_maillet_sqrt2_none():
    assert maillet_root_witnesses(sqrt(2), 2, 10) == []


def test_maillet_rational_square():
    # 4/9 has convergents 0/1, 1/2, 4/9; only the last has both parts square
    assert maillet_root_witnesses(Fraction(4, 9), 2, 10) == [2]


def test_cf_of_secret_rational_stalls():
    secretly_half = field_op("mul", sqrt(2), field_op("div", sqrt(2), 4))
    with pytest.raises(RefinementBudgetExceeded):
        cf_expand(secretly_half, 5, budget=256)

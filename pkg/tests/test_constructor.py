from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from liouvillekit.constructor import (
    block_cut,
    certify_steered,
    dovetail,
    erdos_split_prod,
    erdos_split_sum,
    implicit_pair,
    orbit_construct,
    orbit_element,
    steer,
    steered_image,
)
from liouvillekit.core import series_constant, verify_certificate
from liouvillekit.errors import NoRootInJ, NonMonotoneSlice, NotSeparatedFromZero
from liouvillekit.maps import add_const, exp_scale, sqrt_diff, sub_from
from liouvillekit.poly import BivarPolyQ
from liouvillekit.reals import Interval, field_op, refine, sqrt

from oracles import factorial_sum, in_ball, mp_contains

UNIT = Interval(Fraction(1, 10), Fraction(9, 10))


def independent_check(x, cert, max_bits=1 << 14):
    """Each witness ball strictly holds some enclosure of x that excludes p/q."""
    for w in cert.witnesses:
        k = w.n * w.q.bit_length() + 64
        while not in_ball(refine(x, k).lo, refine(x, k).hi, w.p, w.q, w.n):
            k *= 2
            if k > max_bits:
                return False
    return True


def stage_sound(stage) -> bool:
    center, r = Fraction(stage.p, stage.q), Fraction(1, stage.q ** stage.level)
    img = stage.image
    return center - r < img.lo and img.hi < center + r and not img.contains(center)


def test_dovetail_order():
    assert dovetail(1, 2) == [(0, 1), (0, 2), (1, 1), (1, 2)]
    assert len(dovetail(3, 4)) == 16


def test_steer_sub_from_one():
    final, xi, log = steer([sub_from(1)], Interval(0, 1), 2)
    assert log.check() and len(log.stages) == 4
    assert all(stage_sound(s) for s in log.stages)
    assert Interval(0, 1).contains_interval(final)
    for s, t in zip(log.stages, log.stages[1:]):
        assert s.after == t.before and s.before.contains_interval(s.after) and s.after != s.before
    c0, c1 = certify_steered(xi, 2)
    assert independent_check(xi, c0)
    assert independent_check(field_op("sub", 1, xi), c1)


def test_steer_sqrt_diff():
    _, xi, log = steer([sqrt_diff(1)], UNIT, 2)
    assert log.check()
    certs = certify_steered(xi, 2)
    eta = steered_image(xi, 1)
    assert independent_check(xi, certs[0]) and independent_check(eta, certs[1])
    assert refine(field_op("add", field_op("mul", xi, xi), field_op("mul", eta, eta)), 60).contains(1)


def test_steer_identity_only():
    _, xi, log = steer([], Interval(0, 1), 3)
    assert log.check() and len(log.stages) == 3
    (cert,) = certify_steered(xi, 3)
    assert independent_check(xi, cert)


def test_log_check_detects_tampering():
    _, _, log = steer([sub_from(1)], Interval(0, 1), 2)
    s = log.stages[1]
    bad = type(s)(s.map_index, s.level, s.p + 1, s.q, s.before, s.after, s.image)
    tampered = type(log)(log.maps, log.I0, log.N, log.seed, log.stages[:1] + (bad,) + log.stages[2:])
    assert not tampered.check()


def test_seed_determinism_and_variation():
    a = refine(steer([sub_from(1)], Interval(0, 1), 2, seed=5)[1], 80)
    b = refine(steer([sub_from(1)], Interval(0, 1), 2, seed=5)[1], 80)
    assert a == b
    outs = {refine(steer([sub_from(1)], Interval(0, 1), 2, seed=s)[1], 80) for s in range(6)}
    assert len(outs) > 1


def test_steer_rejects_bad_input():
    with pytest.raises(ValueError):
        steer([], Interval(0, 1), 0)
    with pytest.raises(ValueError):
        steer([], Interval(1, 1), 1)


def _third_bits(positions) -> Fraction:
    # 1/3 = 0.010101..._2: bit k is set exactly for even k
    return sum((Fraction(1, 2 ** k) for k in positions if k % 2 == 0), Fraction(0))


def test_split_sum_one_third_blocks():
    xi, eta, (c1, c2) = erdos_split_sum(Fraction(1, 3), 3)
    assert block_cut(1) == 6 and block_cut(2) == 24 and block_cut(3) == 120
    K = 300
    xi_pos = [k for k in range(1, K) if 6 <= k < 24 or 120 <= k < 720]
    eta_pos = [k for k in range(1, K) if k not in set(xi_pos)]
    for part, pos in ((xi, xi_pos), (eta, eta_pos)):
        head = _third_bits(pos)
        iv = refine(part, K + 8)
        assert head - Fraction(1, 2 ** (K + 7)) <= iv.lo and iv.hi <= head + Fraction(1, 2 ** (K - 2))
    assert refine(field_op("add", xi, eta), 200).contains(Fraction(1, 3))
    assert verify_certificate(xi, c1) and verify_certificate(eta, c2)
    assert independent_check(xi, c1) and independent_check(eta, c2)


def test_split_sum_zero_is_series_pair():
    xi, eta, (c1, c2) = erdos_split_sum(Fraction(0), 2)
    assert refine(xi, 40).contains(factorial_sum(2, 4))
    total = refine(field_op("add", xi, eta), 100)
    assert total.contains(0) and total.width <= Fraction(1, 2 ** 100)
    assert verify_certificate(xi, c1) and verify_certificate(eta, c2)


def test_split_sum_liouville_plus_third():
    t = field_op("add", series_constant(), Fraction(1, 3))
    xi, eta, (c1, c2) = erdos_split_sum(t, 2)
    s = refine(field_op("add", xi, eta), 120)
    assert s.lo <= refine(t, 120).hi and refine(t, 120).lo <= s.hi
    assert verify_certificate(xi, c1) and verify_certificate(eta, c2)


@pytest.mark.parametrize("t,N", [(Fraction(2), 2), (Fraction(1), 1), (Fraction(-1), 2)])
def test_split_prod(t, N):
    xi, eta, (c1, c2) = erdos_split_prod(t, N)
    assert refine(field_op("mul", xi, eta), 80).contains(t)
    assert (refine(xi, 10).lo > 0) == (t > 0)
    assert independent_check(xi, c1) and independent_check(eta, c2)


def test_split_prod_zero_rejected():
    with pytest.raises(NotSeparatedFromZero):
        erdos_split_prod(Fraction(0), 2)


@pytest.mark.parametrize("text,I,J", [
    ("x + y - 1", UNIT, UNIT),
    ("x^2 + y^2 - 1", UNIT, UNIT),
    ("x*y - 2", Interval(Fraction(3, 2), Fraction(5, 2)), Interval(Fraction(1, 2), Fraction(3, 2))),
])
def test_implicit_pairs(text, I, J):
    P = BivarPolyQ.parse(text)
    xi, eta, (c1, c2) = implicit_pair(P, I, J, 2)
    ix, iy = refine(xi, 10), refine(eta, 10)
    assert I.contains_interval(ix) and J.lo <= iy.hi and iy.lo <= J.hi
    for k in (40, 100):
        assert P.eval_interval(refine(xi, k + 20), refine(eta, k + 20)).contains(0)
    assert independent_check(xi, c1) and independent_check(eta, c2)


def test_implicit_pair_errors():
    with pytest.raises(NoRootInJ):
        implicit_pair(BivarPolyQ.parse("x*y - 2"), UNIT, UNIT, 1)
    cubic = BivarPolyQ.parse("(y-1/5)*(y-1/2)*(y-4/5) + x/1000")
    with pytest.raises(NonMonotoneSlice):
        implicit_pair(cubic, Interval(Fraction(1, 10), Fraction(1, 5)), Interval(0, 1), 1)


def test_orbit_depth_zero():
    xi, certs = orbit_construct(add_const(1), 0, 2)
    assert list(certs) == [0] and independent_check(xi, certs[0])


def test_orbit_add_one():
    xi, certs = orbit_construct(add_const(1), 1, 2)
    assert sorted(certs) == [-1, 0, 1]
    base = refine(xi, 60)
    for k, cert in certs.items():
        y = orbit_element(xi, k)
        assert refine(y, 60).contains(base.mid + k) or abs(refine(y, 60).mid - base.mid - k) < Fraction(1, 2 ** 58)
        assert independent_check(y, cert)


def test_orbit_exp():
    xi, certs = orbit_construct(exp_scale(1), 1, 1, I0=Interval(Fraction(1, 2), 1))
    e_xi = orbit_element(xi, 1)
    x = refine(xi, 80)
    assert mp_contains(refine(e_xi, 40), mpmath.exp(mpmath.mpf(x.mid.numerator) / x.mid.denominator), 38)
    for k, cert in certs.items():
        assert independent_check(orbit_element(xi, k), cert)


def test_witnesses_from_log_match_certificates():
    _, xi, log = steer([sub_from(sqrt(2))], Interval(0, 1), 2)
    for i, cert in enumerate(certify_steered(xi, 2)):
        for w in cert.witnesses:
            assert log.witness(i, w.n) == w

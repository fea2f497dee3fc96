"""Acceptance criteria, one test each; every test prints a single pass/fail line."""
from __future__ import annotations

import itertools
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from liouvillekit.cfrac import best_approx_check, cf_expand, convergents, maillet_root_witnesses
from liouvillekit.constructor import (
    certify_steered,
    erdos_split_prod,
    erdos_split_sum,
    implicit_pair,
    orbit_construct,
    orbit_element,
    steer,
    steered_image,
)
from liouvillekit.core import certify_level, series_constant, verify_certificate
from liouvillekit.errors import WitnessSearchExhausted
from liouvillekit.expindep import (
    alg_indep_exp,
    burger_annihilator,
    lin_indep_exp,
    series_algebraic_oracle_many,
    series_dependence_oracle_many,
    series_relation_check,
)
from liouvillekit.maps import add_const, exp_scale, sub_from
from liouvillekit.poly import BivarPolyQ, PolyQ
from liouvillekit.reals import Interval, as_real, field_op, refine, sqrt

from conftest import ACCEPTANCE_LINES
from oracles import bisect_sqrt, factorial_sum, in_ball


@contextmanager
def criterion(number: int, title: str, limit: float):
    """Time the body and print one line; fails on assertion or on exceeding the limit."""
    state = {"detail": ""}
    t0 = time.perf_counter()
    ok = False
    try:
        yield state
        ok = True
    finally:
        dt = time.perf_counter() - t0
        within = dt < limit
        verdict = "PASS" if ok and within else "FAIL"
        extra = f"; {state['detail']}" if state["detail"] else ""
        why = "" if ok else "; assertion failed"
        line = f"criterion {number}: {verdict} {title} ({dt:.2f} s, limit {limit:g} s{extra}{why})"
        ACCEPTANCE_LINES.append(line)
        print(line)
    assert within, f"runtime {dt:.2f} s exceeds {limit} s"


def independently_verified(x, cert) -> bool:
    """Each witness ball holds an enclosure of x that excludes p/q."""
    for w in cert.witnesses:
        k = w.n * w.q.bit_length() + 64
        while True:
            iv = refine(x, k)
            if in_ball(iv.lo, iv.hi, w.p, w.q, w.n):
                break
            k *= 2
            if k > 1 << 20:
                return False
    return True


def test_criterion_01_classical_constant():
    with criterion(1, "classical constant certified to level 6", 5) as st:
        x = series_constant(10, "factorial")
        cert = certify_level(x, 6)
        assert [w.n for w in cert.witnesses] == [1, 2, 3, 4, 5, 6]
        # x lies in [S_7, S_7 + 2 * 10^-(8!)] where S_7 is the seven-term sum
        lo = factorial_sum(10, 7)
        hi = lo + Fraction(2, 10 ** math.factorial(8))
        for w in cert.witnesses:
            assert w.q == 10 ** math.factorial(w.n)
            assert in_ball(lo, hi, w.p, w.q, w.n)
        assert verify_certificate(x, cert)
        st["detail"] = "6 witnesses, exact rational check"


def _bit_prefix(x, K: int) -> int:
    """floor(2^K x), read off an enclosure tight enough to decide it."""
    k = K + 32
    while True:
        iv = refine(x, k)
        a, b = math.floor(iv.lo * 2 ** K), math.floor(iv.hi * 2 ** K)
        if a == b:
            return a
        k *= 2
        assert k < 1 << 16, "prefix undecided"


@pytest.mark.parametrize("label", ["1/3", "L+1/3"])
def test_criterion_02_sum_split(label):
    t = Fraction(1, 3) if label == "1/3" else field_op("add", series_constant(), Fraction(1, 3))
    with criterion(2, f"sum split of {label} at level 5", 10) as st:
        xi, eta, (c1, c2) = erdos_split_sum(t, 5)
        K = 256
        bx, be = _bit_prefix(xi, K), _bit_prefix(eta, K)
        frac_x, frac_e = bx % (1 << K), be % (1 << K)
        assert frac_x & frac_e == 0
        assert bx + be == _bit_prefix(as_real(t), K)
        s = refine(field_op("add", xi, eta), 200)
        ti = refine(as_real(t), 260)
        assert s.contains_interval(ti)
        assert verify_certificate(xi, c1) and verify_certificate(eta, c2)
        assert independently_verified(xi, c1) and independently_verified(eta, c2)
        st["detail"] = f"first {K} bits disjoint"


def test_criterion_03_product_split():
    with criterion(3, "product split of 2 at level 4", 10):
        xi, eta, (c1, c2) = erdos_split_prod(Fraction(2), 4)
        assert refine(field_op("mul", xi, eta), 100).contains(2)
        assert verify_certificate(xi, c1) and verify_certificate(eta, c2)
        assert independently_verified(xi, c1) and independently_verified(eta, c2)


def test_criterion_04_two_squares():
    with criterion(4, "two squares pair at level 4", 20) as st:
        P = BivarPolyQ.parse("x^2 + y^2 - 1")
        box = Interval(Fraction(1, 10), Fraction(9, 10))
        xi, eta, (c1, c2) = implicit_pair(P, box, box, 4)
        r = refine(field_op("sub", field_op("add", field_op("mul", xi, xi), field_op("mul", eta, eta)), 1), 100)
        assert r.contains(0) and r.width < Fraction(1, 2 ** 80)
        assert verify_certificate(xi, c1) and verify_certificate(eta, c2)
        assert independently_verified(xi, c1) and independently_verified(eta, c2)
        st["detail"] = f"residual width 2^{math.floor(math.log2(r.width)) if r.width else '-inf'}"


def test_criterion_05_iterated_exponential():
    with criterion(5, "xi, e^xi, e^e^xi certified to level 3", 30):
        e = exp_scale(1)
        _, xi, log = steer([e, e.compose(e)], Interval(0, 1), 3)
        assert log.check()
        certs = certify_steered(xi, 3)
        assert len(certs) == 3
        for i, cert in enumerate(certs):
            y = xi if i == 0 else steered_image(xi, i)
            assert [w.n for w in cert.witnesses] == [1, 2, 3]
            assert verify_certificate(y, cert)


def test_criterion_06_orbit():
    with criterion(6, "orbit of x+1 at depth 2, level 3", 10):
        xi, certs = orbit_construct(add_const(1), 2, 3)
        assert sorted(certs) == [-2, -1, 0, 1, 2]
        for k, cert in certs.items():
            y = orbit_element(xi, k)
            assert verify_certificate(y, cert) and independently_verified(y, cert)


def acceptance_family() -> list[list[PolyQ]]:
    """Multisets of size 1..3 over canonical s-images with coefficients in {-2..2} and degree <= 3.

    Each s-image is primitive with positive leading coefficient (plus zero);
    constants are dropped since the exponent-basis reduction removes them.
    """
    vecs = [(0, 0, 0)]
    for v in itertools.product(range(-2, 3), repeat=3):
        nz = [c for c in v if c]
        if nz and nz[-1] > 0 and math.gcd(*v) == 1:
            vecs.append(v)
    family = [t for m in (1, 2, 3) for t in itertools.combinations_with_replacement(vecs, m)]
    return [[PolyQ((0,) + v) for v in t] for t in family]


def test_criterion_07_oracle_agreement():
    with criterion(7, "exponential independence verdicts agree with the series oracle", 60) as st:
        fam = acceptance_family()
        lin = [lin_indep_exp(gs) for gs in fam]
        alg = [alg_indep_exp(gs) for gs in fam]
        series = series_dependence_oracle_many(fam, B=3, T=60)
        lin_bad = sum(a.independent != s.independent for a, s in zip(lin, series))
        ind = [gs for gs, v in zip(fam, alg) if v.independent]
        dep = [(gs, v.witness) for gs, v in zip(fam, alg) if not v.independent]
        box = series_algebraic_oracle_many(ind, B=3, T=60)
        alg_bad = sum(not v.independent for v in box)
        alg_bad += sum(series_relation_check(gs, rel, B=3, T=60).independent for gs, rel in dep)
        st["detail"] = (f"{len(fam)} instances, {lin_bad} linear and {alg_bad} algebraic disagreements")
        assert len(fam) == 23425
        assert lin_bad == 0 and alg_bad == 0


def test_criterion_08_powers_of_z():
    with criterion(8, "z, ..., z^m algebraically independent for m <= 8", 1):
        for m in range(1, 9):
            assert alg_indep_exp([PolyQ([0] * k + [1]) for k in range(1, m + 1)]).independent


def test_criterion_09_burger():
    with criterion(9, "annihilator of xi + eta = sqrt(2)", 15) as st:
        A = burger_annihilator(PolyQ.parse("z^2 - 2"), BivarPolyQ.parse("x + y"))
        assert A == BivarPolyQ({(2, 0): 1, (1, 1): 2, (0, 2): 1, (0, 0): -2})
        _, xi, log = steer([sub_from(sqrt(2))], Interval(0, 1), 3)
        eta = steered_image(xi, 1)
        certs = certify_steered(xi, 3)
        assert verify_certificate(xi, certs[0]) and verify_certificate(eta, certs[1])
        ix, iy = refine(xi, 120), refine(eta, 120)
        val = A.eval_interval(ix, iy)
        assert val.contains(0) and val.width < Fraction(1, 2 ** 80)
        st["detail"] = "A = X^2 + 2XY + Y^2 - 2"


def test_criterion_10_cfrac_invariants():
    with criterion(10, "continued fraction invariants on 1000 rationals and sqrt(2)", 30):
        rng = random.Random(10)
        xs = [as_real(Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 10 ** 5))) for _ in range(1000)]
        xs.append(sqrt(2))
        for x in xs:
            cf = cf_expand(x, 10)
            conv = convergents(cf)
            for k in range(1, len(conv)):
                (p0, q0), (p1, q1) = conv[k - 1], conv[k]
                assert abs(p1 * q0 - p0 * q1) == 1
            for k in range(len(conv) - 1):
                p, q = conv[k]
                q_next = conv[k + 1][1]
                iv = refine(x, 2 * (q * q_next).bit_length() + 64)
                err = max(abs(iv.lo - Fraction(p, q)), abs(iv.hi - Fraction(p, q)))
                last = cf.exact and k + 1 == len(conv) - 1
                # a rational equals its last convergent, where the bound is attained
                assert err <= Fraction(1, q * q_next) if last else err < Fraction(1, q * q_next)
            for p, q in conv:
                if q >= 2:
                    assert best_approx_check(x, p, q)


def test_criterion_11_maillet():
    with criterion(11, "Maillet square convergents", 20) as st:
        L = series_constant()
        got = maillet_root_witnesses(field_op("mul", L, L), 2, 12)
        none = maillet_root_witnesses(sqrt(2), 2, 10)
        st["detail"] = f"square of the constant gives {got}, sqrt(2) gives {none}"
        assert none == []
        assert len(got) >= 3


def test_criterion_12_negative_control():
    with criterion(12, "sqrt(2) has no level-3 certificate", 10) as st:
        try:
            cert = certify_level(sqrt(2), 3)
        except WitnessSearchExhausted:
            st["detail"] = "WitnessSearchExhausted"
        else:
            st["detail"] = "found " + ", ".join(f"{w.p}/{w.q} at level {w.n}" for w in cert.witnesses)
            raise AssertionError("certify_level succeeded")


def test_companion_11_maillet_deep_prefix():
    # the square-convergent indices of the squared constant appear only far past depth 12
    L = series_constant()
    assert maillet_root_witnesses(field_op("mul", L, L), 2, 400, budget=1 << 16) == [20, 90, 372]


def test_companion_12_sqrt2_level_four_exhausts():
    # 3/2 is a genuine level-3 witness for sqrt(2); level 4 has none
    w = certify_level(sqrt(2), 3).witnesses[2]
    assert in_ball(*bisect_sqrt(Fraction(2), 80), w.p, w.q, 3)
    with pytest.raises(WitnessSearchExhausted):
        certify_level(sqrt(2), 4)

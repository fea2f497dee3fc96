"""Interval-nesting construction of points whose images are all Liouville-certified.

At each stage one map f and one level n are handled: f is evaluated on the
current interval with certified bounds, a rational p/q is placed in the
middle half of the certified image, and the interval is shrunk to a closed
piece whose image lies in one half of the punctured ball of radius q^-n
around p/q.  Stages for levels 1..N are logged; further stages at higher
levels keep shrinking the interval and define the point itself.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import LiouvilleCertificate, SeriesConstant, Witness, certify_level, series_constant
from .errors import (
    BudgetExceeded,
    DomainEscape,
    ImageCollapse,
    NoRootInJ,
    NotSeparatedFromZero,
    RefinementBudgetExceeded,
)
from .maps import (
    CatalogMap,
    ImplicitMap,
    _width_bits,
    check_monotone_slice,
    identity,
    iterate,
    reciprocal_scale,
)
from .poly import BivarPolyQ
from .reals import ExactReal, Interval, Recipe, as_real, field_op, to_q

IMAGE_BUDGET = 4096
STAGE_LIMIT = 4096
SPLIT_BUDGET = 1 << 15


@dataclass(frozen=True)
class Stage:
    map_index: int
    level: int
    p: int
    q: int
    before: Interval
    after: Interval
    image: Interval  # certified enclosure of f(after)


@dataclass(frozen=True)
class ConstructionLog:
    maps: tuple[str, ...]
    I0: Interval
    N: int
    seed: int | None
    stages: tuple[Stage, ...]

    def witness(self, i: int, n: int) -> Witness | None:
        for s in self.stages:
            if s.map_index == i and s.level == n:
                return Witness(n, s.p, s.q)
        return None

    def check(self) -> bool:
        """Strict nesting and stage soundness, re-checked from the logged data."""
        current = self.I0
        for s in self.stages:
            if s.before != current or not s.before.contains_interval(s.after) or s.after == s.before:
                return False
            center, r = Fraction(s.p, s.q), Fraction(1, s.q ** s.level)
            if not (center - r < s.image.lo and s.image.hi < center + r):
                return False
            if s.image.contains(center):
                return False
            current = s.after
        return True


def dovetail(m: int, N: int) -> list[tuple[int, int]]:
    """Pairs (i, n), 0 <= i <= m, 1 <= n <= N, ordered by i + n then i."""
    pairs = [(i, n) for i in range(m + 1) for n in range(1, N + 1)]
    return sorted(pairs, key=lambda p: (p[0] + p[1], p[0]))


def _min_shift(num: int, den: int, strict: bool) -> int:
    """Least s >= 0 with num * 2^s > den (strict) or >= den."""
    s = max(0, den.bit_length() - num.bit_length())
    while (num << s) < den or (strict and (num << s) == den):
        s += 1
    return s


def _choose_q(width: Fraction, n: int) -> int:
    """Smallest power of 2 with q^-n < width/4 and 1/q <= width/4."""
    quarter = width / 4
    num, den = quarter.numerator, quarter.denominator
    e_ball = -(-_min_shift(num, den, True) // n)
    e_grid = _min_shift(num, den, False)
    return 1 << max(1, e_ball, e_grid)


def _enclose_tight(f: CatalogMap, a: Fraction, tol: Fraction, start: int) -> Interval:
    j = start
    while True:
        iv = f.enclose(a, j)
        if iv.width < tol:
            return iv
        if j > start + IMAGE_BUDGET:
            raise RefinementBudgetExceeded(f"cannot enclose {f} at {a} to width {tol}")
        j += 16


def _window_point(f: CatalogMap, I: Interval, d: int, alpha: Fraction, beta: Fraction
                  ) -> tuple[Fraction, Interval]:
    """A rational x in I with f(x) certified in the open window (alpha, beta).

    Steps interpolate linearly between the current bracket ends, with every
    third step a plain bisection; the bracket itself only moves on certified
    comparisons with the window center.
    """
    gamma = (alpha + beta) / 2
    tol = (beta - alpha) / 4
    start = _width_bits(Interval(alpha, beta)) + 8
    lo, hi = I.lo, I.hi
    f_lo = _enclose_tight(f, lo, tol, start).mid
    f_hi = _enclose_tight(f, hi, tol, start).mid
    for step in range(1, STAGE_LIMIT + 1):
        m = (lo + hi) / 2
        if step % 3 and f_hi != f_lo:
            slope = abs(f_hi - f_lo) / (hi - lo)
            guess = lo + (gamma - f_lo) / (f_hi - f_lo) * (hi - lo)
            g = 1 << (_width_bits(Interval(0, tol / slope)) + 8)
            guess = Fraction(round(guess * g), g)
            if lo < guess < hi:
                m = guess
        enc = _enclose_tight(f, m, tol, start)
        if alpha < enc.lo and enc.hi < beta:
            return m, enc
        if (enc.lo > gamma) == (d > 0):
            hi, f_hi = m, enc.mid
        else:
            lo, f_lo = m, enc.mid
    raise BudgetExceeded(f"window search for {f} did not converge")


class _Steering:
    """The logged stage sequence of one steering run."""

    def __init__(self, maps: Sequence[CatalogMap], I0: Interval, N: int, seed: int | None):
        self.maps = [identity(), *maps]
        self.I0, self.N, self.seed = I0, N, seed
        self.rng = random.Random(seed)
        self.current = I0
        self.stages: list[Stage] = []
        for f in self.maps:
            if not f.admits(I0):
                raise DomainEscape(f"{f} is not admitted on {I0}")

    def run(self) -> None:
        for i, n in dovetail(len(self.maps) - 1, self.N):
            self.step(i, n)

    def step(self, i: int, n: int) -> Stage:
        f, I = self.maps[i], self.current
        d = f.direction(I)
        bits = _width_bits(I) + 24
        while True:
            outer, inner = f.image(I, bits)
            if inner is not None and inner.width * 2 >= outer.width:
                break
            if bits > _width_bits(I) + IMAGE_BUDGET:
                raise ImageCollapse(f"certified image of {f} on {I} does not open up")
            bits += 32
        q = _choose_q(inner.width, n)
        p = round(inner.mid * q)
        center, r = Fraction(p, q), Fraction(1, q ** n)
        side = 1 if self.seed is None else self.rng.choice((1, -1))
        t_lo, t_hi = sorted((center + side * r / 4, center + side * 3 * r / 4))
        third = (t_hi - t_lo) / 3
        x1, e1 = _window_point(f, I, d, t_lo, t_lo + third)
        x2, e2 = _window_point(f, I, d, t_hi - third, t_hi)
        after = Interval(min(x1, x2), max(x1, x2))
        stage = Stage(i, n, p, q, I, after, e1.hull(e2))
        self.stages.append(stage)
        self.current = after
        return stage


class SteeredSource:
    """Witness provider for map i of a steering run (0 is the identity)."""

    def __init__(self, log: ConstructionLog, index: int):
        self.log, self.index = log, index

    def witness(self, n: int) -> tuple[int, int] | None:
        w = self.log.witness(self.index, n)
        return None if w is None else (w.p, w.q)


def _steer_recipe(maps: Sequence[CatalogMap], I0: Interval, N: int, seed, role: str,
                  index: int | None = None) -> Recipe:
    params = {"maps": [f.to_json() for f in maps], "interval": [str(I0.lo), str(I0.hi)],
              "level": N, "seed": seed, "role": role}
    if index is not None:
        params["index"] = index
    return Recipe("steered", params)


class InteriorPoint:
    """c + sum_{k>=K} 2^-(k!) with c dyadic, placed inside an interval F.

    c sits a quarter-width above F.lo and the tail is below width/4, so the
    point lies strictly inside F; as a rational plus a Liouville series it
    is itself a Liouville number.
    """

    def __init__(self, F: Interval):
        w = F.width
        self.b = _width_bits(F) + 3
        self.a = math.ceil((F.lo + w / 4) * (1 << self.b))
        K = 1
        while Fraction(2, 1 << math.factorial(K)) >= w / 4:
            K += 1
        self.K = K

    def approx(self, k: int) -> Interval:
        M = max(k + 3, self.b)
        S, j = 0, self.K
        while math.factorial(j) <= M:
            S += 1 << (M - math.factorial(j))
            j += 1
        base = (self.a << (M - self.b)) + S
        # remaining terms sum to at most 2 * 2^-(j!) <= 2^-M
        return Interval(Fraction(base, 1 << M), Fraction(base + 1, 1 << M))


def steer(maps: Sequence[CatalogMap], I0: Interval, N: int, seed: int | None = None
          ) -> tuple[Interval, ExactReal, ConstructionLog]:
    """Nest intervals so the point and each f_i(point) are certified to level N.

    The identity map is prepended and the pairs (i, n) are processed in
    dovetailed order.  The point is a dyadic rational plus a Liouville tail
    chosen inside the final interval.  ``seed`` picks, per stage, which half
    of the punctured ball is targeted; None always takes the upper half.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if not I0.lo < I0.hi:
        raise ValueError("initial interval must have lo < hi")
    engine = _Steering(maps, I0, N, seed)
    engine.run()
    log = ConstructionLog(tuple(str(f) for f in engine.maps), I0, N, seed, tuple(engine.stages))
    final = log.stages[-1].after
    point = ExactReal(InteriorPoint(final).approx, recipe=_steer_recipe(maps, I0, N, seed, "point"),
                      source=SteeredSource(log, 0))
    point.steering = (engine.maps, log)
    return final, point, log


def steered_image(point: ExactReal, i: int) -> ExactReal:
    """f_i(point) for a steered point, carrying the witnesses from the log (i >= 1)."""
    maps, log = point.steering
    value = maps[i].apply(point)
    rec = point.recipe.to_json()
    params = {k: v for k, v in rec.items() if k != "kind"}
    params.update(role="image", index=i)
    return ExactReal(value.refine, recipe=Recipe("steered", params),
                     source=SteeredSource(log, i))


def certify_steered(point: ExactReal, N: int) -> list[LiouvilleCertificate]:
    """Certificates for the point and every map image, read from the log."""
    maps, _ = point.steering
    out = [certify_level(point, N)]
    for i in range(1, len(maps)):
        out.append(certify_level(steered_image(point, i), N))
    return out


# -- binary block splitting -------------------------------------------------

def block_cut(j: int) -> int:
    """Cut point m_j = (j+2)!; block j covers bit positions [m_j, m_{j+1})."""
    return math.factorial(j + 2)


def _block_of(pos: int) -> int:
    """Block index of bit position pos >= 1 (0 for positions below m_1)."""
    j = 0
    while block_cut(j + 1) <= pos:
        j += 1
    return j


class BinaryDigits:
    """Certified binary digits of a real: floor(2^m t) for growing m."""

    def __init__(self, t: ExactReal, budget: int = SPLIT_BUDGET):
        self.t, self.budget = t, budget
        self._m, self._A = -1, None
        self.lock = threading.RLock()

    def prefix(self, m: int) -> int:
        """floor(2^m t)."""
        with self.lock:
            if m <= self._m:
                return self._A >> (self._m - m)
            t = self.t
            if t.exact is not None:
                A = math.floor(t.exact * (1 << m))
            else:
                j = m + 8
                while True:
                    iv = t.refine(j)
                    lo, hi = math.floor(iv.lo * (1 << m)), math.floor(iv.hi * (1 << m))
                    if lo == hi:
                        A = lo
                        break
                    if j >= self.budget:
                        raise BudgetExceeded(f"binary digit {m} of t undecided at precision {self.budget}")
                    j = min(2 * j, self.budget)
            self._m, self._A = m, A
            return A

    def integer_part(self) -> int:
        return self.prefix(0)

    def bit(self, pos: int) -> int:
        return self.prefix(pos) & 1


def _part_sum(digits: BinaryDigits, part: int, M: int) -> Fraction:
    """Sum of the bits at positions 1..M that belong to the part (1 = xi, 0 = eta)."""
    A = digits.prefix(M)
    frac = A - (digits.integer_part() << M)
    total = 0
    pos = 1
    while pos <= M:
        j = _block_of(pos)
        end = min(M, block_cut(j + 1) - 1)
        owner = 1 if j % 2 == 1 else 0
        if owner == part:
            width = end - pos + 1
            chunk = (frac >> (M - end)) & ((1 << width) - 1)
            total += chunk << (M - end)
        pos = end + 1
    value = Fraction(total, 1 << M)
    if part == 0:
        value += digits.integer_part()
    return value


class SplitPart:
    """One half of a block split; also supplies witnesses from its zero blocks."""

    def __init__(self, digits: BinaryDigits, part: int):
        self.digits, self.part = digits, part

    def approx(self, k: int) -> Interval:
        M = k + 3
        s = _part_sum(self.digits, self.part, M)
        return Interval(s, s + Fraction(1, 1 << M))

    def witness(self, n: int) -> tuple[int, int] | None:
        """Truncate just before a block owned by the other part.

        With m = m_j and the part zero on [m_j, m_{j+1}), q = 2^(m-1) gives
        |x - p/q| <= 2^-(m_{j+1}-1) <= q^-n once m_{j+1} - 1 >= n (m_j - 1).
        """
        j = 2 if self.part == 1 else 1
        while True:
            m, m_next = block_cut(j), block_cut(j + 1)
            if m_next - 1 >= n * (m - 1) and self._tail_nonzero(j):
                q = 1 << (m - 1)
                return int(_part_sum(self.digits, self.part, m - 1) * q), q
            j += 2
            if block_cut(j) > SPLIT_BUDGET:
                return None

    def _tail_nonzero(self, j: int) -> bool:
        """The part has a nonzero bit in block j + 1 (so x is not the truncation)."""
        lo, hi = block_cut(j + 1), min(block_cut(j + 2) - 1, SPLIT_BUDGET)
        if lo > hi:
            return False
        A = self.digits.prefix(hi)
        block = A & ((1 << (hi - lo + 1)) - 1)
        return block != 0


class _DyadicShift:
    """Witnesses for t - xi from those of xi, when t = a / 2^s."""

    def __init__(self, t: Fraction, xi: SeriesConstant):
        self.t, self.xi = t, xi

    def witness(self, n: int) -> tuple[int, int] | None:
        pq = self.xi.witness(n)
        if pq is None:
            return None
        p, q = pq
        s = self.t.denominator.bit_length() - 1
        k = 1
        while q < (1 << s):
            k += 1
            p, q = self.xi.witness(n + k) or (None, None)
            if q is None:
                return None
        return int(self.t * q) - p, q


def _is_dyadic(v: Fraction) -> bool:
    d = v.denominator
    return d & (d - 1) == 0


def split_sum_parts(t) -> tuple[ExactReal, ExactReal]:
    """The two block-split parts of t, without certification."""
    t = as_real(t)
    t_rec = t.recipe.to_json() if t.recipe else None

    def recipe(part: str) -> Recipe:
        return Recipe("split-sum", {"t": t_rec, "part": part})

    if t.exact is not None and _is_dyadic(t.exact):
        sc = SeriesConstant(2, "factorial", 1)
        xi = ExactReal(sc.approx, recipe=recipe("xi"), source=sc)
        eta = ExactReal(field_op("sub", t, xi).refine, recipe=recipe("eta"),
                        source=_DyadicShift(t.exact, sc))
        return xi, eta
    digits = BinaryDigits(t)
    xs, es = SplitPart(digits, 1), SplitPart(digits, 0)
    xi = ExactReal(xs.approx, recipe=recipe("xi"), source=xs)
    eta = ExactReal(es.approx, recipe=recipe("eta"), source=es)
    xi.split = eta.split = (xs, es)
    return xi, eta


def erdos_split_sum(t, N: int) -> tuple[ExactReal, ExactReal, tuple[LiouvilleCertificate, LiouvilleCertificate]]:
    """t = xi + eta with both parts certified Liouville to level N.

    xi carries the binary digits of t on the blocks [m_1, m_2), [m_3, m_4), ...
    with m_j = (j+2)!; eta carries the integer part and all other digits.
    A dyadic t has no infinite digit stream to split; then xi is the binary
    factorial series and eta = t - xi.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    xi, eta = split_sum_parts(t)
    return xi, eta, (certify_level(xi, N), certify_level(eta, N))


def split_prod_parts(t, N: int, seed: int | None = None) -> tuple[ExactReal, ExactReal]:
    """Steered factors of t, without certification."""
    t = as_real(t)
    sep = t.separation()
    if sep is None:
        raise NotSeparatedFromZero("cannot split a value not separated from zero")
    I0 = Interval(1, 2) if t.refine(sep).lo > 0 else Interval(-2, -1)
    _, xi, _ = steer([reciprocal_scale(t)], I0, N, seed)
    eta = steered_image(xi, 1)
    t_rec = t.recipe.to_json() if t.recipe else None
    out = []
    for part, v in (("xi", xi), ("eta", eta)):
        r = ExactReal(v.refine, recipe=Recipe("split-prod", {"t": t_rec, "level": N, "seed": seed,
                                                             "part": part}), source=v.source)
        r.steering = xi.steering
        out.append(r)
    return out[0], out[1]


def erdos_split_prod(t, N: int, seed: int | None = None
                     ) -> tuple[ExactReal, ExactReal, tuple[LiouvilleCertificate, LiouvilleCertificate]]:
    """t = xi * eta by steering x -> t/x on [1, 2] (or [-2, -1] for t < 0)."""
    xi, eta = split_prod_parts(t, N, seed)
    return xi, eta, (certify_level(xi, N), certify_level(eta, N))


def root_subinterval(P: BivarPolyQ, I: Interval, J: Interval, pieces: int = 64) -> Interval:
    """Longest run of x-boxes of I on which P(x, J.lo) and P(x, J.hi) have certified opposite signs."""
    step = I.width / pieces
    good = []
    for k in range(pieces):
        box = Interval(I.lo + k * step, I.lo + (k + 1) * step)
        a = P.eval_interval(box, Interval.point(J.lo))
        b = P.eval_interval(box, Interval.point(J.hi))
        good.append((a.hi < 0 < b.lo) or (b.hi < 0 < a.lo))
    best, run_start, best_run = None, None, 0
    for k, ok in enumerate(good + [False]):
        if ok and run_start is None:
            run_start = k
        elif not ok and run_start is not None:
            if k - run_start > best_run:
                best, best_run = (run_start, k), k - run_start
            run_start = None
    if best is None:
        raise NoRootInJ(f"P(x, y) = 0 has no certified root y in {J} for x in {I}")
    return Interval(I.lo + best[0] * step, I.lo + best[1] * step)


def implicit_pair(P: BivarPolyQ, I: Interval, J: Interval, N: int, seed: int | None = None
                  ) -> tuple[ExactReal, ExactReal, tuple[LiouvilleCertificate, LiouvilleCertificate]]:
    """Liouville pair (xi, eta) in I x J with P(xi, eta) = 0.

    The steering interval is the part of I over which a root in J is
    certified; P must be monotone in y there.
    """
    Ix = root_subinterval(P, I, J)
    y_sign, x_sign = check_monotone_slice(P, Ix, J)
    phi = ImplicitMap(P, Ix, J, y_sign, x_sign)
    _, xi, _ = steer([phi], Ix, N, seed)
    eta = steered_image(xi, 1)
    return xi, eta, (certify_level(xi, N), certify_level(eta, N))


def orbit_construct(phi: CatalogMap, depth: int, N: int, I0: Interval | None = None,
                    seed: int | None = None) -> tuple[ExactReal, dict[int, LiouvilleCertificate]]:
    """A point whose orbit elements phi^k(xi), |k| <= depth, are all certified."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    I0 = I0 or Interval(0, 1)
    ks = [k for k in range(-depth, depth + 1) if k != 0]
    maps = [iterate(phi, k) for k in ks]
    _, xi, _ = steer(maps, I0, N, seed)
    certs = {0: certify_level(xi, N)}
    for idx, k in enumerate(ks, start=1):
        certs[k] = certify_level(steered_image(xi, idx), N)
    return xi, dict(sorted(certs.items()))


def orbit_element(xi: ExactReal, k: int) -> ExactReal:
    """phi^k(xi) for a point built by orbit_construct."""
    if k == 0:
        return xi
    maps, _ = xi.steering
    depth = (len(maps) - 1) // 2
    ks = [j for j in range(-depth, depth + 1) if j != 0]
    return steered_image(xi, ks.index(k) + 1)

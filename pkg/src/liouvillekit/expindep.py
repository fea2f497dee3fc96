"""Independence of exponentials of polynomials over Q[z].

e^{g_1}, ..., e^{g_n} are linearly independent over C(z) iff no difference
g_i - g_j is constant; e^{f_1}, ..., e^{f_m} are algebraically independent
iff the images of the f_j modulo constants are Q-linearly independent.  Both
tests reduce to exact linear algebra on coefficient vectors.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .errors import ConstantF, InvalidRelation, ZeroP
from .linalg import (
    PRIME,
    first_kernel_vector_mod_p,
    nullspace,
    primitive_integer,
    ranks_mod_p,
    rref,
    to_residue,
)
from .poly import BivarPolyQ, PolyQ

DEPENDENT = "dependent"
INDEPENDENT = "independent"


@dataclass(frozen=True)
class SImage:
    """Coefficients of z^1..z^D; the class of a polynomial modulo constants."""

    coeffs: tuple[Fraction, ...]

    def is_zero(self) -> bool:
        return not self.coeffs

    def vector(self, D: int) -> list[Fraction]:
        return [self.coeffs[i] if i < len(self.coeffs) else Fraction(0) for i in range(D)]


def s_image(g: PolyQ) -> SImage:
    return SImage(g.coeffs[1:])


@dataclass(frozen=True)
class IntegerRelation:
    """a_1 f_1 + ... + a_m f_m = c, with a primitive and leading entry positive."""

    a: tuple[int, ...]
    c: Fraction

    def holds_for(self, fs: Sequence[PolyQ]) -> bool:
        if len(fs) != len(self.a):
            return False
        total = PolyQ()
        for aj, f in zip(self.a, fs):
            total = total + f * aj
        return total == PolyQ([self.c])


@dataclass(frozen=True)
class IndepVerdict:
    status: str
    witness: object = None

    @property
    def independent(self) -> bool:
        return self.status == INDEPENDENT


@dataclass(frozen=True)
class ExponentBasis:
    """g_i = sum_j lam[i][j] * basis[j] + c[i] with integer lam."""

    basis: tuple[PolyQ, ...]
    lam: tuple[tuple[int, ...], ...]
    c: tuple[Fraction, ...]

    def _combine(self, i: int, constant: Fraction) -> PolyQ:
        D = max((len(f.coeffs) for f in self.basis), default=1)
        den = math.lcm(*(v.denominator for f in self.basis for v in f.coeffs))
        acc = [0] * D
        for lij, f in zip(self.lam[i], self.basis):
            if lij:
                for d, v in enumerate(f.coeffs):
                    acc[d] += lij * v.numerator * (den // v.denominator)
        out = [Fraction(a, den) for a in acc]
        out[0] += constant
        return PolyQ(out)

    def reconstruct(self, i: int) -> PolyQ:
        return self._combine(i, self.c[i])

    def reduced(self) -> list[PolyQ]:
        """The inputs with their constants removed, rebuilt from the basis."""
        return [self._combine(i, Fraction(0)) for i in range(len(self.lam))]


@dataclass(frozen=True)
class MonomialIdentity:
    """prod_{a_i>0} X_i^{a_i} = e^c prod_{a_i<0} X_i^{|a_i|} at X_i = e^{f_i}."""

    positive: dict
    negative: dict
    c: Fraction

    def __str__(self):
        def side(d):
            return "*".join(f"X{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in sorted(d.items())) or "1"

        scale = "" if self.c == 0 else f"e^({self.c})*"
        return f"{side(self.positive)} = {scale}{side(self.negative)}"


def _ambient(polys: Sequence[PolyQ]) -> int:
    return max((p.degree for p in polys), default=0)


def lin_indep_exp(gs: Sequence[PolyQ]) -> IndepVerdict:
    """Linear independence of e^{g_i} over C(z); witness is a 1-based pair."""
    images = [s_image(g) for g in gs]
    for j in range(len(images)):
        for i in range(j):
            if images[i] == images[j]:
                return IndepVerdict(DEPENDENT, (i + 1, j + 1))
    return IndepVerdict(INDEPENDENT)


def alg_indep_exp(fs: Sequence[PolyQ]) -> IndepVerdict:
    """Algebraic independence of e^{f_j}; a dependent verdict carries an IntegerRelation."""
    m = len(fs)
    D = _ambient(fs)
    columns = [s_image(f).vector(D) for f in fs]
    rows = [[columns[j][d] for j in range(m)] for d in range(D)]
    kernel = nullspace(rows, m)
    if not kernel:
        return IndepVerdict(INDEPENDENT)
    a = tuple(primitive_integer(kernel[0]))
    c = sum((aj * f.constant_term for aj, f in zip(a, fs)), Fraction(0))
    return IndepVerdict(DEPENDENT, IntegerRelation(a, c))


def monomial_certificate(fs: Sequence[PolyQ], rel: IntegerRelation, checks: int = 5,
                         seed: int = 0) -> MonomialIdentity:
    """The multiplicative identity among e^{f_i} implied by an integer relation."""
    if not rel.holds_for(fs) or not any(rel.a):
        raise InvalidRelation("sum a_j f_j is not the stated constant")
    rng = random.Random(seed)
    for _ in range(checks):
        z0 = Fraction(rng.randint(-1000, 1000), rng.randint(1, 1000))
        if sum((aj * f(z0) for aj, f in zip(rel.a, fs)), Fraction(0)) != rel.c:
            raise InvalidRelation(f"relation fails at z = {z0}")
    pos = {i: a for i, a in enumerate(rel.a) if a > 0}
    neg = {i: -a for i, a in enumerate(rel.a) if a < 0}
    return MonomialIdentity(pos, neg, rel.c)


def exponent_basis(gs: Sequence[PolyQ]) -> ExponentBasis:
    """Basis f_j of the Q-span of s(g_i) with integer coordinates lam_ij."""
    return _exponent_basis(tuple(g.coeffs for g in gs))


@lru_cache(maxsize=1 << 16)
def _exponent_basis(key: tuple[tuple[Fraction, ...], ...]) -> ExponentBasis:
    gs = [PolyQ(c) for c in key]
    n = len(gs)
    D = _ambient(gs)
    rows = [s_image(g).vector(D) for g in gs]
    red, pivots = rref(rows) if D else ([], [])
    r = len(pivots)
    coords = [[rows[i][pivots[j]] for j in range(r)] for i in range(n)]
    scales = [math.lcm(*(coords[i][j].denominator for i in range(n))) for j in range(r)]
    basis = tuple(PolyQ([0] + [v / scales[j] for v in red[j]]) for j in range(r))
    lam = tuple(tuple(int(coords[i][j] * scales[j]) for j in range(r)) for i in range(n))
    c = tuple(g.constant_term for g in gs)
    return ExponentBasis(basis, lam, c)


# -- series oracle -----------------------------------------------------------

@lru_cache(maxsize=4096)
def _exp_series_cached(coeffs: tuple[Fraction, ...], T: int) -> tuple[Fraction, ...]:
    g = PolyQ(coeffs)
    dg = [k * g.coeff(k) for k in range(len(g.coeffs))]
    E = [Fraction(1)]
    for t in range(T):
        s = sum((dg[k] * E[t + 1 - k] for k in range(1, min(len(dg), t + 2))), Fraction(0))
        E.append(s / (t + 1))
    return tuple(E)


def exp_series(g: PolyQ, T: int) -> tuple[Fraction, ...]:
    """Coefficients of e^{g} up to z^T; g must have zero constant term."""
    if g.constant_term != 0:
        raise ValueError("exp_series needs a polynomial without constant term")
    return _exp_series_cached(g.coeffs, T)


@lru_cache(maxsize=1 << 14)
def _exp_series_mod(coeffs: tuple[Fraction, ...], T: int, p: int) -> tuple[int, ...]:
    """Residues mod p of the coefficients of e^{g}; needs p > T and p-integral g."""
    dg = [k * to_residue(c, p) % p for k, c in enumerate(coeffs)]
    inv = _inverses_mod(T, p)
    E = [1]
    for t in range(T):
        s = sum(dg[k] * E[t + 1 - k] for k in range(1, min(len(dg), t + 2)))
        E.append(s * inv[t + 1] % p)
    return tuple(E)


@lru_cache(maxsize=16)
def _inverses_mod(T: int, p: int) -> tuple[int, ...]:
    return (0,) + tuple(pow(t, -1, p) for t in range(1, T + 1))


def _series_system_mod(hs: Sequence[PolyQ], B: int, T: int, p: int = PRIME) -> np.ndarray | None:
    """The series system reduced mod p, or None when p divides a denominator."""
    if p <= T or any(c.denominator % p == 0 for h in hs for c in h.coeffs):
        return None
    mat = np.zeros((T + 1, len(hs) * (B + 1)), dtype=np.int64)
    for i, h in enumerate(hs):
        col = np.array(_exp_series_mod(h.coeffs, T, p), dtype=np.int64)
        for b in range(B + 1):
            mat[b:, i * (B + 1) + b] = col[:T + 1 - b]
    return mat


def series_system(hs: Sequence[PolyQ], B: int, T: int) -> list[list[Fraction]]:
    """Rows t = 0..T of sum_i A_i e^{h_i} mod z^{T+1}; columns (i, b) for A_i = sum_b a_ib z^b."""
    series = [exp_series(h, T) for h in hs]
    return [[E[t - b] if t >= b else Fraction(0) for E in series for b in range(B + 1)]
            for t in range(T + 1)]


@dataclass(frozen=True)
class SeriesVerdict:
    """Outcome of the truncated power-series search at fixed bounds."""

    status: str
    A: tuple[PolyQ, ...] | None
    B: int
    T: int

    @property
    def independent(self) -> bool:
        return self.status == INDEPENDENT


@lru_cache(maxsize=1 << 14)
def _exp_series_int(coeffs: tuple[Fraction, ...], T: int) -> tuple[int, int, tuple[int, ...]]:
    """(den, S, ints) with ints[t] = S * [z^t] e^{g} and S = T! * den^T."""
    den = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    S = math.factorial(T) * den ** T
    E = _exp_series_cached(coeffs, T)
    return den, S, tuple(e.numerator * (S // e.denominator) for e in E)


def _annihilates(hs: Sequence[PolyQ], B: int, T: int, v: Sequence[Fraction]) -> bool:
    """Exact check that sum_i A_i e^{h_i} = O(z^{T+1}) for the coefficient vector v."""
    vd = math.lcm(*(x.denominator for x in v))
    vi = [x.numerator * (vd // x.denominator) for x in v]
    scaled = [_exp_series_int(h.coeffs, T) for h in hs]
    common = math.lcm(*(den for den, _, _ in scaled))
    total = [0] * (T + 1)
    for i, (den, _, ints) in enumerate(scaled):
        lift = (common // den) ** T
        for b in range(B + 1):
            a = vi[i * (B + 1) + b]
            if a:
                a *= lift
                for t in range(b, T + 1):
                    total[t] += a * ints[t - b]
    return not any(total)


def _solve_series(hs: Sequence[PolyQ], B: int, T: int, full_rank: bool | None = None,
                  mod: np.ndarray | None = None) -> SeriesVerdict:
    """Series verdict; a mod-p rank result and matrix computed elsewhere may be passed in."""
    ncols = len(hs) * (B + 1)
    if mod is None:
        mod = _series_system_mod(hs, B, T)
    if full_rank is None and mod is not None:
        full_rank = int(ranks_mod_p(mod[None])[0]) == ncols
    if full_rank:
        # rank over Q is at least the rank mod p
        return SeriesVerdict(INDEPENDENT, None, B, T)
    v = first_kernel_vector_mod_p(mod) if mod is not None else None
    if v is None or not _annihilates(hs, B, T, v):
        kernel = nullspace(series_system(hs, B, T), ncols)
        if not kernel:
            return SeriesVerdict(INDEPENDENT, None, B, T)
        v = kernel[0]
    A = tuple(PolyQ(v[i * (B + 1):(i + 1) * (B + 1)]) for i in range(len(hs)))
    return SeriesVerdict(DEPENDENT, A, B, T)


def _batch_full_rank(mats: list[np.ndarray], ncols: int, chunk: int) -> list[bool]:
    out: list[bool] = []
    for start in range(0, len(mats), chunk):
        ranks = ranks_mod_p(np.stack(mats[start:start + chunk]))
        out.extend(int(r) == ncols for r in ranks)
    return out


def _solve_series_many(systems: Sequence[Sequence[PolyQ]], B: int, T: int,
                       chunk: int = 1024) -> list[SeriesVerdict]:
    """_solve_series over many systems, with the mod-p ranks computed in stacked batches."""
    full: list[bool | None] = [None] * len(systems)
    groups: dict[int, list[int]] = {}
    mats: dict[int, np.ndarray] = {}
    for idx, hs in enumerate(systems):
        mod = _series_system_mod(hs, B, T)
        if mod is not None:
            mats[idx] = mod
            groups.setdefault(len(hs), []).append(idx)
    for n, members in groups.items():
        ncols = n * (B + 1)
        # full rank on a leading block of rows already proves full rank
        head = min(T + 1, ncols + 8)
        quick = _batch_full_rank([mats[i][:head] for i in members], ncols, chunk)
        rest = [i for i, ok in zip(members, quick) if not ok]
        for i in members:
            full[i] = True
        for i, ok in zip(rest, _batch_full_rank([mats[i] for i in rest], ncols, chunk)):
            full[i] = ok
    return [_solve_series(hs, B, T, f, mats.get(i)) for i, (hs, f) in enumerate(zip(systems, full))]


def series_dependence_oracle(gs: Sequence[PolyQ], B: int = 3, T: int = 60,
                             margin: int = 8) -> SeriesVerdict:
    """Search polynomials A_i (deg <= B) with sum A_i e^{g_i} = O(z^{T+1}).

    The g_i are first rewritten over their exponent basis with constants
    dropped; every relation left to find is then over Q.
    """
    n = len(gs)
    if T < n * (B + 1) + margin:
        raise ValueError(f"truncation T={T} below n*(B+1)+margin={n * (B + 1) + margin}")
    reduced = exponent_basis(gs).reduced()
    return _solve_series(reduced, B, T)


def series_dependence_oracle_many(instances: Sequence[Sequence[PolyQ]], B: int = 3, T: int = 60,
                                  margin: int = 8) -> list[SeriesVerdict]:
    """series_dependence_oracle on each instance, sharing the modular rank work."""
    for gs in instances:
        if T < len(gs) * (B + 1) + margin:
            raise ValueError(f"truncation T={T} below n*(B+1)+margin={len(gs) * (B + 1) + margin}")
    return _solve_series_many([exponent_basis(gs).reduced() for gs in instances], B, T)


def _box_monomials(fs: Sequence[PolyQ], box: int) -> list[PolyQ]:
    reduced = exponent_basis(fs).reduced()
    D = max((len(f.coeffs) for f in reduced), default=0)
    den = math.lcm(*(c.denominator for f in reduced for c in f.coeffs))
    vecs = [[int(f.coeff(d) * den) for d in range(D)] for f in reduced]
    monomials = []
    for lam in product(range(box + 1), repeat=len(fs)):
        monomials.append(PolyQ([Fraction(sum(lj * v[d] for lj, v in zip(lam, vecs)), den)
                                for d in range(D)]))
    return monomials


def series_algebraic_oracle(fs: Sequence[PolyQ], B: int = 3, T: int = 60,
                            box: int = 1) -> SeriesVerdict:
    """Linear dependence, at series level, among monomials prod e^{lam_j f_j}, 0 <= lam_j <= box.

    A dependent verdict reports one polynomial A per monomial in
    lexicographic order of the exponent vectors.
    """
    monomials = _box_monomials(fs, box)
    if T < len(monomials) * (B + 1):
        raise ValueError("truncation too small for the monomial box")
    return _solve_series(monomials, B, T)


def series_algebraic_oracle_many(instances: Sequence[Sequence[PolyQ]], B: int = 3, T: int = 60,
                                 box: int = 1) -> list[SeriesVerdict]:
    """series_algebraic_oracle on each instance, sharing the modular rank work."""
    systems = [_box_monomials(fs, box) for fs in instances]
    if any(T < len(m) * (B + 1) for m in systems):
        raise ValueError("truncation too small for the monomial box")
    return _solve_series_many(systems, B, T)


def series_relation_check(fs: Sequence[PolyQ], rel: IntegerRelation, B: int = 3,
                          T: int = 60) -> SeriesVerdict:
    """Series-level test that e^{a+ . f} and e^{a- . f} are C(z)-dependent."""
    reduced = exponent_basis(fs).reduced()
    pos, neg = PolyQ(), PolyQ()
    for aj, f in zip(rel.a, reduced):
        if aj > 0:
            pos = pos + f * aj
        elif aj < 0:
            neg = neg + f * (-aj)
    return _solve_series([pos, neg], B, T)


# -- Burger composition --------------------------------------------------------

def burger_annihilator(P: PolyQ, F: BivarPolyQ) -> BivarPolyQ:
    """A(X, Y) = P(F(X, Y)), a nonzero polynomial vanishing wherever F hits a root of P."""
    if P.is_zero():
        raise ZeroP("minimal polynomial is zero")
    if F.is_constant():
        raise ConstantF("F must be nonconstant")
    out = BivarPolyQ()
    for c in reversed(P.coeffs):
        out = out * F + c
    return out

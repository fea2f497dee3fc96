"""Exact linear algebra over Q, plus a modular rank used as a fast certificate.

A matrix with full column rank modulo a prime has full column rank over Q
(rank can only drop under reduction), so :func:`full_rank_mod_p` is a sound
proof of independence; a rank drop mod p is inconclusive and callers fall
back to :func:`nullspace`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

PRIME = 2147483647  # 2**31 - 1; products of residues fit in int64


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [[Fraction(v) for v in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : A v = 0}, one vector per free column in increasing order."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


def primitive_integer(v: Sequence[Fraction]) -> list[int]:
    """Scale a nonzero rational vector to coprime integers, first nonzero positive."""
    from math import gcd, lcm

    den = lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return [-x for x in ints] if lead < 0 else ints


def to_residue(v: Fraction, p: int = PRIME) -> int:
    v = Fraction(v)
    if v.denominator % p == 0:
        raise ZeroDivisionError("denominator divisible by the modulus")
    return v.numerator * pow(v.denominator, -1, p) % p


def _inv_mod(a: np.ndarray, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def ranks_mod_p(mats: np.ndarray, p: int = PRIME) -> np.ndarray:
    """Ranks of a batch of matrices (shape b x r x c, int64 residues) modulo p."""
    m = np.array(mats, dtype=np.int64) % p
    b, nrows, ncols = m.shape
    rank = np.zeros(b, dtype=np.int64)
    row_idx = np.arange(nrows)
    batch = np.arange(b)
    for c in range(ncols):
        # rows above the smallest current rank and columns left of c are final
        r0 = int(rank.min())
        if r0 == nrows:
            break
        mask = (m[:, r0:, c] != 0) & (row_idx[None, r0:] >= rank[:, None])
        has = mask.any(axis=1)
        if not has.any():
            continue
        sel = batch[has]
        tgt = rank[has]
        src = mask[has].argmax(axis=1) + r0
        top = m[sel, tgt, c:].copy()
        m[sel, tgt, c:] = m[sel, src, c:]
        m[sel, src, c:] = top
        pivrow = m[sel, tgt, c:]
        pivrow = pivrow * _inv_mod(pivrow[:, 0], p)[:, None] % p
        m[sel, tgt, c:] = pivrow
        block = m[sel, r0:, c:]
        factor = block[:, :, 0].copy()
        factor[row_idx[None, r0:] <= tgt[:, None]] = 0
        m[sel, r0:, c:] = (block - factor[:, :, None] * pivrow[:, None, :] % p) % p
        rank[has] += 1
    return rank


def rref_mod_p(mat: np.ndarray, p: int = PRIME) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of one int64 residue matrix modulo p."""
    m = np.array(mat, dtype=np.int64) % p
    nrows, ncols = m.shape
    pivots: list[int] = []
    for c in range(ncols):
        r = len(pivots)
        if r == nrows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if not nz.size:
            continue
        src = r + int(nz[0])
        if src != r:
            m[[r, src]] = m[[src, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, p) % p
        factor = m[:, c].copy()
        factor[r] = 0
        m = (m - factor[:, None] * m[r][None, :] % p) % p
        pivots.append(c)
    return m, pivots


def rational_reconstruct(a: int, p: int = PRIME) -> Fraction | None:
    """The fraction n/d with |n|, d <= sqrt(p/2) congruent to a mod p, if any."""
    bound = math.isqrt(p // 2)
    r0, r1 = p, a % p
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def first_kernel_vector_mod_p(rows: np.ndarray, p: int = PRIME) -> list[Fraction] | None:
    """Candidate for the first nullspace basis vector, lifted from residues.

    Matches ``nullspace(rows)[0]`` whenever that vector has small entries; the
    caller must verify the candidate over Q.
    """
    red, pivots = rref_mod_p(rows, p)
    ncols = red.shape[1]
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    f = free[0]
    v = [Fraction(0)] * ncols
    v[f] = Fraction(1)
    for r, pc in enumerate(pivots):
        q = rational_reconstruct(-int(red[r, f]) % p, p)
        if q is None:
            return None
        v[pc] = q
    return v

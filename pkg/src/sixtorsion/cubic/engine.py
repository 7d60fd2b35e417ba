"""Production enumeration of reduced irreducible binary cubic forms (numba).

The loops walk a box that provably contains every canonical representative
(see reduction.py for the choice of representative) and keep exactly the
canonical ones.

Bounds used, for |disc| <= X:

* disc < 0: with w = u + iy the complex root in the domain, |D| =
  4 a^4 |theta - w|^4 y^2 and y^2 >= 3/4 give a <= (16X/27)^{1/4},
  |theta - u| <= (X/3)^{1/4}/a and y^2 <= (X/4a^4)^{1/3}; hence
  -1.5a - (X/3)^{1/4} <= b <= 0.5a + (X/3)^{1/4} and
  -max(b, 0) <= c <= a (X/4a^4)^{1/3} + max(-b, 0).  d is swept over the
  interval where the discriminant, a quadratic in d, is >= -X.
* disc > 0: the syzygy 4H^3 = G^2 + 27 D f^2 at (1, 0) gives
  27 D a^2 <= 4 P^3 with P <= sqrt(D), so a <= (16X/729)^{1/4}.  The real
  part of the Hessian root is a weighted mean of the three roots and lies in
  [0, 1/2]; the root spread is at most sqrt(2P)/a, so
  |b| <= 1.5a + 3 sqrt(2P).  c and d then follow from 1 <= P <= sqrt(X) and
  0 <= Q <= P.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from ..errors import IntegrityError

SMALL_PRIMES = np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43], dtype=np.int64)


def _small_gl2() -> np.ndarray:
    out = []
    for p in (-1, 0, 1):
        for q in (-1, 0, 1):
            for r in (-1, 0, 1):
                for s in (-1, 0, 1):
                    if p * s - q * r in (1, -1):
                        out.append((p, q, r, s))
    return np.array(out, dtype=np.int64)


SMALL_GL2_ARR = _small_gl2()


@nb.njit(cache=True)
def _feval(a, b, c, d, x, y):
    return a * x * x * x + b * x * x * y + c * x * y * y + d * y * y * y


@nb.njit(cache=True)
def _disc(a, b, c, d):
    return b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d


@nb.njit(cache=True)
def _has_root_mod(a, b, c, d, p):
    # point at infinity
    if a % p == 0:
        return True
    for x in range(p):
        if (((a * x + b) * x + c) * x + d) % p == 0:
            return True
    return False


@nb.njit(cache=True)
def _irreducible(a, b, c, d, primes):
    if a == 0 or d == 0:
        return False
    for i in range(primes.shape[0]):
        if not _has_root_mod(a, b, c, d, primes[i]):
            return True
    # exact rational root test: root s/t in lowest terms has t | a, s | d
    aa = abs(a)
    dd = abs(d)
    for t in range(1, aa + 1):
        if aa % t != 0:
            continue
        s = 1
        while s * s <= dd:
            if dd % s == 0:
                s2 = dd // s
                if _feval(a, b, c, d, s, t) == 0 or _feval(a, b, c, d, -s, t) == 0:
                    return False
                if _feval(a, b, c, d, s2, t) == 0 or _feval(a, b, c, d, -s2, t) == 0:
                    return False
            s += 1
    return True


@nb.njit(cache=True)
def _less(x0, x1, x2, x3, y0, y1, y2, y3):
    if x0 != y0:
        return x0 < y0
    if x1 != y1:
        return x1 < y1
    if x2 != y2:
        return x2 < y2
    return x3 < y3


@nb.njit(cache=True)
def _act(a, b, c, d, p, q, r, s):
    A = a * p * p * p + b * p * p * r + c * p * r * r + d * r * r * r
    B = 3 * a * p * p * q + b * (p * p * s + 2 * p * q * r) + c * (q * r * r + 2 * p * r * s) + 3 * d * r * r * s
    C = 3 * a * p * q * q + b * (q * q * r + 2 * p * q * s) + c * (p * s * s + 2 * q * r * s) + 3 * d * r * s * s
    D = a * q * q * q + b * q * q * s + c * q * s * s + d * s * s * s
    return A, B, C, D


@nb.njit(cache=True)
def _positive_boundary_canonical(a, b, c, d, P, Q, R, mats):
    # f is canonical iff no stabilizer image is lexicographically smaller
    for i in range(mats.shape[0]):
        p = mats[i, 0]
        q = mats[i, 1]
        r = mats[i, 2]
        s = mats[i, 3]
        P2 = P * p * p + Q * p * r + R * r * r
        Q2 = 2 * P * p * q + Q * (p * s + q * r) + 2 * R * r * s
        R2 = P * q * q + Q * q * s + R * s * s
        if not (0 <= Q2 and Q2 <= P2 and P2 <= R2):
            continue
        A, B, C, D = _act(a, b, c, d, p, q, r, s)
        if A < 0 or (A == 0 and (B < 0 or (B == 0 and (C < 0 or (C == 0 and D < 0))))):
            A, B, C, D = -A, -B, -C, -D
        if _less(A, B, C, D, a, b, c, d):
            return False
    return True


@nb.njit(cache=True)
def _maximal(a, b, c, d, D, spf):
    n = abs(D)
    while n > 1:
        p = spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e >= 2:
            if a % p == 0 and b % p == 0 and c % p == 0 and d % p == 0:
                return False
            p2 = p * p
            if a % p2 == 0 and b % p == 0:
                return False
            for r in range(p):
                if _feval(a, b, c, d, r, 1) % p2 == 0 and (3 * a * r * r + 2 * b * r + c) % p == 0:
                    return False
    return True


@nb.njit(cache=True)
def _push(buf, n, a, b, c, d, D, m):
    if n >= buf.shape[0]:
        nb_ = np.empty((buf.shape[0] * 2, 6), dtype=np.int64)
        nb_[: buf.shape[0]] = buf
        buf = nb_
    buf[n, 0] = a
    buf[n, 1] = b
    buf[n, 2] = c
    buf[n, 3] = d
    buf[n, 4] = D
    buf[n, 5] = m
    return buf


@nb.njit(cache=True)
def _enum_negative(X, a_lo, a_hi, spf, primes, maximal_only):
    buf = np.empty((1024, 6), dtype=np.int64)
    n = 0
    x4 = (X / 3.0) ** 0.25
    for a in range(a_lo, a_hi + 1):
        b_lo = int(math.floor(-1.5 * a - x4)) - 1
        b_hi = int(math.ceil(0.5 * a + x4)) + 1
        ymax = (X / (4.0 * a * a * a * a)) ** (1.0 / 3.0)
        for b in range(b_lo, b_hi + 1):
            c_lo = -max(b, 0) - 1
            c_hi = int(math.ceil(a * ymax + max(-b, 0))) + 1
            for c in range(c_lo, c_hi + 1):
                # D(d) = -27 a^2 d^2 + B1 d + C0 >= -X
                B1 = 18.0 * a * b * c - 4.0 * b * b * b
                C0 = float(b * b * c * c - 4 * a * c * c * c)
                A2 = 27.0 * a * a
                disc_q = B1 * B1 + 4.0 * A2 * (C0 + X)
                if disc_q < 0:
                    continue
                sq = math.sqrt(disc_q)
                d_lo = int(math.floor((B1 - sq) / (2.0 * A2))) - 1
                d_hi = int(math.ceil((B1 + sq) / (2.0 * A2))) + 1
                for d in range(d_lo, d_hi + 1):
                    if d == 0:
                        continue
                    D = _disc(a, b, c, d)
                    if D >= 0 or D < -X:
                        continue
                    if _feval(a, b, c, d, -b - a, a) >= 0:
                        continue
                    if _feval(a, b, c, d, -b, a) <= 0:
                        continue
                    v = _feval(a, b, c, d, -d, a)
                    if d < 0:
                        if v <= 0:
                            continue
                    elif v >= 0:
                        continue
                    if not _irreducible(a, b, c, d, primes):
                        continue
                    m = 1 if _maximal(a, b, c, d, D, spf) else 0
                    if maximal_only and m == 0:
                        continue
                    buf = _push(buf, n, a, b, c, d, D, m)
                    n += 1
    return buf[:n]


@nb.njit(cache=True)
def _enum_positive(X, a_lo, a_hi, spf, primes, mats, maximal_only):
    buf = np.empty((1024, 6), dtype=np.int64)
    n = 0
    sqX = math.sqrt(X)
    Pmax = int(math.floor(sqX))
    while (Pmax + 1) * (Pmax + 1) <= X:
        Pmax += 1
    while Pmax * Pmax > X:
        Pmax -= 1
    for a in range(a_lo, a_hi + 1):
        bmax = int(math.ceil(1.5 * a + 3.0 * math.sqrt(2.0 * Pmax))) + 1
        for b in range(-bmax, bmax + 1):
            # P >= ((|b| - 1.5a) / 3)^2 / 2 when |b| > 1.5a
            t = (abs(b) - 1.5 * a) / 3.0
            Pmin = 1
            if t > 0:
                Pmin = max(1, int(math.floor(t * t / 2.0)) - 1)
            if Pmin > Pmax:
                continue
            # P = b^2 - 3ac in [Pmin, Pmax]
            c_lo = -((Pmax - b * b) // (3 * a))  # ceil((b^2 - Pmax) / 3a)
            c_hi = (b * b - Pmin) // (3 * a)
            for c in range(c_lo, c_hi + 1):
                P = b * b - 3 * a * c
                if P < 1 or P > Pmax:
                    continue
                bc = b * c
                # 0 <= Q = bc - 9ad <= P
                d_lo = -((P - bc) // (9 * a))  # ceil((bc - P) / 9a)
                d_hi = bc // (9 * a)
                for d in range(d_lo, d_hi + 1):
                    Q = bc - 9 * a * d
                    R = c * c - 3 * b * d
                    if R < P:
                        continue
                    D = _disc(a, b, c, d)
                    if D <= 0 or D > X:
                        continue
                    if Q == 0 or Q == P or P == R:
                        if not _positive_boundary_canonical(a, b, c, d, P, Q, R, mats):
                            continue
                    if not _irreducible(a, b, c, d, primes):
                        continue
                    m = 1 if _maximal(a, b, c, d, D, spf) else 0
                    if maximal_only and m == 0:
                        continue
                    buf = _push(buf, n, a, b, c, d, D, m)
                    n += 1
    return buf[:n]


def a_bound(X: int, sign: int) -> int:
    """Largest leading coefficient a reduced form with 0 < sign*disc <= X can have."""
    if sign < 0:
        A = int((16 * X / 27) ** 0.25) + 1
        while 27 * A**4 > 16 * X:
            A -= 1
    else:
        A = int((16 * X / 729) ** 0.25) + 1
        while 729 * A**4 > 16 * X:
            A -= 1
    return max(A, 0)


def enumerate_raw(X: int, sign: int, spf: np.ndarray, a_range: tuple[int, int] | None = None,
                  maximal_only: bool = False) -> np.ndarray:
    """Rows (a, b, c, d, disc, is_maximal) of canonical irreducible forms.

    ``spf`` must cover X.  ``a_range`` restricts the leading coefficient,
    which is how work is split into resumable chunks.
    """
    if spf.shape[0] <= X:
        raise IntegrityError("smallest-prime-factor table does not cover X")
    A = a_bound(X, sign)
    lo, hi = (1, A) if a_range is None else (max(1, a_range[0]), min(A, a_range[1]))
    if hi < lo:
        return np.zeros((0, 6), dtype=np.int64)
    if sign < 0:
        return _enum_negative(float(X), lo, hi, spf, SMALL_PRIMES, maximal_only)
    return _enum_positive(float(X), lo, hi, spf, SMALL_PRIMES, SMALL_GL2_ARR, maximal_only)

"""Hooley's Delta function and windowed divisor sums.

Delta(n) = max_u #{d | n : u <= d <= e u}.  The count is a step function of u
that only drops just after u passes a divisor, so the maximum is attained
with u a divisor of n.  Window membership d <= e u is decided exactly: a
float comparison settles it unless d is within a relative 1e-9 of e u, in
which case d/u is compared with rational enclosures of e.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numba as nb
import numpy as np

from .arith import build_factor_table, factorize, fundamental_discriminants
from .cubic.fields import FieldTable
from .errors import DomainError, IntegrityError, RangeError

E = math.e
_AMBIGUOUS = 1e-9


def _e_enclosure(n: int) -> tuple[Fraction, Fraction]:
    """S_n <= e < S_n + 1/(n n!) with S_n = sum_{k <= n} 1/k!."""
    s = sum((Fraction(1, math.factorial(k)) for k in range(n + 1)), Fraction(0))
    return s, s + Fraction(1, n * math.factorial(n))


def le_e_times(d: int, u: int) -> bool:
    """Exact test of d <= e u for positive integers."""
    x = d - E * u
    if x < -_AMBIGUOUS * u:
        return True
    if x > _AMBIGUOUS * u:
        return False
    r = Fraction(d, u)
    n = 10
    while True:
        lo, hi = _e_enclosure(n)
        if r <= lo:
            return True
        if r >= hi:
            return False
        n *= 2


@dataclass(frozen=True)
class DeltaStat:
    n: int
    delta: int
    witness_u: int


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def delta(n: int) -> DeltaStat:
    """Delta(n) by a two-pointer sweep over the sorted divisors."""
    if n < 1:
        raise DomainError("n must be positive")
    divs = divisors(n)
    best, best_u = 0, 1
    j = 0
    for i, u in enumerate(divs):
        if j < i:
            j = i
        while j + 1 < len(divs) and le_e_times(divs[j + 1], u):
            j += 1
        if j - i + 1 > best:
            best, best_u = j - i + 1, u
    return DeltaStat(n, best, best_u)


def delta_all_pairs(n: int) -> int:
    """Independent O(tau^2) check: every divisor as left end, every divisor tested."""
    divs = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    divs = sorted(set(divs + [n // d for d in divs]))
    e_lo, e_hi = _e_enclosure(30)
    best = 0
    for u in divs:
        c = 0
        for d in divs:
            r = Fraction(d, u)
            if r < 1:
                continue
            if r <= e_lo:
                c += 1
            elif r < e_hi:
                raise IntegrityError("e enclosure too coarse for this n")
        best = max(best, c)
    return best


@nb.njit(cache=True)
def _divisor_sieve(x):
    """CSR divisor lists for 1..x built by marking multiples (no factorization)."""
    cnt = np.zeros(x + 2, dtype=np.int64)
    for d in range(1, x + 1):
        for m in range(d, x + 1, d):
            cnt[m + 1] += 1
    start = np.cumsum(cnt)
    fill = start.copy()
    out = np.empty(start[-1], dtype=np.int64)
    for d in range(1, x + 1):
        for m in range(d, x + 1, d):
            out[fill[m]] = d
            fill[m] += 1
    return start, out


@nb.njit(cache=True)
def _all_pairs_range(x, e):
    start, divs = _divisor_sieve(x)
    out = np.zeros(x, dtype=np.int32)
    close = np.zeros(x, dtype=np.bool_)
    for n in range(1, x + 1):
        a, b = start[n], start[n + 1]
        best = 0
        for i in range(a, b):
            u = divs[i]
            c = 0
            for j in range(a, b):
                d = divs[j]
                if d < u:
                    continue
                y = d - e * u
                if abs(y) <= 1e-9 * u:
                    close[n - 1] = True
                if y <= 0:
                    c += 1
            if c > best:
                best = c
        out[n - 1] = best
    return out, close


def delta_all_pairs_range(x: int) -> np.ndarray:
    """All-pairs Delta(n) for 1 <= n <= x; close calls are redone exactly."""
    out, close = _all_pairs_range(x, E)
    for i in np.flatnonzero(close):
        out[i] = delta_all_pairs(int(i) + 1)
    return out


@nb.njit(cache=True)
def _delta_range(lo, hi, spf, e):
    """Delta(n) for lo <= n <= hi, and how many comparisons were too close to call."""
    out = np.zeros(hi - lo + 1, dtype=np.int32)
    close = 0
    divs = np.empty(4096, dtype=np.int64)
    for n in range(lo, hi + 1):
        nd = 1
        divs[0] = 1
        m = n
        while m > 1:
            p = spf[m]
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            cur = nd
            pk = 1
            for _ in range(k):
                pk *= p
                for t in range(cur):
                    divs[nd] = divs[t] * pk
                    nd += 1
        ds = np.sort(divs[:nd])
        best = 0
        j = 0
        for i in range(nd):
            u = ds[i]
            if j < i:
                j = i
            while j + 1 < nd:
                x = ds[j + 1] - e * u
                if abs(x) <= 1e-9 * u:
                    close += 1
                if x <= 0:
                    j += 1
                else:
                    break
            if j - i + 1 > best:
                best = j - i + 1
        out[n - lo] = best
    return out, close


def delta_array(x: int) -> np.ndarray:
    """Delta(n) for 1 <= n <= x (index n - 1)."""
    spf = build_factor_table(max(x, 2)).spf.astype(np.int64)
    out, close = _delta_range(1, x, spf, E)
    if close:
        # a float comparison could have gone either way; redo exactly
        return np.array([delta(n).delta for n in range(1, x + 1)], dtype=np.int32)
    return out


@dataclass(frozen=True)
class DeltaAverage:
    x: int
    mean: float
    bound_ratio: float


def delta_average(x: int) -> DeltaAverage:
    if x < 10:
        raise DomainError("x must be at least 10")
    vals = delta_array(x)
    mean = float(vals.sum()) / x
    return DeltaAverage(x, mean, mean / math.log(math.log(x)) ** 2.5)


def submultiplicative_check(pairs: int = 10_000, max_value: int = 10**4, seed: int = 0) -> list[tuple[int, int]]:
    """Coprime pairs (m, n) violating Delta(mn) <= Delta(m) tau(n); empty if none."""
    rng = random.Random(seed)
    bad = []
    done = 0
    while done < pairs:
        m = rng.randint(1, max_value)
        n = rng.randint(1, max_value)
        if math.gcd(m, n) != 1:
            continue
        done += 1
        if delta(m * n).delta > delta(m).delta * len(divisors(n)):
            bad.append((m, n))
    return bad


@dataclass(frozen=True)
class WindowSum:
    T: int
    L: float
    sign: int
    sum: int
    bound: float

    @property
    def ratio(self) -> float:
        return self.sum / self.bound


def window_divisor_sum(T: int, L: float, sign: int, fields: FieldTable) -> WindowSum:
    """sum over fundamental D, 0 < sign D <= T, of (h3(D) - 1) #{d | D in the window}.

    The window is sqrt(T) (log T)^-L <= d <= sqrt(T) (log T)^L.
    """
    if T < 10 or L < 1:
        raise DomainError("need T >= 10 and L >= 1")
    if sign not in (-1, 1):
        raise DomainError("sign must be +1 or -1")
    if fields.X and fields.X < T:
        raise RangeError(f"cubic-field data covers |disc| <= {fields.X}, need {T}")
    lo = math.sqrt(T) * math.log(T) ** (-L)
    hi = math.sqrt(T) * math.log(T) ** L
    m = (np.sign(fields.disc) == sign) & (np.abs(fields.disc) <= T)
    fund = set((fundamental_discriminants(T + 1, sign)).tolist())
    total = 0
    for D, k in zip(*np.unique(fields.disc[m], return_counts=True)):
        D = int(D)
        if D not in fund:
            continue
        # h3(D) - 1 = 2 #{cubic fields of disc D}
        total += 2 * int(k) * sum(1 for d in divisors(abs(D)) if lo <= d <= hi)
    bound = T * math.log(math.log(T)) ** 3.5 * L
    return WindowSum(T, L, sign, total, bound)


def write_delta_stats(path, x: int) -> None:
    vals = delta_array(x)
    with open(path, "w", newline="\n") as fh:
        fh.write("n,delta\n")
        for n, v in enumerate(vals.tolist(), start=1):
            fh.write(f"{n},{v}\n")

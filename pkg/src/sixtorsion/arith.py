"""Smallest-prime-factor sieves, factorization and multiplicative functions.

Everything downstream iterates multiplicative data over ranges of size
10^6 to 10^8, so the basic object is an array ``spf`` of smallest prime
factors.  Per-integer queries are O(log n) against that table; whole-range
quantities (omega, squarefree flags, fundamental discriminants) are built
with vectorised numpy sieves that can also run segment by segment.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DomainError, RangeError, ResourceError

# Default ceiling for a single sieve allocation, overridable per call or
# through the environment.
DEFAULT_MEMORY_BUDGET = int(os.environ.get("SIXTORSION_MEMORY_BUDGET", 2 * 1024**3))


@dataclass(frozen=True)
class FactorTable:
    """Smallest prime factor of every 2 <= n <= limit (spf[0] = spf[1] = 0)."""

    limit: int
    spf: np.ndarray = field(repr=False)

    def __contains__(self, n: int) -> bool:
        return 1 <= abs(n) <= self.limit


def _check_budget(nbytes: int, budget: int | None) -> None:
    budget = DEFAULT_MEMORY_BUDGET if budget is None else budget
    if nbytes > budget:
        raise ResourceError(
            f"sieve needs {nbytes} bytes but the memory budget is {budget} bytes "
            "(raise it with memory_budget= or SIXTORSION_MEMORY_BUDGET)"
        )


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit, by a plain Eratosthenes sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def build_factor_table(limit: int, memory_budget: int | None = None) -> FactorTable:
    """Build the smallest-prime-factor table up to ``limit``.

    Args:
        limit: largest integer covered, at least 2.
        memory_budget: byte ceiling for the table; defaults to
            ``DEFAULT_MEMORY_BUDGET``.

    Returns:
        A FactorTable whose ``spf`` array has ``limit + 1`` entries.
    """
    if limit < 2:
        raise DomainError("factor table limit must be at least 2")
    dtype = np.int32 if limit < 2**31 else np.int64
    _check_budget((limit + 1) * np.dtype(dtype).itemsize, memory_budget)
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            seg = spf[p * p :: p]
            seg[seg == 0] = p
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf[0] = spf[1] = 0
    return FactorTable(limit, spf)


def segmented_spf(lo: int, hi: int, base: np.ndarray | None = None) -> np.ndarray:
    """Smallest prime factors of lo <= n < hi without a table from 0.

    ``base`` may hold the primes up to sqrt(hi - 1); it is computed when absent.
    Entries for n < 2 are 0.
    """
    if lo < 0 or hi < lo:
        raise DomainError("need 0 <= lo <= hi")
    if base is None:
        base = small_primes(math.isqrt(max(hi - 1, 1)))
    out = np.zeros(hi - lo, dtype=np.int64)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        seg = out[start - lo :: p]
        seg[seg == 0] = p
    rest = np.flatnonzero(out == 0)
    out[rest] = rest + lo
    for n in range(lo, min(hi, 2)):
        out[n - lo] = 0
    return out


def iter_spf_segments(lo: int, hi: int, chunk: int = 1 << 22) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start, spf block) pairs covering [lo, hi) in chunks."""
    base = small_primes(math.isqrt(max(hi - 1, 1)))
    start = lo
    while start < hi:
        stop = min(hi, start + chunk)
        yield start, segmented_spf(start, stop, base)
        start = stop


@dataclass(frozen=True)
class FactoredInteger:
    """A nonzero integer with its prime factorization."""

    value: int
    sign: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = self.sign
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise DomainError(f"bad factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise DomainError(f"factors {self.factors} do not multiply to {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    def valuation(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0


def factorize(n: int, table: FactorTable | None = None) -> FactoredInteger:
    """Factor ``n`` by repeated smallest-prime-factor lookups.

    Without a table the factorization falls back to trial division, which is
    fine for the occasional large value (D6 discriminants, etc.).
    """
    n = int(n)
    if n == 0:
        raise DomainError("cannot factor 0")
    sign = 1 if n > 0 else -1
    m = abs(n)
    factors: list[tuple[int, int]] = []
    if table is not None:
        if m > table.limit:
            raise RangeError(f"|{n}| exceeds factor table limit {table.limit}")
        spf = table.spf
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
    else:
        p = 2
        while p * p <= m:
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                factors.append((p, e))
            p += 1 if p == 2 else 2
        if m > 1:
            factors.append((m, 1))
    return FactoredInteger(n, sign, tuple(factors))


@dataclass(frozen=True)
class MultiplicativeValues:
    mu: int
    omega: int
    tau: int
    tau_k: dict[int, int]
    sigma: int
    phi: int
    is_squarefree: bool
    sfk: int
    coprime_part_6: int


def tau_k_prime_power(k: int, e: int) -> int:
    """Number of ordered k-tuples with product p^e: C(e + k - 1, k - 1)."""
    return math.comb(e + k - 1, k - 1)


def multiplicative_values(f: FactoredInteger) -> MultiplicativeValues:
    """Standard multiplicative functions of |f.value|."""
    mu = 1
    tau = 1
    sigma = 1
    phi = 1
    sfk = 1
    c6 = 1
    tk = {k: 1 for k in range(1, 9)}
    for p, e in f.factors:
        mu = 0 if e > 1 else -mu
        tau *= e + 1
        sigma *= (p ** (e + 1) - 1) // (p - 1)
        phi *= p ** (e - 1) * (p - 1)
        sfk *= p
        if p > 3:
            c6 *= p**e
        for k in tk:
            tk[k] *= tau_k_prime_power(k, e)
    return MultiplicativeValues(
        mu=mu,
        omega=f.omega,
        tau=tau,
        tau_k=tk,
        sigma=sigma,
        phi=phi,
        is_squarefree=mu != 0,
        sfk=sfk,
        coprime_part_6=c6,
    )


def coprime_part_6(n: int) -> int:
    """Largest positive divisor of n coprime to 6."""
    m = abs(int(n))
    if m == 0:
        raise DomainError("coprime part of 0 is undefined")
    while m % 2 == 0:
        m //= 2
    while m % 3 == 0:
        m //= 3
    return m


def is_squarefree(n: int) -> bool:
    m = abs(int(n))
    if m == 0:
        return False
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        if m % p == 0:
            m //= p
        p += 1
    return True


def is_fundamental_discriminant(D: int) -> bool:
    """True iff D is the discriminant of a quadratic field."""
    D = int(D)
    if D == 0:
        raise DomainError("0 is not a discriminant")
    if D == 1:
        return False
    r = D % 4
    if r == 1:
        return is_squarefree(D)
    if r == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def squarefree_part(n: int) -> int:
    """Signed squarefree kernel s with n = s * k^2."""
    n = int(n)
    if n == 0:
        raise DomainError("squarefree part of 0 is undefined")
    f = factorize(n)
    s = f.sign
    for p, e in f.factors:
        if e % 2:
            s *= p
    return s


def fundamental_part(n: int) -> int:
    """The fundamental discriminant (or 1) in the square class of n."""
    s = squarefree_part(n)
    return s if s % 4 == 1 else 4 * s


# ---------------------------------------------------------------------------
# Whole-range sieves
# ---------------------------------------------------------------------------


def squarefree_flags(limit: int, memory_budget: int | None = None) -> np.ndarray:
    """Boolean array sq[n] = (n squarefree) for 0 <= n <= limit; sq[0] = False."""
    _check_budget(limit + 1, memory_budget)
    sq = np.ones(limit + 1, dtype=bool)
    sq[0] = False
    for p in small_primes(math.isqrt(limit)):
        sq[int(p) * int(p) :: int(p) * int(p)] = False
    return sq


def omega_array(limit: int, memory_budget: int | None = None) -> np.ndarray:
    """omega[n] = number of distinct prime factors of n, 0 <= n <= limit."""
    _check_budget(limit + 1, memory_budget)
    om = np.zeros(limit + 1, dtype=np.uint8)
    for p in small_primes(limit):
        om[int(p) :: int(p)] += 1
    return om


def has_prime_3mod4_array(limit: int) -> np.ndarray:
    """flag[n] = some prime p = 3 mod 4 divides n."""
    fl = np.zeros(limit + 1, dtype=bool)
    for p in small_primes(limit):
        if p % 4 == 3:
            fl[int(p) :: int(p)] = True
    return fl


def fundamental_mask(X: int, sign: int, sq: np.ndarray | None = None) -> np.ndarray:
    """mask[n] = (sign * n is a fundamental discriminant) for 0 <= n < X.

    ``sq`` is an optional precomputed squarefree_flags array of length >= X.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    n = np.arange(X, dtype=np.int64)
    if sq is None:
        sq = squarefree_flags(max(X - 1, 1))
    sq = sq[:X]
    D_mod4 = (sign * n) % 4
    odd_ok = (D_mod4 == 1) & sq
    m = n // 4
    m_ok = np.zeros(X, dtype=bool)
    mult4 = n % 4 == 0
    idx = np.flatnonzero(mult4)
    mm = m[idx]
    s_mm = (sign * mm) % 4
    m_ok[idx] = sq[mm] & ((s_mm == 2) | (s_mm == 3))
    mask = odd_ok | m_ok
    if sign == 1 and X > 1:
        mask[1] = False
    mask[0] = False
    return mask


def fundamental_discriminants(X: int, sign: int) -> np.ndarray:
    """Fundamental discriminants D with 0 < sign*D < X, sorted by |D|."""
    return sign * np.flatnonzero(fundamental_mask(X, sign))

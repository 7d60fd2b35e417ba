"""Explicit constants: Euler products with tail enclosures, local sums, c(G).

Exact identities live in Q[p^{-1/3}]: a ``PowerBasis`` value is
c0 + c1 p^{-1/3} + c2 p^{-2/3} with rational c_i, which is closed under the
operations needed here (p^{-1} is rational).

Euler products are evaluated as exp(sum of log factors).  Primes up to a
cutoff N are summed directly.  Beyond N, if the factor is a rational function
of t = p^{-1/m}, its logarithm is expanded as sum_k c_k t^k with exact
rational c_k, and each sum over p > N of p^{-k/m} is obtained from the prime
zeta function P(k/m) minus the partial sum.  What is left (the series
remainder, or the whole log factor when no series is given) is bounded by a
certificate |R(p)| <= K p^{-(1 + delta)} for p >= p_from, checked at every
prime the engine touches, and summed as K N^{-delta} / delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import etale
from .arith import factorize, small_primes, squarefree_flags
from .errors import DataError, DomainError, IntegrityError, ResourceError

# relative allowance for floating-point rounding in the direct sums
ROUNDING_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Q[p^{-1/3}]
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerBasis:
    """c0 + c1 p^{-1/3} + c2 p^{-2/3} with rational coefficients."""

    p: int
    coeffs: tuple[Fraction, Fraction, Fraction]

    @classmethod
    def zero(cls, p: int) -> "PowerBasis":
        return cls(p, (Fraction(0), Fraction(0), Fraction(0)))

    @classmethod
    def term(cls, p: int, coeff, exponent: Fraction) -> "PowerBasis":
        """coeff * p^{-exponent}, exponent a nonnegative multiple of 1/3."""
        k = Fraction(exponent) * 3
        if k.denominator != 1 or k < 0:
            raise IntegrityError(f"exponent {exponent} is not a nonnegative multiple of 1/3")
        k = int(k)
        c = [Fraction(0)] * 3
        c[k % 3] = Fraction(coeff) / Fraction(p) ** (k // 3)
        return cls(p, tuple(c))

    def __add__(self, other: "PowerBasis") -> "PowerBasis":
        self._check(other)
        return PowerBasis(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other) -> "PowerBasis":
        if isinstance(other, PowerBasis):
            self._check(other)
            out = [Fraction(0)] * 3
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    k = i + j
                    out[k % 3] += a * b / Fraction(self.p) ** (k // 3)
            return PowerBasis(self.p, tuple(out))
        s = Fraction(other)
        return PowerBasis(self.p, tuple(s * a for a in self.coeffs))

    __rmul__ = __mul__

    def _check(self, other: "PowerBasis") -> None:
        if other.p != self.p:
            raise DomainError("power-basis values at different primes")

    def to_mpf(self, dps: int = 30):
        with mpmath.workdps(dps):
            r = mpmath.mpf(self.p) ** (-mpmath.mpf(1) / 3)
            return sum(mpmath.mpf(c.numerator) / c.denominator * r**i for i, c in enumerate(self.coeffs))

    def __float__(self) -> float:
        return float(self.to_mpf())

    def __str__(self) -> str:
        c0, c1, c2 = self.coeffs
        return f"{c0} + ({c1})*{self.p}^(-1/3) + ({c2})*{self.p}^(-2/3)"


# ---------------------------------------------------------------------------
# Euler product engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerProductResult:
    value: float
    lower: float
    upper: float
    p_cutoff: int

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class TailCertificate:
    """|R(p)| <= K p^{-(1 + delta)} for every prime p >= p_from."""

    K: float
    delta: float
    p_from: int = 2

    def tail_bound(self, N: int) -> float:
        # sum_{n > N} n^{-(1+delta)} <= N^{-delta} / delta
        return self.K * N ** (-self.delta) / self.delta


@dataclass(frozen=True)
class LogSeries:
    """log f(p) ~ sum_k coeffs[k] p^{-k/m}."""

    m: int
    coeffs: tuple[Fraction, ...]

    def evaluate(self, p: int) -> float:
        t = p ** (-1.0 / self.m)
        return math.fsum(float(c) * t**k for k, c in enumerate(self.coeffs) if c)


def log_series(num: Sequence, den: Sequence, m: int, terms: int) -> LogSeries:
    """Exact coefficients of log(num(t) / den(t)) up to t^terms.

    num and den are coefficient lists in t with constant term 1.
    """
    def log_poly(P):
        P = [Fraction(x) for x in P] + [Fraction(0)] * (terms + 1)
        if P[0] != 1:
            raise DomainError("polynomial must have constant term 1")
        L = [Fraction(0)] * (terms + 1)
        # P L' = P'  =>  k l_k = k p_k - sum_{i=1}^{k-1} p_i (k - i) l_{k-i}
        for k in range(1, terms + 1):
            s = k * P[k]
            for i in range(1, k):
                s -= P[i] * (k - i) * L[k - i]
            L[k] = s / k
        return L

    a, b = log_poly(num), log_poly(den)
    coeffs = tuple(x - y for x, y in zip(a, b))
    for k, c in enumerate(coeffs):
        if c and Fraction(k, m) <= 1:
            raise DomainError(f"log-series term t^{k} makes the product diverge")
    return LogSeries(m, coeffs)


def root_certificate(n_roots: int, rho: float, terms: int, m: int) -> TailCertificate:
    """Remainder bound for the log series of a ratio of polynomials.

    If num/den has n_roots roots in total, all of modulus >= 1/rho, then
    |c_k| <= n_roots rho^k / k, so for rho t <= 1/2 the remainder after
    ``terms`` terms is at most 2 n_roots (rho t)^(terms + 1).
    """
    K = 2 * n_roots * rho ** (terms + 1)
    return TailCertificate(K=K, delta=(terms + 1) / m - 1, p_from=math.ceil((2 * rho) ** m))


@lru_cache(maxsize=32)
def _primes_upto(n: int) -> np.ndarray:
    return small_primes(n)


def _prime_zeta_tail(s: Fraction, N: int, p_min: int) -> float:
    """sum over primes p > N of p^{-s}, via the prime zeta function."""
    with mpmath.workdps(30):
        total = mpmath.primezeta(mpmath.mpf(s.numerator) / s.denominator)
        pr = _primes_upto(N)
        part = math.fsum((pr.astype(float) ** (-float(s))).tolist())
        return float(total - mpmath.mpf(part))


def euler_product(
    factor: Callable[[int], float],
    p_min: int = 2,
    target_width: float = 1e-9,
    certificate: TailCertificate | None = None,
    series: LogSeries | None = None,
    cutoff: int | None = None,
    max_cutoff: int = 10**7,
) -> EulerProductResult:
    """Product of factor(p) over primes p >= p_min with a tail enclosure.

    Args:
        factor: per-prime factor, positive.
        p_min: smallest prime included.
        target_width: requested upper - lower; the cutoff doubles until met.
        certificate: bound on the part of log factor(p) not covered by
            ``series``; required unless the factor is identically 1.
        series: optional exact log expansion used to sum the tail.
        cutoff: fixed prime cutoff (skips the search).
        max_cutoff: give up beyond this cutoff.
    """
    if certificate is None:
        certificate = TailCertificate(K=0.0, delta=1.0)
    N = cutoff if cutoff is not None else max(1000, certificate.p_from, p_min)
    while True:
        res = _euler_at(factor, p_min, certificate, series, N)
        if cutoff is not None or res.width <= target_width:
            return res
        if N * 2 > max_cutoff:
            raise ResourceError(f"Euler product needs a cutoff beyond {max_cutoff} for width {target_width}")
        N *= 2


def _euler_at(factor, p_min, cert, series, N) -> EulerProductResult:
    if N < cert.p_from:
        raise DomainError(f"cutoff {N} below the certificate range p >= {cert.p_from}")
    pr = [int(p) for p in _primes_upto(N) if p >= p_min]
    logs = []
    for p in pr:
        f = float(factor(p))
        if f <= 0:
            raise DomainError(f"factor at {p} is not positive")
        lf = math.log(f)
        logs.append(lf)
        if p >= cert.p_from:
            r = lf - (series.evaluate(p) if series is not None else 0.0)
            if abs(r) > cert.K * p ** (-(1 + cert.delta)) * (1 + 1e-9) + 1e-15:
                raise IntegrityError(f"tail certificate violated at p = {p}")
    total = math.fsum(logs)
    if series is not None:
        tail = []
        for k, c in enumerate(series.coeffs):
            if c:
                tail.append(float(c) * _prime_zeta_tail(Fraction(k, series.m), N, p_min))
        total += math.fsum(tail)
    err = cert.tail_bound(N) + ROUNDING_SLACK
    value = math.exp(total)
    return EulerProductResult(value, value * math.exp(-err), value * math.exp(err), N)


# ---------------------------------------------------------------------------
# Named products
# ---------------------------------------------------------------------------

SERIES_TERMS = 40


@lru_cache(maxsize=None)
def main_constant() -> EulerProductResult:
    """prod_p (1 + 1/(p+1)) (1 - 1/p) over all primes."""
    # t = 1/p: factor = (1 + t - 2t^2) / (1 + t); roots 1, -1/2, -1, so rho = 2.
    s = log_series([1, 1, -2], [1, 1], 1, SERIES_TERMS)
    cert = root_certificate(3, 2.0, SERIES_TERMS, 1)
    return euler_product(lambda p: (1 + 1 / (p + 1)) * (1 - 1 / p), 2, 1e-10, cert, s)


@lru_cache(maxsize=None)
def c2_product() -> EulerProductResult:
    """prod_{p > 3} (1 - 2/((p+1)(p+2)) + p^{-4/3} (1 + p^{-1/3}) p^2/((p+1)(p+2)))."""
    # t = p^{-1/3}: factor = (1 + 3t^3 + t^4 + t^5) / ((1 + t^3)(1 + 2t^3)).
    # 11 roots; the smallest modulus is 0.666 (quintic), so rho = 1.51.
    s = log_series([1, 0, 0, 3, 1, 1], [1, 0, 0, 3, 0, 0, 2], 3, SERIES_TERMS)
    cert = root_certificate(11, 1.51, SERIES_TERMS, 3)

    def f(p):
        return 1 - 2 / ((p + 1) * (p + 2)) + p ** (-4 / 3) * (1 + p ** (-1 / 3)) * p * p / ((p + 1) * (p + 2))

    return euler_product(f, 5, 1e-10, cert, s)


@lru_cache(maxsize=None)
def tame_product() -> EulerProductResult:
    """prod_{p >= 5} (1 - 1/p)^3 (1 + 3/p + p^{-4/3} + p^{-5/3})."""
    # t = p^{-1/3}: factor = (1 - t^3)^3 (1 + 3t^3 + t^4 + t^5); 14 roots, rho = 1.51.
    s = log_series(np.polynomial.polynomial.polymul([1, 0, 0, -3, 0, 0, 3, 0, 0, -1], [1, 0, 0, 3, 1, 1]).astype(int).tolist(),
                   [1], 3, SERIES_TERMS)
    cert = root_certificate(14, 1.51, SERIES_TERMS, 3)
    return euler_product(lambda p: (1 - 1 / p) ** 3 * (1 + 3 / p + p ** (-4 / 3) + p ** (-5 / 3)), 5, 1e-10, cert, s)


def zeta3(tol: float = 1e-16) -> float:
    """zeta(3) = (5/2) sum_k (-1)^(k+1) / (k^3 binom(2k, k)).

    The series alternates with decreasing terms, so the tail is bounded by
    the first omitted term.
    """
    total = Fraction(0)
    k = 1
    while True:
        term = Fraction(5, 2 * k**3 * math.comb(2 * k, k))
        if term < tol / 4:
            return float(total)
        total += term if k % 2 else -term
        k += 1


# ---------------------------------------------------------------------------
# Local sums
# ---------------------------------------------------------------------------


def tame_table(p: int) -> list[etale.LocalEtaleRecord]:
    """Galois extensions of Q_p (p >= 5) with group inside D6, by p mod 3."""
    if p in (2, 3):
        raise DomainError("use the bundled wild table at 2 and 3")
    if p < 5 or not _is_prime(p):
        raise DomainError(f"{p} is not a prime >= 5")
    rows: list[tuple[str, int, int]] = [("1", 0, 1), ("C2", 0, 1), ("C2", 1, 2), ("C3", 0, 1), ("C2xC2", 2, 1),
                                        ("C6", 0, 1), ("C6", 3, 2)]
    if p % 3 == 1:
        # mu_3 in Q_p: three ramified C3 fields and the C6 fields built on them
        rows += [("C3", 2, 3), ("C6", 4, 3), ("C6", 5, 6)]
    else:
        # the ramified C3 characters live over the unramified quadratic
        rows += [("S3", 4, 1), ("D6", 10, 1)]
    out = []
    for g, v, n in rows:
        for i in range(n):
            out.append(etale.LocalEtaleRecord(p, g, v, etale.GROUP_AUT[g], f"tame:{g}:v{v}#{i + 1}"))
    return out


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, math.isqrt(n) + 1))


def field_sum(p: int, table: Sequence[etale.LocalEtaleRecord] | None = None) -> PowerBasis:
    """sum over subgroups D <= D6 and Galois K/Q_p with group D of |Aut(D)| |Disc K|_p^{[G:D]/6}."""
    if p in (2, 3):
        rows = [r for r in (table if table is not None else etale.local_etale_table()) if r.p == p]
        if not rows:
            raise DataError(f"local table has no rows at p = {p}")
    else:
        rows = tame_table(p)
    s = PowerBasis.zero(p)
    for r in rows:
        if r.galois_group not in etale.GALOIS_GROUPS:
            raise DataError(f"unknown group {r.galois_group}")
        index = Fraction(12, etale.GROUP_ORDER[r.galois_group])
        weight = etale.SUBGROUP_COUNT[r.galois_group] * r.aut_count
        s = s + PowerBasis.term(p, weight, r.disc_exponent * index / 6)
    return s


def tame_closed_form(p: int) -> PowerBasis:
    """12 + 36/p + 12 p^{-4/3} + 12 p^{-5/3}."""
    return (PowerBasis.term(p, 12, 0) + PowerBasis.term(p, 36, 1) + PowerBasis.term(p, 12, Fraction(4, 3))
            + PowerBasis.term(p, 12, Fraction(5, 3)))


def wild_closed_form(p: int) -> PowerBasis:
    if p == 2:
        return PowerBasis.term(2, Fraction(69, 2), 0) + PowerBasis.term(2, 12, Fraction(4, 3)) + PowerBasis.term(2, 12, Fraction(5, 3))
    if p == 3:
        return PowerBasis.term(3, Fraction(224, 9), 0) + PowerBasis.term(3, 16, Fraction(4, 3)) + PowerBasis.term(3, 16, Fraction(5, 3))
    raise DomainError("wild closed forms exist at 2 and 3 only")


def inner_factor(p: int) -> PowerBasis:
    """23/8 + 2^{-4/3} + 2^{-5/3} at p = 2 and 14/9 + 3^{-4/3} + 3^{-5/3} at p = 3."""
    head = {2: Fraction(23, 8), 3: Fraction(14, 9)}[p]
    return PowerBasis.term(p, head, 0) + PowerBasis.term(p, 1, Fraction(4, 3)) + PowerBasis.term(p, 1, Fraction(5, 3))


def c3_local(p) -> PowerBasis | Fraction:
    """sum over (Q, E) at p of w_p(E) / p^{v_p(Delta)/6}, exactly."""
    if p == "inf":
        quads = [q for q in etale.quadratic_classes() if q.p == "inf"]
        return sum((Fraction(t.multiplicity) * etale.cubic_weight("inf", t.type_id)
                    for t in etale.cubic_types() if t.p == "inf"), Fraction(0)) * len(quads)
    s = PowerBasis.zero(p)
    for q in etale.quadratic_classes():
        if q.p != p:
            continue
        for t in etale.cubic_types():
            if t.p != p:
                continue
            v = etale.d6_exponent(p, q.class_id, t.type_id)
            s = s + PowerBasis.term(p, t.multiplicity * etale.cubic_weight(p, t.type_id), Fraction(v, 6))
    return s


def c1() -> EulerProductResult:
    """91 / (13824 pi^4) * prod_p (1 + 1/(p+1)) (1 - 1/p)."""
    k = 91 / (13824 * math.pi**4)
    m = main_constant()
    return EulerProductResult(k * m.value, k * m.lower, k * m.upper, m.p_cutoff)


def c2() -> EulerProductResult:
    r = c2_product()
    return EulerProductResult(0.6 * r.value, 0.6 * r.lower, 0.6 * r.upper, r.p_cutoff)


def c3() -> float:
    return float(c3_local("inf")) * float(c3_local(2)) * float(c3_local(3))


def c3_by_sigma() -> float:
    """The same sum taken over every local specification (no factorization)."""
    w = {p: {t.type_id: float(t.multiplicity * etale.cubic_weight(p, t.type_id)) for t in etale.cubic_types() if t.p == p}
         for p in etale.PLACES}
    total = []
    for s in etale.all_sigmas():
        total.append(w["inf"][s.cubic_inf] * w[2][s.cubic2] * w[3][s.cubic3] / s.delta_sigma ** (1 / 6))
    return math.fsum(total)


def closed_form_constant() -> EulerProductResult:
    """(1 / (2^2 3^7)) (23/8 + ...)(14/9 + ...) prod_{p >= 5} (...)."""
    k = float(inner_factor(2)) * float(inner_factor(3)) / (4 * 3**7)
    r = tame_product()
    return EulerProductResult(k * r.value, k * r.lower, k * r.upper, r.p_cutoff)


def ls_constant(table: Sequence[etale.LocalEtaleRecord] | None = None) -> EulerProductResult:
    """c(G) = (1 / (2^4 3^3)) prod_p ((1 - 1/p)^3 / 12) field_sum(p)."""
    local = 1.0
    for p in (2, 3):
        local *= (1 - 1 / p) ** 3 / 12 * float(field_sum(p, table))
    k = local / (2**4 * 3**3)
    # for p >= 5 the local factor is (1 - 1/p)^3 (12 + 36/p + ...)/12, the tame product
    r = tame_product()
    return EulerProductResult(k * r.value, k * r.lower, k * r.upper, r.p_cutoff)


def c123() -> EulerProductResult:
    a, b, c = c1(), c2(), c3()
    return EulerProductResult(a.value * b.value * c, a.lower * b.lower * c, a.upper * b.upper * c,
                              max(a.p_cutoff, b.p_cutoff))


# ---------------------------------------------------------------------------
# Small arithmetic factors
# ---------------------------------------------------------------------------


def psi(m: int) -> Fraction:
    """prod_{p | m} p / (p + 1)."""
    if m == 0:
        raise DomainError("psi(0) undefined")
    out = Fraction(1)
    for p, _ in factorize(m).factors:
        out *= Fraction(p, p + 1)
    return out


def C_qe(q: int, e: int) -> EulerProductResult:
    """prod_p (1 + 1_{p not | 6qe}/(p+1)) (1 - 1/p) = main constant / prod_{p | 6qe} (1 + 1/(p+1))."""
    if q < 1 or e < 1:
        raise DomainError("q and e must be positive")
    k = 1.0
    for p, _ in factorize(6 * q * e).factors:
        k /= 1 + 1 / (p + 1)
    m = main_constant()
    return EulerProductResult(k * m.value, k * m.lower, k * m.upper, m.p_cutoff)


PHI_HAT_STRATA = ("zero", "disc_divisible_nonzero", "generic")


def phi_hat_magnitude(p: int, stratum: str) -> Fraction:
    """|Phi_hat_p| on the three strata of V(F_p): p^-1 + p^-2 - p^-3, p^-2 - p^-3, p^-3."""
    if p == 3:
        raise DomainError("p = 3 is excluded")
    if not _is_prime(p):
        raise DomainError(f"{p} is not prime")
    P = Fraction(1, p)
    if stratum == "zero":
        return P + P**2 - P**3
    if stratum == "disc_divisible_nonzero":
        return P**2 - P**3
    if stratum == "generic":
        return P**3
    raise DomainError(f"unknown stratum {stratum!r}")


# ---------------------------------------------------------------------------
# Squarefree integers in progressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProgressionCount:
    a: int
    c: int
    m: int
    Y: int
    count: int
    main: float
    slack: float

    @property
    def ok(self) -> bool:
        return abs(self.count - self.main) <= self.slack


def squarefree_progression_count(a: int, c: int, m: int, Y: int) -> int:
    """#{q <= Y squarefree : gcd(q, m) = 1, q = a mod c}."""
    if c < 1 or m < 1 or Y < 1:
        raise DomainError("c, m, Y must be positive")
    sq = squarefree_flags(Y)
    q = np.arange(a % c, Y + 1, c)
    q = q[q >= 1]
    keep = sq[q]
    for p, _ in factorize(m).factors if m > 1 else ():
        keep &= q % p != 0
    return int(keep.sum())


def squarefree_progression_check(a: int, c: int, m: int, Y: int, slack_factor: float = 20.0) -> ProgressionCount:
    """Compare the count with 6 Y psi(cm) / (pi^2 phi(c)); slack slack_factor sqrt(Y) tau(m)."""
    if math.gcd(a * m, c) != 1:
        raise DomainError("need gcd(am, c) = 1")
    mv_c = factorize(c) if c > 1 else None
    phi_c = c
    if mv_c is not None:
        for p, _ in mv_c.factors:
            phi_c = phi_c // p * (p - 1)
    tau_m = 1
    if m > 1:
        for _, e in factorize(m).factors:
            tau_m *= e + 1
    main = 6 * Y * float(psi(c * m)) / (math.pi**2 * phi_c)
    return ProgressionCount(a, c, m, Y, squarefree_progression_count(a, c, m, Y), main,
                            slack_factor * math.sqrt(Y) * tau_m)

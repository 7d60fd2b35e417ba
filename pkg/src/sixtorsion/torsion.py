"""Torsion of quadratic class groups, cubic-field counts, and their error terms.

h3 comes from cubic fields: h3(D) = 1 + 2 #{cubic fields of discriminant D}
(for D > 0 this is the 3-torsion of the wide class group, which equals the
narrow one).  h2 comes from genus theory: the narrow 2-torsion is
2^(omega(D) - 1), and for D > 0 the wide 2-torsion is half of it when some
prime p = 3 mod 4 divides D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import constants
from .arith import (factorize, fundamental_discriminants, has_prime_3mod4_array, is_fundamental_discriminant,
                    is_squarefree, omega_array, small_primes)
from .cubic.cache import get_field_table
from .cubic.fields import FieldFilter, FieldTable
from .errors import DomainError, RangeError

SIGNS = {"minus": -1, "plus": 1, "both": 0}
VARIANTS = ("h2", "h3", "h6", "h6_plus")


@dataclass(frozen=True)
class TorsionRow:
    D: int
    h2: int
    h2_plus: int
    h3: int
    h6: int
    h6_plus: int


@dataclass
class TorsionTable:
    """Column form of TorsionRow over all fundamental D with 0 < sign*D < X."""

    X: int
    sign: int
    D: np.ndarray
    h2: np.ndarray
    h2_plus: np.ndarray
    h3: np.ndarray

    @property
    def h6(self) -> np.ndarray:
        return self.h2 * self.h3

    @property
    def h6_plus(self) -> np.ndarray:
        return self.h2_plus * self.h3

    def __len__(self) -> int:
        return int(self.D.shape[0])

    def column(self, variant: str) -> np.ndarray:
        if variant not in VARIANTS:
            raise DomainError(f"unknown variant {variant!r}")
        return getattr(self, variant)

    def rows(self):
        for i in range(len(self)):
            yield TorsionRow(int(self.D[i]), int(self.h2[i]), int(self.h2_plus[i]), int(self.h3[i]),
                             int(self.h6[i]), int(self.h6_plus[i]))


def _sign(sign) -> int:
    if isinstance(sign, str):
        if sign not in SIGNS:
            raise DomainError(f"unknown sign {sign!r}")
        return SIGNS[sign]
    if sign not in (-1, 0, 1):
        raise DomainError(f"unknown sign {sign!r}")
    return int(sign)


def _fields(X: int, fields: FieldTable | None) -> FieldTable:
    if fields is None:
        return get_field_table(X)
    if fields.X and fields.X < X:
        raise RangeError(f"cubic-field data covers |disc| <= {fields.X}, need {X}")
    return fields


def cubic_counts(fields: FieldTable, X: int, sign: int) -> np.ndarray:
    """counts[n] = #{cubic fields with disc = sign * n}, 0 <= n < X."""
    m = (np.sign(fields.disc) == sign) & (np.abs(fields.disc) < X)
    return np.bincount(np.abs(fields.disc[m]), minlength=X)[:X]


def torsion_row(D: int, fields: FieldTable | None = None) -> TorsionRow:
    if not is_fundamental_discriminant(D):
        raise DomainError(f"{D} is not a fundamental discriminant")
    fields = _fields(abs(D), fields)
    h3 = 1 + 2 * int(np.count_nonzero(fields.disc == D))
    f = factorize(abs(D))
    h2p = 2 ** (f.omega - 1)
    h2 = h2p
    if D > 0 and any(p % 4 == 3 for p in f.primes):
        h2 = h2p // 2
    return TorsionRow(D, h2, h2p, h3, h2 * h3, h2p * h3)


def torsion_table(X: int, sign, fields: FieldTable | None = None) -> TorsionTable:
    s = _sign(sign)
    if s == 0:
        raise DomainError("torsion rows are per sign")
    fields = _fields(X - 1, fields)
    D = fundamental_discriminants(X, s)
    n = np.abs(D)
    om = omega_array(max(X - 1, 1))[n].astype(np.int64)
    h2p = np.left_shift(np.int64(1), om - 1)
    h2 = h2p.copy()
    if s > 0:
        bad = has_prime_3mod4_array(max(X - 1, 1))[n]
        h2[bad] //= 2
    h3 = 1 + 2 * cubic_counts(fields, X, s)[n]
    return TorsionTable(X, s, D, h2, h2p, h3.astype(np.int64))


def write_torsion_rows(path, table: TorsionTable) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("D,h2,h2_plus,h3,h6,h6_plus\n")
        h6, h6p = table.h6, table.h6_plus
        for i in range(len(table)):
            fh.write(f"{table.D[i]},{table.h2[i]},{table.h2_plus[i]},{table.h3[i]},{h6[i]},{h6p[i]}\n")


# ---------------------------------------------------------------------------
# Sums and main terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionSum:
    X: int
    sign: int
    variant: str
    sum: int
    count: int
    main_term: float | None
    ratio: float | None


def h2_main_term(X: int) -> float:
    """(3/pi^2) X sum_{q < sqrt X} mu^2(q) prod_{p | q} 1/(p + 1)."""
    Q = math.isqrt(X - 1) if X > 1 else 0
    if Q * Q == X:
        Q -= 1
    w = np.ones(Q + 1)
    sq = np.ones(Q + 1, dtype=bool)
    for p in small_primes(Q):
        p = int(p)
        w[p::p] /= p + 1
        sq[p * p :: p * p] = False
    w[0] = 0.0
    return 3 / math.pi**2 * X * math.fsum(w[sq].tolist())


def main_term(X: int, sign: int, variant: str) -> float | None:
    """Leading term of the torsion sum where one is known, else None."""
    c = constants.main_constant().value
    L = X * math.log(X)
    if variant in ("h6", "h6_plus") and sign < 0:
        return 3 / math.pi**2 * L * c
    if variant == "h6_plus" and sign > 0:
        return 2 / math.pi**2 * L * c
    if variant == "h6" and sign > 0:
        # asymptotic only, with no error term: trend use
        return 1 / math.pi**2 * L * c
    if variant == "h2" and sign < 0:
        return h2_main_term(X)
    return None


def torsion_sums(X: int, sign, variant: str, fields: FieldTable | None = None) -> TorsionSum:
    s = _sign(sign)
    t = torsion_table(X, s, fields)
    total = int(t.column(variant).sum())
    mt = main_term(X, s, variant)
    return TorsionSum(X, s, variant, total, len(t), mt, None if mt is None else total / mt)


@dataclass(frozen=True)
class ExpectationRatios:
    X: int
    count: int
    E2: Fraction
    E3: Fraction
    E6: Fraction

    @property
    def ratio(self) -> Fraction:
        return self.E6 / (self.E2 * self.E3)


def expectation_ratios(X: int, fields: FieldTable | None = None) -> ExpectationRatios:
    """Averages of h2, h3, h6 over fundamental D in (-X, 0), as exact rationals."""
    t = torsion_table(X, -1, fields)
    if len(t) == 0:
        raise DomainError("empty range: no fundamental discriminant in (-X, 0)")
    n = len(t)
    return ExpectationRatios(X, n, Fraction(int(t.h2.sum()), n), Fraction(int(t.h3.sum()), n),
                             Fraction(int(t.h6.sum()), n))


# ---------------------------------------------------------------------------
# N3(X, d, Sigma) and error terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountModel:
    """Which cubic fields are counted: all (N3) or fundamental-discriminant ones (N3*)."""

    kind: str = "N3"
    sign: str = "both"

    def __post_init__(self):
        if self.kind not in ("N3", "N3*"):
            raise DomainError(f"unknown count {self.kind!r}")
        _sign(self.sign)

    @property
    def M(self) -> float:
        base = 1 / (3 * constants.zeta3()) if self.kind == "N3" else 2 / math.pi**2
        return base * {"both": 1.0, "plus": 0.25, "minus": 0.75}[self.sign]

    def g(self, p: int) -> Fraction:
        if self.kind == "N3":
            return Fraction(p * p + p, p * p + p + 1)
        return Fraction(p, p + 1)

    def density(self, d: int) -> float:
        """M g(d) / d."""
        out = Fraction(1, d)
        for p, _ in factorize(d).factors:
            out *= self.g(p)
        return self.M * float(out)


def _sigma_modulus(sigma: FieldFilter | None) -> int:
    if sigma is None:
        return 1
    m = 1
    if sigma.type2 is not None:
        m *= 2
    if sigma.type3 is not None:
        m *= 3
    return m


def _model_mask(fields: FieldTable, X: int, model: CountModel, sigma: FieldFilter | None) -> np.ndarray:
    mask = np.abs(fields.disc) < X
    s = SIGNS[model.sign]
    if s:
        mask &= np.sign(fields.disc) == s
    if sigma is not None:
        mask &= sigma.mask(fields)
    if model.kind == "N3*":
        mask &= FieldFilter(not_totally_ramified_outside=_sigma_modulus(sigma)).mask(fields)
    return mask


def n3(X: int, d: int, sigma: FieldFilter | None = None, model: CountModel = CountModel(),
       fields: FieldTable | None = None) -> int:
    """#{cubic fields K in the model with |Disc K| < X, d | Disc K, K satisfying sigma}."""
    if d < 1 or not is_squarefree(d):
        raise DomainError(f"d = {d} must be a positive squarefree integer")
    fields = _fields(X - 1, fields)
    mask = _model_mask(fields, X, model, sigma)
    return int(np.count_nonzero(mask & (fields.disc % d == 0)))


def error_term(X: int, d: int, sigma: FieldFilter | None = None, model: CountModel = CountModel(),
               fields: FieldTable | None = None, local_density: float | None = None) -> float:
    """n3 - M (g(d)/d) X, times the local density of sigma when sigma is given.

    The density of a local specification is not computed here, so a nontrivial
    sigma needs ``local_density``.
    """
    if sigma is not None and local_density is None:
        raise DomainError("a local specification needs its local_density")
    dens = 1.0 if local_density is None else local_density
    return n3(X, d, sigma, model, fields) - model.density(d) * dens * X


@dataclass
class LodScan:
    X: int
    d_max: int
    model: CountModel
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def aggregate(self) -> float:
        return math.fsum(r[3] for r in self.rows)

    @property
    def normalized(self) -> float:
        return self.aggregate / self.X


def lod_scan(X: int, d_max: int, model: CountModel = CountModel("N3*"), fields: FieldTable | None = None,
             X_d: dict[int, int] | None = None) -> LodScan:
    """(d, count, main, |E|) for squarefree d <= d_max, and A(X, d_max) = sum |E|.

    ``X_d`` optionally overrides the bound per d (each must be <= X).
    """
    if d_max * d_max > X:
        raise DomainError("d_max must be at most sqrt(X)")
    fields = _fields(X - 1, fields)
    base = _model_mask(fields, X, model, None)
    disc = fields.disc[base]
    absd = np.abs(disc)
    out = LodScan(X, d_max, model)
    for d in range(1, d_max + 1):
        if not is_squarefree(d):
            continue
        Xd = X if X_d is None else X_d.get(d, X)
        if Xd > X:
            raise RangeError(f"X_d = {Xd} exceeds X")
        cnt = int(np.count_nonzero((disc % d == 0) & (absd < Xd)))
        main = model.density(d) * Xd
        out.rows.append((d, cnt, main, abs(cnt - main)))
    return out


def write_lod_scan(path, scan: LodScan) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("d,count,main,abs_error\n")
        for d, c, m, e in scan.rows:
            fh.write(f"{d},{c},{m:.6f},{e:.6f}\n")


# ---------------------------------------------------------------------------
# Genus-theory identity
# ---------------------------------------------------------------------------


def squarefree_kernel(n: int) -> int:
    return math.prod(factorize(abs(n)).primes)


def hyperbola_identity_check(X: int) -> bool:
    """Check sum h2 = sum_q #{D : q | D, q^2 < sfk(D)} over fundamental -X < D < 0.

    Per D, the squarefree q | D with q^2 < sfk(D) are the divisors of sfk(D)
    below its square root; since sfk(D) is not a square there are exactly
    half of its 2^omega divisors, i.e. h2(D).  Both sides are computed
    directly: the left from genus theory, the right by listing divisors.
    """
    if X < 4:
        raise DomainError("X must be at least 4")
    D = fundamental_discriminants(X, -1)
    n = np.abs(D)
    om = omega_array(X - 1)[n].astype(np.int64)
    left = np.left_shift(np.int64(1), om - 1)
    # right side from the prime factors of each |D|
    from .arith import build_factor_table

    spf = build_factor_table(X).spf
    right = _count_small_divisors(n.astype(np.int64), spf)
    if not np.array_equal(left, right):
        return False
    # the exchanged sum: sum over squarefree q of #{D : q | D, q^2 < sfk(D)}
    sfk = _squarefree_kernel_array(n.astype(np.int64), spf)
    total = 0
    for q in range(1, math.isqrt(X) + 1):
        if not is_squarefree(q):
            continue
        total += int(np.count_nonzero((n % q == 0) & (q * q < sfk)))
    return total == int(left.sum())


def _squarefree_kernel_array(n: np.ndarray, spf: np.ndarray) -> np.ndarray:
    out = np.ones_like(n)
    m = n.copy()
    while True:
        live = m > 1
        if not live.any():
            return out
        p = spf[m[live]].astype(np.int64)
        out[live] *= p
        mm = m[live]
        while True:
            div = mm % p == 0
            if not div.any():
                break
            mm[div] //= p[div]
        m[live] = mm


def _count_small_divisors(n: np.ndarray, spf: np.ndarray) -> np.ndarray:
    """#{q | sfk(n) : q^2 < sfk(n)} by explicit divisor lists."""
    out = np.empty(n.shape[0], dtype=np.int64)
    for i, v in enumerate(n.tolist()):
        primes = []
        while v > 1:
            p = int(spf[v])
            primes.append(p)
            while v % p == 0:
                v //= p
        k = math.prod(primes)
        divs = [1]
        for p in primes:
            divs += [x * p for x in divs]
        out[i] = sum(1 for q in divs if q * q < k)
    return out

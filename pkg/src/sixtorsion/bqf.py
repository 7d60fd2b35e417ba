"""Class groups of imaginary quadratic fields from reduced binary quadratic forms.

Used only to cross-check 3-torsion counts.  A form (a, b, c) is
a x^2 + b x y + c y^2 with b^2 - 4ac = D < 0 and a > 0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .arith import is_fundamental_discriminant
from .errors import DomainError, IntegrityError, RangeError

# torsion queries are refused beyond this |D|
MAX_ABS_DISC = 10**7


class QuadForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c


@dataclass(frozen=True)
class ClassGroupStruct:
    D: int
    order: int
    elementary_divisors: tuple[int, ...]

    def torsion(self, n: int) -> int:
        return math.prod(math.gcd(d, n) for d in self.elementary_divisors)


def _check_disc(D: int) -> None:
    if D >= 0 or not is_fundamental_discriminant(D):
        raise DomainError(f"{D} is not a negative fundamental discriminant")


def is_reduced(f: QuadForm) -> bool:
    a, b, c = f
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduce_form(f: QuadForm) -> QuadForm:
    """Reduced form equivalent to the positive definite form f."""
    a, b, c = f
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise DomainError(f"{f} is not positive definite")
    while True:
        # normalize b into (-a, a]
        if not (-a < b <= a):
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadForm(a, b, c)


def reduced_forms(D: int) -> list[QuadForm]:
    """All reduced forms of discriminant D (primitive, since D is fundamental)."""
    _check_disc(D)
    out = []
    a_max = math.isqrt(-D // 3)
    for a in range(1, a_max + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            f = QuadForm(a, b, c)
            if is_reduced(f):
                out.append(f)
    return out


def principal_form(D: int) -> QuadForm:
    return reduce_form(QuadForm(1, D % 2, (D % 2 - D) // 4))


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Gauss composition via Cohen's Algorithm 5.4.7, then reduction."""
    if f.disc != g.disc:
        raise DomainError("forms have different discriminants")
    a1, b1, c1 = f
    a2, b2, c2 = g
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, y1, _ = _xgcd(a2, a1)
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, v = _xgcd(s, d)
        y2 = -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return reduce_form(QuadForm(a3, b3, c3))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x a + y b = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def inverse(f: QuadForm) -> QuadForm:
    return reduce_form(QuadForm(f.a, -f.b, f.c))


def element_order(f: QuadForm) -> int:
    e = principal_form(f.disc)
    g, k = f, 1
    while g != e:
        g = compose(g, f)
        k += 1
    return k


@lru_cache(maxsize=4096)
def class_group(D: int, max_abs_disc: int = MAX_ABS_DISC) -> ClassGroupStruct:
    """Group structure from the orders of all elements."""
    _check_disc(D)
    if -D > max_abs_disc:
        raise RangeError(f"|D| = {-D} exceeds the oracle range {max_abs_disc}")
    forms = reduced_forms(D)
    h = len(forms)
    orders = [element_order(f) for f in forms]
    return ClassGroupStruct(D, h, _elementary_divisors(h, orders))


def _elementary_divisors(h: int, orders: list[int]) -> tuple[int, ...]:
    """Invariant factors d_1 | d_2 | ... of an abelian group from its element orders.

    For each prime p, r_k = log_p #{x : x^(p^k) = 1} and r_k - r_{k-1} counts
    the cyclic p-factors of exponent >= k.
    """
    counts = Counter(orders)
    primes = [p for p in range(2, h + 1) if h % p == 0 and all(p % q for q in range(2, math.isqrt(p) + 1))]
    exps: dict[int, list[int]] = {}
    for p in primes:
        at_least: list[int] = []
        prev, k = 0, 1
        while True:
            n_k = sum(c for o, c in counts.items() if p**k % o == 0)
            r_k = _log_exact(n_k, p)
            if r_k == prev:
                break
            at_least.append(r_k - prev)
            prev, k = r_k, k + 1
        exps[p] = sorted(sum(1 for c in at_least if c > i) for i in range(at_least[0]))
    rank = max((len(v) for v in exps.values()), default=0)
    divs = [1] * rank
    for p, es in exps.items():
        es = [0] * (rank - len(es)) + es
        for i, e in enumerate(es):
            divs[i] *= p**e
    if math.prod(divs) != h:
        raise IntegrityError(f"recovered group structure {divs} does not have order {h}")
    return tuple(divs)


def _log_exact(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    if n != 1:
        raise IntegrityError("torsion subgroup size is not a prime power")
    return k


def power(f: QuadForm, n: int) -> QuadForm:
    result = principal_form(f.disc)
    base = f
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def torsion_count(D: int, n: int, max_abs_disc: int = MAX_ABS_DISC) -> int:
    """#Cl(Q(sqrt D))[n], counted directly as #{x : x^n = 1}."""
    _check_disc(D)
    if -D > max_abs_disc:
        raise RangeError(f"|D| = {-D} exceeds the oracle range {max_abs_disc}")
    if n < 1:
        raise DomainError("n must be positive")
    e = principal_form(D)
    return sum(1 for f in reduced_forms(D) if power(f, n) == e)

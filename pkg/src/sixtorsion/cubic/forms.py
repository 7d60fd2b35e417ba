"""Binary cubic forms: discriminant, GL2(Z) action, irreducibility, maximality.

A form (a, b, c, d) stands for a x^3 + b x^2 y + c x y^2 + d y^3.  The action
used throughout is substitution, f.act(M)(x, y) = f(m00 x + m01 y, m10 x + m11 y);
it differs from the determinant-twisted action only by a sign, and f ~ -f
under -I anyway, so both give the same orbits.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from ..errors import DomainError, RangeError

INT128_MAX = 2**127 - 1


class BinaryCubicForm(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    def __call__(self, x, y):
        return self.a * x**3 + self.b * x**2 * y + self.c * x * y**2 + self.d * y**3

    @property
    def disc(self) -> int:
        return discriminant(self)

    def act(self, M) -> "BinaryCubicForm":
        return act(self, M)

    def hessian(self) -> tuple[int, int, int]:
        return hessian(self)

    def neg(self) -> "BinaryCubicForm":
        return BinaryCubicForm(-self.a, -self.b, -self.c, -self.d)


def discriminant(f) -> int:
    """b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd, checked against 128 bits."""
    a, b, c, d = (int(t) for t in f)
    D = b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d
    if abs(D) > INT128_MAX:
        raise RangeError("discriminant exceeds 128-bit range")
    return D


def hessian(f) -> tuple[int, int, int]:
    """Quadratic covariant (P, Q, R) with Q^2 - 4PR = -3 disc(f)."""
    a, b, c, d = f
    return (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)


def act(f, M) -> BinaryCubicForm:
    """f(m00 x + m01 y, m10 x + m11 y) for a 2x2 integer matrix M."""
    a, b, c, d = f
    (p, q), (r, s) = M
    # Expand a(px+qy)^3 + b(px+qy)^2(rx+sy) + c(px+qy)(rx+sy)^2 + d(rx+sy)^3.
    A = a * p**3 + b * p * p * r + c * p * r * r + d * r**3
    B = 3 * a * p * p * q + b * (p * p * s + 2 * p * q * r) + c * (q * r * r + 2 * p * r * s) + 3 * d * r * r * s
    C = 3 * a * p * q * q + b * (q * q * r + 2 * p * q * s) + c * (p * s * s + 2 * q * r * s) + 3 * d * r * s * s
    Dd = a * q**3 + b * q * q * s + c * q * s * s + d * s**3
    return BinaryCubicForm(A, B, C, Dd)


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def rational_roots(f) -> list[Fraction | None]:
    """Roots of f in P^1(Q); None stands for the point (1:0)."""
    coeffs = [int(t) for t in f]
    if not any(coeffs):
        raise DomainError("zero form")
    roots: list[Fraction | None] = []
    if coeffs[0] == 0:
        roots.append(None)
    while coeffs[0] == 0:
        coeffs.pop(0)
    # coeffs now describes f(x, 1) with nonzero leading term
    if coeffs[-1] == 0:
        roots.append(Fraction(0))
        while coeffs[-1] == 0:
            coeffs.pop()
    if len(coeffs) == 1:
        return roots
    lead, const = coeffs[0], coeffs[-1]
    for q in _divisors(lead):
        for p in _divisors(const):
            for s in (p, -p):
                r = Fraction(s, q)
                if r in roots:
                    continue
                val = 0
                for co in coeffs:
                    val = val * r + co
                if val == 0:
                    roots.append(r)
    return roots


def is_irreducible(f) -> bool:
    """True iff f has no linear factor over Q (nonzero discriminant required)."""
    if discriminant(f) == 0:
        raise DomainError("form has zero discriminant")
    a, b, c, d = f
    if a == 0 or d == 0:
        return False
    return not rational_roots(f)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def superforms(f, p: int) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Restrictions of p*f to the p + 1 lattices containing Z^2 with index p.

    Those lattices are Z^2 + Z(r/p, 1/p) for r mod p and Z^2 + Z(1/p, 0); in
    the bases {(1, 0), (r/p, 1/p)} and {(1/p, 0), (0, 1)} the restricted forms
    are p*f(x + r y/p, y/p) and p*f(x/p, y).
    """
    fr = tuple(Fraction(t) for t in f)
    out = []
    for r in range(p):
        g = act(fr, ((1, Fraction(r, p)), (0, Fraction(1, p))))
        out.append(tuple(p * t for t in g))
    g = act(fr, ((Fraction(1, p), 0), (0, 1)))
    out.append(tuple(p * t for t in g))
    return out


def is_maximal_at(f, p: int) -> bool:
    """Maximality of the cubic ring of f at p via index-p overring forms."""
    if not _is_prime(p):
        raise DomainError(f"{p} is not prime")
    if all(int(t) % p == 0 for t in f):
        return False
    for g in superforms(f, p):
        if all(t.denominator == 1 for t in g):
            return False
    return True


def is_maximal_at_fast(f, p: int) -> bool:
    """Same predicate via double roots mod p; used by the production engine."""
    a, b, c, d = (int(t) for t in f)
    if a % p == 0 and b % p == 0 and c % p == 0 and d % p == 0:
        return False
    p2 = p * p
    if a % p2 == 0 and b % p == 0:
        return False
    for r in range(p):
        if (a * r**3 + b * r * r + c * r + d) % p2 == 0 and (3 * a * r * r + 2 * b * r + c) % p == 0:
            return False
    return True


def roots_mod_p(f, p: int) -> list[tuple[int | None, int]]:
    """Roots of f in P^1(F_p) with multiplicities; None is (1:0)."""
    a, b, c, d = (int(t) % p for t in f)
    if (a, b, c, d) == (0, 0, 0, 0):
        raise DomainError("form vanishes mod p")
    out: list[tuple[int | None, int]] = []
    # multiplicity at (1:0) is the number of leading coefficients that vanish
    m = 0
    for t in (a, b, c):
        if t == 0:
            m += 1
        else:
            break
    if m:
        out.append((None, m))
    # affine roots: divide out by (x - r) repeatedly over F_p
    poly = [a, b, c, d]  # coefficients of x^3..x^0 of f(x, 1)
    while poly and poly[0] % p == 0:
        poly.pop(0)
    for r in range(p):
        k = 0
        q = poly[:]
        while len(q) > 1:
            # synthetic division by (x - r)
            acc = 0
            quo = []
            for coef in q:
                acc = (acc * r + coef) % p
                quo.append(acc)
            if quo[-1] != 0:
                break
            k += 1
            q = quo[:-1]
        if k:
            out.append((r, k))
    return out


RAMIFICATION_TYPES = ("split_111", "split_12", "inert_3", "partially_ramified", "totally_ramified")


def ramification_type(f, p: int) -> str:
    """Factorization shape of a form maximal at p."""
    if not is_maximal_at_fast(f, p):
        raise DomainError(f"form {tuple(f)} is not maximal at {p}")
    rts = roots_mod_p(f, p)
    total = sum(m for _, m in rts)
    if discriminant(f) % p == 0:
        if len(rts) == 1 and rts[0][1] == 3:
            return "totally_ramified"
        return "partially_ramified"
    if total == 3:
        return "split_111"
    if total == 1:
        return "split_12"
    return "inert_3"


def is_perfect_square(n: int) -> bool:
    from math import isqrt

    if n < 0:
        return False
    s = isqrt(n)
    return s * s == n

"""Canonical representatives of GL2(Z)-classes of irreducible binary cubic forms.

Positive discriminant: the Hessian (P, Q, R) is positive definite and the
representative is chosen with 0 <= Q <= P <= R; on the boundary of that
domain the finitely many matrices preserving it are tried and the
lexicographically smallest form wins.

Negative discriminant: f has one real root theta and a pair of complex roots.
The representative is the one whose complex root w lies in the PGL2(Z)
fundamental domain 0 < Re w < 1/2, |w| > 1 (never on the boundary when f is
irreducible, since each boundary condition is a rational condition on theta),
with leading coefficient a > 0.  Membership is decided exactly by comparing
theta with rationals through the sign of f at integer points.
"""

from __future__ import annotations

from itertools import product

import mpmath

from ..errors import DomainError, IntegrityError
from .forms import BinaryCubicForm, act, discriminant, hessian, is_irreducible

# Every M in GL2(Z) that can carry a reduced positive definite form to
# another reduced one has entries in {-1, 0, 1}.
SMALL_GL2 = tuple(
    ((p, q), (r, s))
    for p, q, r, s in product((-1, 0, 1), repeat=4)
    if p * s - q * r in (1, -1)
)


def _quad_act(H, M):
    P, Q, R = H
    (p, q), (r, s) = M
    return (
        P * p * p + Q * p * r + R * r * r,
        2 * P * p * q + Q * (p * s + q * r) + 2 * R * r * s,
        P * q * q + Q * q * s + R * s * s,
    )


def hessian_reduced(H) -> bool:
    P, Q, R = H
    return 0 <= Q <= P <= R


def _normalize_sign(f):
    f = tuple(f)
    for t in f:
        if t != 0:
            return f if t > 0 else tuple(-x for x in f)
    return f


def _canonical_positive(f):
    """Lexicographic minimum over the stabilizer of the reduced domain."""
    H = hessian(f)
    best = None
    for M in SMALL_GL2:
        if hessian_reduced(_quad_act(H, M)):
            g = _normalize_sign(act(f, M))
            if best is None or g < best:
                best = g
    return BinaryCubicForm(*best)


def _reduce_positive(f):
    P, Q, R = hessian(f)
    if P <= 0:
        raise IntegrityError("Hessian not positive definite")
    for _ in range(10_000):
        # translate so that |Q| <= P, then swap if P > R
        k = -((Q + P) // (2 * P)) if Q > P or Q < -P else 0
        if k:
            M = ((1, k), (0, 1))
            f = act(f, M)
            P, Q, R = _quad_act((P, Q, R), M)
        if P > R:
            M = ((0, -1), (1, 0))
            f = act(f, M)
            P, Q, R = _quad_act((P, Q, R), M)
            continue
        break
    else:
        raise IntegrityError("Hessian reduction did not terminate")
    if Q < 0:
        M = ((1, 0), (0, -1))
        f = act(f, M)
        P, Q, R = _quad_act((P, Q, R), M)
    assert hessian_reduced((P, Q, R)), (P, Q, R)
    return _canonical_positive(f)


def negative_in_domain(f) -> bool:
    """Exact test that the complex root of f lies in 0 < Re w < 1/2, |w| > 1.

    With a > 0, g(x) = f(x, 1) has a single real root theta and
    sign(theta - s/t) = -sign(f(s, t)) for t > 0.  The conditions are
    -b/a - 1 < theta < -b/a (from 0 < Re w < 1/2, since Re w = (-b/a - theta)/2)
    and |w|^2 = -d/(a theta) > 1.
    """
    a, b, c, d = f
    if a <= 0 or d == 0:
        return False
    if not f_eval(f, -b - a, a) < 0:
        return False
    if not f_eval(f, -b, a) > 0:
        return False
    v = f_eval(f, -d, a)
    return v > 0 if d < 0 else v < 0


def f_eval(f, x, y):
    a, b, c, d = f
    return a * x**3 + b * x * x * y + c * x * y * y + d * y**3


def _complex_root(f, dps=60):
    with mpmath.workdps(dps):
        a, b, c, d = f
        if a == 0:
            raise DomainError("leading coefficient vanishes")
        roots = mpmath.polyroots([a, b, c, d], maxsteps=200, extraprec=2 * dps)
        cands = [r for r in roots if mpmath.im(r) > 0]
        if len(cands) != 1:
            raise IntegrityError(f"expected one complex root in the upper half plane for {f}")
        return cands[0]


def _reduce_negative(f):
    for _ in range(1000):
        a = f[0]
        if a == 0:
            # move the rational root at infinity away; only reducible forms get here
            raise DomainError("reducible form")
        w = _complex_root(f)
        u = mpmath.re(w)
        k = int(mpmath.floor(u + mpmath.mpf(1) / 2))
        if k:
            f = act(f, ((1, k), (0, 1)))
            w = w - k
        if abs(w) < 1:
            # w -> -1/w
            f = act(f, ((0, 1), (-1, 0)))
            continue
        break
    else:
        raise IntegrityError("negative-discriminant reduction did not terminate")
    w = _complex_root(f)
    if mpmath.re(w) < 0:
        f = act(f, ((-1, 0), (0, 1)))
    f = _normalize_sign(f)
    if not negative_in_domain(f):
        raise IntegrityError(f"reduced form {f} failed the exact domain test")
    return BinaryCubicForm(*f)


def reduce_form(f) -> BinaryCubicForm:
    """Canonical representative of the GL2(Z)-class of an irreducible form."""
    f = tuple(int(t) for t in f)
    D = discriminant(f)
    if D == 0:
        raise DomainError("zero discriminant")
    if not is_irreducible(f):
        raise DomainError("reducible form")
    if D > 0:
        return _reduce_positive(f)
    return _reduce_negative(f)


def is_canonical(f) -> bool:
    """True iff f is the representative produced by reduce_form for its class."""
    f = tuple(int(t) for t in f)
    D = discriminant(f)
    if D > 0:
        H = hessian(f)
        return hessian_reduced(H) and f[0] > 0 and tuple(_canonical_positive(f)) == f
    if D < 0:
        return negative_in_domain(f)
    return False

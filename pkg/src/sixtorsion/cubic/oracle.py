"""Brute-force class enumeration used to validate the production engine.

Every class has a representative with 1 <= a <= (16X/27)^{1/4} (Davenport's
bound on the minimum of a reduced form) and, after a translation
x -> x + ky, with -3a/2 < b <= 3a/2.  The box adds generous bounds on c and d;
callers check that enlarging them changes nothing.  Classes are formed by
explicit pairwise equivalence tests: g ~ f iff f o M = +-g for some M in
GL2(Z), searched over matrices whose columns are small solutions of
f(p, r) = +-g(1, 0) and f(q, s) = +-g(0, 1).
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .forms import act, is_irreducible


def box_forms(X: int, cd_bound: int | None = None) -> list[tuple[int, int, int, int]]:
    """Irreducible forms in the normalized box with 0 < |disc| <= X."""
    A = int((16 * X / 27) ** 0.25) + 1
    while 27 * A**4 > 16 * X:
        A -= 1
    if cd_bound is None:
        cd_bound = 2 * math.isqrt(X) + 10
    cs = np.arange(-cd_bound, cd_bound + 1, dtype=np.int64)
    C, Dd = np.meshgrid(cs, cs, indexing="ij")
    C = C.ravel()
    Dd = Dd.ravel()
    out = []
    for a in range(1, A + 1):
        for b in range(-((3 * a - 1) // 2), 3 * a // 2 + 1):
            disc = b * b * C * C - 4 * a * C**3 - 4 * b**3 * Dd - 27 * a * a * Dd * Dd + 18 * a * b * C * Dd
            ok = (disc != 0) & (np.abs(disc) <= X) & (Dd != 0)
            for c, d in zip(C[ok].tolist(), Dd[ok].tolist()):
                f = (a, b, c, d)
                if is_irreducible(f):
                    out.append(f)
    return out


class _Grid:
    """Values of a form on all primitive-or-not vectors with entries in [-K, K]."""

    def __init__(self, f, K):
        a, b, c, d = f
        v = np.arange(-K, K + 1, dtype=np.int64)
        x, y = np.meshgrid(v, v, indexing="ij")
        self.x = x.ravel()
        self.y = y.ravel()
        self.val = a * self.x**3 + b * self.x**2 * self.y + c * self.x * self.y**2 + d * self.y**3

    def solutions(self, n):
        idx = np.flatnonzero(np.abs(self.val) == abs(n))
        return [(int(self.x[i]), int(self.y[i]), int(self.val[i])) for i in idx]


def equivalent(f, g, K: int = 40, grid: _Grid | None = None) -> bool:
    """Search for M in GL2(Z) with entries in [-K, K] and f o M = +-g."""
    grid = grid or _Grid(f, K)
    ga, gb, gc, gd = g
    first = grid.solutions(ga)
    last = grid.solutions(gd)
    for p, r, v1 in first:
        for q, s, v2 in last:
            if p * s - q * r not in (1, -1):
                continue
            sgn = 1 if v1 == ga else -1
            if v2 != sgn * gd:
                continue
            h = act(f, ((p, q), (r, s)))
            if tuple(h) == (sgn * ga, sgn * gb, sgn * gc, sgn * gd):
                return True
    return False


def oracle_classes(X: int, cd_bound: int | None = None, K: int = 40) -> dict[int, list[tuple]]:
    """Class representatives grouped by discriminant, from the box search."""
    from .forms import discriminant

    by_disc: dict[int, list[tuple]] = defaultdict(list)
    for f in box_forms(X, cd_bound):
        by_disc[discriminant(f)].append(f)
    classes: dict[int, list[tuple]] = {}
    for D, forms in sorted(by_disc.items(), key=lambda kv: (abs(kv[0]), kv[0])):
        forms.sort(key=lambda f: (max(abs(t) for t in f), f))
        reps: list[tuple] = []
        grids: list[_Grid] = []
        for f in forms:
            if any(equivalent(r, f, K, gr) for r, gr in zip(reps, grids)):
                continue
            reps.append(f)
            grids.append(_Grid(f, K))
        classes[D] = reps
    return classes

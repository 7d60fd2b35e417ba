"""Cubic fields from maximal irreducible forms, with their local invariants.

By Delone-Faddeev and Davenport-Heilbronn, cubic fields up to isomorphism
correspond to GL2(Z)-classes of irreducible binary cubic forms that are
maximal at every prime, and the field discriminant is the form's.  For each
field we record:

* beta: the fundamental discriminant of the quadratic resolvent (1 for
  cyclic fields), i.e. the fundamental part of disc;
* q: product of the primes p >= 5 totally ramified in the field.  Ramification
  at such p is tame, so p is totally ramified iff p^2 | disc;
* type2, type3, sig_real: the cubic étale algebra over Q_2, Q_3 and R, as an
  identifier into ``cubic_etale.csv``.  For a maximal form the type is fixed
  by v_p(disc), the square class of disc in Q_p, and (when p is unramified)
  the number of roots of the form in P^1(F_p).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numba as nb
import numpy as np

from .. import etale
from ..arith import build_factor_table
from ..errors import DomainError, IntegrityError
from .engine import enumerate_raw
from .forms import BinaryCubicForm


@dataclass(frozen=True)
class CubicFieldRecord:
    disc: int
    form: BinaryCubicForm
    beta: int
    q: int
    is_galois: bool
    sig_real: str
    type2: str
    type3: str


@nb.njit(cache=True)
def _roots_p1(a, b, c, d, p):
    n = 1 if a % p == 0 else 0
    for x in range(p):
        if (((a * x + b) * x + c) * x + d) % p == 0:
            n += 1
    return n


@nb.njit(cache=True)
def _invariants(rows, spf):
    n = rows.shape[0]
    out = np.empty((n, 8), dtype=np.int64)
    for i in range(n):
        a, b, c, d, D = rows[i, 0], rows[i, 1], rows[i, 2], rows[i, 3], rows[i, 4]
        m = abs(D)
        s = 1
        q = 1
        v2 = 0
        v3 = 0
        while m > 1:
            p = spf[m]
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            if p == 2:
                v2 = e
            elif p == 3:
                v3 = e
            elif e >= 2:
                q *= p
            if e % 2 == 1:
                s *= p
        if D < 0:
            s = -s
        beta = s if s % 4 == 1 else 4 * s
        u2 = D
        for _ in range(v2):
            u2 //= 2
        u3 = D
        for _ in range(v3):
            u3 //= 3
        out[i, 0] = beta
        out[i, 1] = q
        out[i, 2] = v2
        out[i, 3] = u2 % 8
        out[i, 4] = v3
        out[i, 5] = u3 % 3
        out[i, 6] = _roots_p1(a, b, c, d, 2)
        out[i, 7] = _roots_p1(a, b, c, d, 3)
    return out


_UNRAMIFIED = {3: "u111", 1: "u12", 0: "u3"}


def _class_from_key(p: int, parity: int, residue: int) -> str:
    m = 8 if p == 2 else 3
    for qc in etale.quadratic_classes():
        if qc.p == p and qc.valuation_parity == parity and qc.unit_residue % m == residue:
            return qc.class_id
    raise IntegrityError(f"no square class at {p} for key {(parity, residue)}")


def local_type_id(p: int, v: int, residue: int, roots: int) -> str:
    """Cubic étale type at p in {2, 3} of a field with v_p(disc) = v.

    ``residue`` is disc / p^v modulo 8 (p = 2) or 3 (p = 3); ``roots`` is the
    number of distinct roots of a defining maximal form in P^1(F_p).
    """
    cls = _class_from_key(p, v % 2, residue)
    if v == 0:
        tid = _UNRAMIFIED.get(roots)
        if tid is None:
            raise IntegrityError(f"unramified form at {p} with {roots} roots")
    elif p == 2:
        tid = f"tr2:{cls}" if (v == 2 and cls == "5") else f"pr{v}:{cls}"
    else:
        tid = f"pr1:{cls}" if v == 1 else f"tr{v}:{cls}"
    t = etale.cubic_type(p, tid)  # raises if the table has no such type
    if t.resolvent != cls:
        raise IntegrityError(f"type {tid} at {p} has resolvent {t.resolvent}, field has {cls}")
    return tid


@dataclass
class FieldTable:
    """Column store of cubic fields, sorted by (|disc|, a, b, c, d)."""

    disc: np.ndarray
    forms: np.ndarray
    beta: np.ndarray
    q: np.ndarray
    type2: np.ndarray
    type3: np.ndarray
    type2_ids: tuple[str, ...] = field(default_factory=tuple)
    type3_ids: tuple[str, ...] = field(default_factory=tuple)
    # every field with |disc| <= X is present (0 = unknown coverage)
    X: int = 0

    def __len__(self) -> int:
        return int(self.disc.shape[0])

    @property
    def is_galois(self) -> np.ndarray:
        return self.beta == 1

    @property
    def sig_real(self) -> np.ndarray:
        return np.where(self.disc > 0, "R3", "RC")

    def type2_labels(self) -> np.ndarray:
        return np.asarray(self.type2_ids, dtype=object)[self.type2]

    def type3_labels(self) -> np.ndarray:
        return np.asarray(self.type3_ids, dtype=object)[self.type3]

    def subset(self, mask: np.ndarray) -> "FieldTable":
        return FieldTable(self.disc[mask], self.forms[mask], self.beta[mask], self.q[mask],
                          self.type2[mask], self.type3[mask], self.type2_ids, self.type3_ids, self.X)

    def record(self, i: int) -> CubicFieldRecord:
        a, b, c, d = (int(x) for x in self.forms[i])
        D = int(self.disc[i])
        return CubicFieldRecord(
            disc=D,
            form=BinaryCubicForm(a, b, c, d),
            beta=int(self.beta[i]),
            q=int(self.q[i]),
            is_galois=bool(self.beta[i] == 1),
            sig_real="R3" if D > 0 else "RC",
            type2=self.type2_ids[self.type2[i]],
            type3=self.type3_ids[self.type3[i]],
        )

    def records(self) -> Iterator[CubicFieldRecord]:
        for i in range(len(self)):
            yield self.record(i)


def _type_codes(p: int, v: np.ndarray, res: np.ndarray, roots: np.ndarray) -> tuple[np.ndarray, tuple[str, ...]]:
    ids = tuple(t.type_id for t in etale.cubic_types() if t.p == p)
    keys = v * 100 + res * 10 + np.where(v == 0, roots, 0)
    uniq, inv = np.unique(keys, return_inverse=True)
    lookup = np.empty(len(uniq), dtype=np.int8)
    for j, k in enumerate(uniq.tolist()):
        vv, rr, nr = k // 100, (k // 10) % 10, k % 10
        lookup[j] = ids.index(local_type_id(p, vv, rr, nr))
    return lookup[inv.reshape(-1)], ids


def build_field_table(rows: np.ndarray, spf: np.ndarray) -> FieldTable:
    """Attach invariants to engine rows (a, b, c, d, disc, is_maximal) of maximal forms."""
    rows = np.ascontiguousarray(rows[rows[:, 5] == 1][:, :5], dtype=np.int64)
    order = np.lexsort((rows[:, 3], rows[:, 2], rows[:, 1], rows[:, 0], np.abs(rows[:, 4])))
    rows = rows[order]
    inv = _invariants(rows, spf) if len(rows) else np.zeros((0, 8), dtype=np.int64)
    t2, ids2 = _type_codes(2, inv[:, 2], inv[:, 3], inv[:, 6])
    t3, ids3 = _type_codes(3, inv[:, 4], inv[:, 5], inv[:, 7])
    return FieldTable(rows[:, 4].copy(), rows[:, :4].copy(), inv[:, 0].copy(), inv[:, 1].copy(), t2, t3, ids2, ids3)


def merge_tables(tables: list[FieldTable], X: int = 0) -> FieldTable:
    if not tables:
        raise DomainError("nothing to merge")
    ids2, ids3 = tables[0].type2_ids, tables[0].type3_ids
    cat = {k: np.concatenate([getattr(t, k) for t in tables]) for k in ("disc", "forms", "beta", "q", "type2", "type3")}
    f = cat["forms"]
    order = np.lexsort((f[:, 3], f[:, 2], f[:, 1], f[:, 0], np.abs(cat["disc"])))
    return FieldTable(cat["disc"][order], f[order], cat["beta"][order], cat["q"][order], cat["type2"][order],
                      cat["type3"][order], ids2, ids3, X)


@lru_cache(maxsize=4)
def _cached_table(X: int, sign: int) -> FieldTable:
    spf = build_factor_table(max(X, 2)).spf
    parts = []
    for s in ((-1, 1) if sign == 0 else (sign,)):
        parts.append(build_field_table(enumerate_raw(X, s, spf, maximal_only=True), spf))
    return merge_tables(parts, X)


def field_table(X: int, sign: int = 0) -> FieldTable:
    """All cubic fields with 0 < sign*disc <= X (both signs when sign = 0)."""
    if X < 1:
        raise DomainError("X must be positive")
    if sign not in (-1, 0, 1):
        raise DomainError("sign must be -1, 0 or 1")
    return _cached_table(int(X), sign)


@dataclass(frozen=True)
class FieldFilter:
    """Local filters on cubic fields.

    Attributes:
        sign: +1, -1, or 0 for both.
        fundamental_only: keep fields whose discriminant is fundamental.
        not_totally_ramified_outside: m; keep fields not totally ramified at
            any prime p not dividing m (with m = 1 this is the same as
            fundamental_only).
        totally_ramified_at: primes at which the field must be totally ramified.
        divisible_by: d; keep fields with d | disc.
        type2, type3, sig_real: allowed local type identifiers (None = any).
    """

    sign: int = 0
    fundamental_only: bool = False
    not_totally_ramified_outside: int | None = None
    totally_ramified_at: tuple[int, ...] = ()
    divisible_by: int = 1
    type2: frozenset[str] | None = None
    type3: frozenset[str] | None = None
    sig_real: frozenset[str] | None = None

    def mask(self, t: FieldTable) -> np.ndarray:
        m = np.ones(len(t), dtype=bool)
        if self.sign:
            m &= np.sign(t.disc) == self.sign
        if self.divisible_by != 1:
            m &= t.disc % self.divisible_by == 0
        tot2 = np.array([s.startswith("tr") for s in t.type2_ids], dtype=bool)[t.type2]
        tot3 = np.array([s.startswith("tr") for s in t.type3_ids], dtype=bool)[t.type3]
        if self.fundamental_only:
            m &= (t.q == 1) & ~tot2 & ~tot3
        if self.not_totally_ramified_outside is not None:
            mod = int(self.not_totally_ramified_outside)
            m &= mod % t.q == 0
            if mod % 2:
                m &= ~tot2
            if mod % 3:
                m &= ~tot3
        for p in self.totally_ramified_at:
            if p == 2:
                m &= tot2
            elif p == 3:
                m &= tot3
            else:
                m &= t.q % p == 0
        if self.type2 is not None:
            m &= np.isin(t.type2, [t.type2_ids.index(s) for s in self.type2 if s in t.type2_ids])
        if self.type3 is not None:
            m &= np.isin(t.type3, [t.type3_ids.index(s) for s in self.type3 if s in t.type3_ids])
        if self.sig_real is not None:
            m &= np.isin(t.sig_real, list(self.sig_real))
        return m


def enumerate_cubic_fields(X: int, constraints: FieldFilter | None = None) -> list[CubicFieldRecord]:
    """Cubic fields with |disc| <= X passing the filters, sorted by (|disc|, a, b, c, d)."""
    t = field_table(X)
    if constraints is not None:
        t = t.subset(constraints.mask(t))
    return list(t.records())


def enumerate_classes(X: int) -> Iterator[BinaryCubicForm]:
    """One canonical form per GL2(Z)-class of irreducible forms with 0 < |disc| <= X.

    Ordered by |disc|, then (a, b, c, d) of the canonical representative.
    """
    if X < 1:
        raise DomainError("X must be positive")
    spf = build_factor_table(max(X, 2)).spf
    rows = np.concatenate([enumerate_raw(X, -1, spf), enumerate_raw(X, 1, spf)])
    order = np.lexsort((rows[:, 3], rows[:, 2], rows[:, 1], rows[:, 0], np.abs(rows[:, 4])))
    for r in rows[order]:
        yield BinaryCubicForm(int(r[0]), int(r[1]), int(r[2]), int(r[3]))

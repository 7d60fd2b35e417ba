"""Galois D6 = C2 x S3 fields of bounded discriminant.

A D6 field K is the compositum of Q(sqrt alpha) with the Galois closure of a
non-Galois cubic field F (quadratic resolvent Q(sqrt beta)), with alpha
squarefree, alpha != 1 and alpha != beta up to squares.  K has three
quadratic subfields, alpha, beta and alpha*beta, so each K arises from
exactly two pairs (alpha, F): alpha and the squarefree part of alpha*beta.
In terms of surjections G_Q -> D6 (6 per pair through the cubic field, 12
per field through Aut(D6)), #fields = 6 #pairs / 12.

The discriminant of K is

    Delta(Sigma) lcm(alpha', beta')^6 q^8 / gcd(alpha', q)^4,

where alpha', beta' are the parts prime to 6, q is the product of primes
p >= 5 totally ramified in F, and Delta(Sigma) = 2^e2 3^e3 collects the
exponents at 2 and 3 fixed by the local data of alpha and F.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import constants, etale
from .arith import coprime_part_6, is_squarefree, squarefree_part
from .cubic.cache import get_field_table
from .cubic.fields import FieldTable
from .errors import DomainError, IntegrityError, RangeError

log = logging.getLogger(__name__)

INT128_MAX = 2**127 - 1


@dataclass(frozen=True)
class CubicData:
    """What the D6 count needs from a cubic field."""

    disc: int
    beta: int
    q: int
    type2: str
    type3: str

    @property
    def sig_real(self) -> str:
        return "R3" if self.disc > 0 else "RC"

    @property
    def beta_sqf(self) -> int:
        return squarefree_part(self.beta)


@dataclass(frozen=True)
class D6Record:
    alpha: int
    field: CubicData
    sigma: etale.LocalSpecSigma
    abs_disc: int

    @property
    def beta(self) -> int:
        return self.field.beta

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def quadratic_subfields(self) -> tuple[int, int, int]:
        b = self.field.beta_sqf
        return self.alpha, b, squarefree_part(self.alpha * b)


# ---------------------------------------------------------------------------
# Local data of alpha
# ---------------------------------------------------------------------------


def sigma_of(alpha: int, f: CubicData) -> etale.LocalSpecSigma:
    return etale.LocalSpecSigma(
        etale.square_class("inf", alpha), etale.square_class(2, alpha), etale.square_class(3, alpha),
        f.sig_real, f.type2, f.type3,
    )


def alpha_from_sigma(alpha_prime: int, quad_inf: str, quad2: str, quad3: str) -> int | None:
    """The squarefree alpha with part alpha' prime to 6 and the given square classes.

    Returns None (and logs) when no integer alpha has these local classes.
    """
    if alpha_prime < 1 or math.gcd(alpha_prime, 6) != 1 or not is_squarefree(alpha_prime):
        raise DomainError(f"alpha' = {alpha_prime} must be squarefree and prime to 6")
    s = 1 if quad_inf == "+" else -1
    a = _quad_parity(2, quad2)
    b = _quad_parity(3, quad3)
    alpha = s * 2**a * 3**b * alpha_prime
    if etale.square_class(2, alpha) != quad2 or etale.square_class(3, alpha) != quad3:
        log.warning("local classes (%s, %s, %s) do not fit alpha' = %d; skipped", quad_inf, quad2, quad3,
                    alpha_prime)
        return None
    return alpha


def _quad_parity(p: int, class_id: str) -> int:
    for q in etale.quadratic_classes():
        if q.p == p and q.class_id == class_id:
            return q.valuation_parity
    raise DomainError(f"no quadratic class {class_id!r} at {p}")


def alpha_prime_classes(quad_inf: str, quad2: str, quad3: str) -> list[int]:
    """Residues of alpha' mod 144 compatible with the given local classes."""
    return [r for r in range(144) if math.gcd(r, 6) == 1 and _fits(r, quad_inf, quad2, quad3)]


def _fits(r: int, quad_inf: str, quad2: str, quad3: str) -> bool:
    s = 1 if quad_inf == "+" else -1
    alpha = s * 2 ** _quad_parity(2, quad2) * 3 ** _quad_parity(3, quad3) * r
    return etale.square_class(2, alpha) == quad2 and etale.square_class(3, alpha) == quad3


@lru_cache(maxsize=None)
def delta_sigma(quad2: str, quad3: str, type2: str, type3: str) -> int:
    return 2 ** etale.d6_exponent(2, quad2, type2) * 3 ** etale.d6_exponent(3, quad3, type3)


# ---------------------------------------------------------------------------
# Discriminant
# ---------------------------------------------------------------------------


def d6_disc(alpha: int, f: CubicData, sigma: etale.LocalSpecSigma | None = None) -> int:
    """|Disc| of the D6 field attached to (alpha, F)."""
    if alpha in (0, 1) or not is_squarefree(abs(alpha)):
        raise DomainError(f"alpha = {alpha} must be squarefree and != 1")
    s = sigma_of(alpha, f)
    if sigma is not None and sigma != s:
        raise DomainError(f"alpha = {alpha} and the field do not satisfy {sigma.sigma_id}")
    return disc_from_parts(delta_sigma(s.quad2, s.quad3, s.cubic2, s.cubic3), coprime_part_6(abs(alpha)),
                           coprime_part_6(abs(f.beta)), f.q)


def disc_from_parts(delta: int, alpha_p: int, beta_p: int, q: int) -> int:
    """Delta lcm(alpha', beta')^6 q^8 / gcd(alpha', q)^4."""
    v = _disc_unchecked(delta, alpha_p, beta_p, q)
    if v > INT128_MAX:
        raise RangeError("D6 discriminant exceeds 128 bits")
    return v


def _disc_unchecked(delta: int, alpha_p: int, beta_p: int, q: int) -> int:
    return delta * math.lcm(alpha_p, beta_p) ** 6 * q**8 // math.gcd(alpha_p, q) ** 4


def tame_exponent_by_characters(in_alpha: bool, in_beta: bool, in_q: bool) -> int:
    """v_p(Disc K) at a prime p >= 5 by the conductor-discriminant formula.

    The regular representation of D6 is 1 + chi_a + chi_b + chi_ab + 2 rho +
    2 (rho x chi_a), with rho the 2-dimensional representation attached to F.
    At tame p, a quadratic character has conductor 1 iff p divides it; rho
    has conductor v_p(Disc F) (0, 1 or 2); rho x chi_a has conductor 2 when
    chi_a is ramified and F is unramified or totally ramified (the twist of
    the tame characters stays ramified), and when F is partially ramified rho
    is locally 1 + chi_b, so the twist has conductor a(chi_a) + a(chi_ab).
    """
    if in_beta and in_q:
        raise DomainError("a prime totally ramified in F does not divide beta")
    a_a = int(in_alpha)
    a_b = int(in_beta)
    a_ab = int(in_alpha != in_beta)
    vE = 2 if in_q else (1 if in_beta else 0)
    if in_beta:
        a_twist = a_a + a_ab
    elif in_alpha:
        a_twist = 2
    else:
        a_twist = vE
    return a_a + a_b + a_ab + 2 * vE + 2 * a_twist


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _min_delta_for_types(type2: str, type3: str) -> int:
    q2 = [q.class_id for q in etale.quadratic_classes() if q.p == 2]
    q3 = [q.class_id for q in etale.quadratic_classes() if q.p == 3]
    return min(delta_sigma(a, b, type2, type3) for a in q2 for b in q3)


def required_cubic_bound(X: int) -> int:
    """|disc F| bound so that every field that can occur below X is present.

    disc >= Delta beta'^6 q^8, so beta' q^2 <= (X / Delta)^(1/4), and
    |disc F| = 2^v2 3^v3 beta' q^2.
    """
    best = 1
    for t2 in (t for t in etale.cubic_types() if t.p == 2):
        for t3 in (t for t in etale.cubic_types() if t.p == 3):
            Y = X // _min_delta_for_types(t2.type_id, t3.type_id)
            if Y < 1:
                continue
            r = _iroot(Y, 4)
            best = max(best, 2**t2.disc_exponent * 3**t3.disc_exponent * r)
    return best


def _iroot(n: int, k: int) -> int:
    """floor(n^(1/k))."""
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def candidate_fields(X: int, fields: FieldTable) -> list[CubicData]:
    """Non-Galois cubic fields with Delta_min beta'^6 q^8 <= X."""
    need = required_cubic_bound(X)
    if fields.X and fields.X < need:
        raise RangeError(f"cubic-field data covers |disc| <= {fields.X}; D6 counts to {X} need {need}")
    mind = {(a, b): _min_delta_for_types(a, b) for a in fields.type2_ids for b in fields.type3_ids}
    beta_p = np.array([coprime_part_6(abs(int(b))) for b in fields.beta], dtype=np.int64) if len(fields) else \
        np.zeros(0, dtype=np.int64)
    bound6 = _iroot(X, 6)
    pre = (fields.beta != 1) & (np.abs(fields.disc) <= need) & (beta_p <= bound6)
    out = []
    for i in np.flatnonzero(pre).tolist():
        t2 = fields.type2_ids[fields.type2[i]]
        t3 = fields.type3_ids[fields.type3[i]]
        q = int(fields.q[i])
        if mind[(t2, t3)] * int(beta_p[i]) ** 6 * q**8 <= X:
            out.append(CubicData(int(fields.disc[i]), int(fields.beta[i]), q, t2, t3))
    return out


def alpha_candidates(bound: int) -> list[int]:
    """Squarefree alpha != 1 with alpha' <= bound, ordered by (alpha', sign, 2-3 part)."""
    out = []
    for ap in range(1, bound + 1):
        if math.gcd(ap, 6) != 1 or not is_squarefree(ap):
            continue
        for m in (1, 2, 3, 6):
            for s in (1, -1):
                a = s * m * ap
                if a != 1:
                    out.append(a)
    return out


def enumerate_d6(X: int, fields: FieldTable | None = None, unramified_23_only: bool = False) -> list[D6Record]:
    """All admissible pairs (alpha, F) with |Disc K| <= X, cubic fields outermost."""
    fields = get_field_table(required_cubic_bound(X)) if fields is None else fields
    out = []
    for f in candidate_fields(X, fields):
        bsq = f.beta_sqf
        bp = coprime_part_6(abs(f.beta))
        # Delta >= 1 and q^8 / gcd^4 >= q^4 give alpha'^6 q^4 <= X
        amax = _iroot(X // f.q**4, 6) if X >= f.q**4 else 0
        for alpha in alpha_candidates(amax):
            if alpha == bsq:
                continue
            s = sigma_of(alpha, f)
            dl = delta_sigma(s.quad2, s.quad3, s.cubic2, s.cubic3)
            if unramified_23_only and dl != 1:
                continue
            # candidates far above X may pass 128 bits; only those <= X are kept
            v = _disc_unchecked(dl, coprime_part_6(abs(alpha)), bp, f.q)
            if v <= X:
                out.append(D6Record(alpha, f, s, v))
    _check_partners(out)
    return out


def _check_partners(records: list[D6Record]) -> None:
    """Both pairs of every field must be present with the same discriminant."""
    index = {(r.alpha, r.field): r.abs_disc for r in records}
    for r in records:
        partner = squarefree_part(r.alpha * r.field.beta_sqf)
        v = index.get((partner, r.field))
        if v is None:
            raise IntegrityError(f"pair ({r.alpha}, {r.field}) has no partner {partner} below X")
        if v != r.abs_disc:
            raise IntegrityError(f"pairs {r.alpha} and {partner} of {r.field} disagree on the discriminant")


def count_pairs_alpha_outer(X: int, fields: FieldTable) -> int:
    """Number of admissible pairs, with alpha outermost and fields scanned in bulk."""
    need = required_cubic_bound(X)
    if fields.X and fields.X < need:
        raise RangeError(f"cubic-field data covers |disc| <= {fields.X}, need {need}")
    m = (fields.beta != 1) & (np.abs(fields.disc) <= need)
    disc = fields.disc[m]
    beta = fields.beta[m]
    q = fields.q[m].astype(np.int64)
    bp = np.array([coprime_part_6(abs(int(b))) for b in beta], dtype=np.int64)
    bsq = np.array([squarefree_part(int(b)) for b in beta], dtype=np.int64)
    t2 = np.asarray(fields.type2[m], dtype=np.int64)
    t3 = np.asarray(fields.type3[m], dtype=np.int64)
    total = 0
    for alpha in alpha_candidates(_iroot(X, 6)):
        ap = coprime_part_6(abs(alpha))
        c2 = etale.square_class(2, alpha)
        c3 = etale.square_class(3, alpha)
        e2 = np.array([etale.d6_exponent(2, c2, t) for t in fields.type2_ids], dtype=np.float64)
        e3 = np.array([etale.d6_exponent(3, c3, t) for t in fields.type3_ids], dtype=np.float64)
        g = np.gcd(ap, q)
        l = ap * bp // np.gcd(ap, bp)
        # log-scale screen, exact arithmetic near the boundary
        logv = (e2[t2] * math.log(2) + e3[t3] * math.log(3) + 6 * np.log(l.astype(np.float64))
                + 8 * np.log(q.astype(np.float64)) - 4 * np.log(g.astype(np.float64)))
        logX = math.log(X)
        ok = (logv < logX - 1e-9) & (bsq != alpha)
        near = np.flatnonzero((np.abs(logv - logX) <= 1e-9) & (bsq != alpha))
        total += int(np.count_nonzero(ok))
        for i in near.tolist():
            v = 2 ** int(e2[t2[i]]) * 3 ** int(e3[t3[i]]) * int(l[i]) ** 6 * int(q[i]) ** 8 // int(g[i]) ** 4
            total += v <= X
    return total


@dataclass
class D6Count:
    X: int
    count: int
    pairs: int
    by_sigma: dict[str, int] = field(default_factory=dict)


def count_d6(X: int, fields: FieldTable | None = None, unramified_23_only: bool = False) -> D6Count:
    """#{Galois D6 fields with |Disc| <= X}.

    by_sigma holds the number of surjections G_Q -> D6 per local
    specification (6 per pair); their sum over 12 is the count.
    """
    recs = enumerate_d6(X, fields, unramified_23_only)
    by: dict[str, int] = {}
    for r in recs:
        by[r.sigma.sigma_id] = by.get(r.sigma.sigma_id, 0) + 6
    epi = sum(by.values())
    if epi % 12:
        raise IntegrityError(f"surjection count {epi} is not divisible by 12")
    return D6Count(X, epi // 12, len(recs), dict(sorted(by.items())))


def m_beta(beta: int, q: int, sigma: etale.LocalSpecSigma, fields: FieldTable) -> int:
    """6 #{cubic fields with resolvent beta, totally ramified product q, local types of sigma}."""
    if q < 1 or math.gcd(q, 6) != 1 or not is_squarefree(q):
        raise DomainError("q must be squarefree and prime to 6")
    if beta == 1 or not is_squarefree(abs(squarefree_part(beta))):
        raise DomainError("beta must be a squarefree integer != 1")
    if math.gcd(q, abs(beta)) > 1:
        return 0
    need = 2**3 * 3**5 * coprime_part_6(abs(beta)) * q * q
    if fields.X and fields.X < need:
        raise RangeError(f"cubic-field data covers |disc| <= {fields.X}, need {need}")
    b = squarefree_part(beta)
    m = (fields.q == q) & (np.abs(fields.disc) <= need)
    n = 0
    for i in np.flatnonzero(m).tolist():
        if squarefree_part(int(fields.beta[i])) != b:
            continue
        if ("R3" if fields.disc[i] > 0 else "RC") != sigma.cubic_inf:
            continue
        if fields.type2_ids[fields.type2[i]] != sigma.cubic2 or fields.type3_ids[fields.type3[i]] != sigma.cubic3:
            continue
        n += 1
    return 6 * n


def count_with_quadratic_subfield(X: int, d: int, fields: FieldTable | None = None,
                                  records: list[D6Record] | None = None) -> int:
    """#{D6 fields with |Disc| <= X containing Q(sqrt d)}."""
    if d == 1 or d == 0 or not is_squarefree(abs(d)):
        raise DomainError("d must be squarefree and != 1")
    recs = enumerate_d6(X, fields) if records is None else [r for r in records if r.abs_disc <= X]
    hits = sum(1 for r in recs if d in r.quadratic_subfields)
    if hits % 2:
        raise IntegrityError("pairs containing Q(sqrt d) do not come in twos")
    return hits // 2


def field_rows(records: list[D6Record]) -> list[tuple[int, int, int, int, str]]:
    """One row per field (the pair with the smaller |alpha|), sorted."""
    rows = []
    for r in records:
        partner = squarefree_part(r.alpha * r.field.beta_sqf)
        if (abs(r.alpha), r.alpha) < (abs(partner), partner):
            rows.append((r.abs_disc, r.alpha, r.field.beta, r.field.q, r.sigma.sigma_id, r.field.disc))
    rows.sort()
    return [row[:5] for row in rows]


def write_d6_fields(path, records: list[D6Record]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("abs_disc,alpha,beta,q,sigma_id\n")
        for v, a, b, q, s in field_rows(records):
            fh.write(f'{v},{a},{b},{q},"{s}"\n')


@dataclass(frozen=True)
class MalleRow:
    X: int
    count: int
    predicted: float
    ratio: float


def malle_compare(X_grid, fields: FieldTable | None = None) -> list[MalleRow]:
    """count / (C X^(1/6) (log X)^2) along a grid, C the closed-form Malle constant."""
    grid = sorted(int(x) for x in X_grid)
    if fields is None:
        fields = get_field_table(required_cubic_bound(grid[-1]))
    recs = enumerate_d6(grid[-1], fields)
    C = constants.closed_form_constant().value
    out = []
    for X in grid:
        pairs = sum(1 for r in recs if r.abs_disc <= X)
        cnt = pairs // 2
        pred = C * X ** (1 / 6) * math.log(X) ** 2
        out.append(MalleRow(X, cnt, pred, cnt / pred))
    return out

"""Local étale algebra tables at 2, 3 and infinity, and discriminant exponents.

Three bundled CSV files drive everything local:

* ``quadratic_etale.csv``: square classes of Q_p^* (p = 2, 3) and R^*, with
  the conductor exponent of the matching quadratic character.
* ``cubic_etale.csv``: cubic étale algebras up to isomorphism, grouped into
  types that share (disc exponent, resolvent square class, kind).  A type of
  multiplicity 3 stands for three non-isomorphic algebras with identical data.
* ``local_etale.csv``: Galois extensions of Q_2 and Q_3 whose group is a
  subgroup of D6 (27 and 33 rows), as consumed by the field sums of the
  Malle constant.

Discriminant exponents of D6 = C2 x S3 algebras come from the
conductor-discriminant formula: the regular representation of D6 splits as
1 + chi_Q + chi_K + chi_QK + 2 rho + 2 (rho x chi_Q), where chi_K is the
resolvent character of the cubic algebra and rho its 2-dimensional
representation, so

    v(Delta) = a(chi_Q) + a(chi_K) + a(chi_QK) + 2 v(E) + 2 a(rho x chi_Q).
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import product
from pathlib import Path

from .errors import DataError, DomainError, IntegrityError

PLACES = ("inf", 2, 3)
CUBIC_KINDS = ("111", "12", "C3", "S3")
GALOIS_GROUPS = ("1", "C2", "C3", "C2xC2", "C6", "S3", "D6")
GROUP_ORDER = {"1": 1, "C2": 2, "C3": 3, "C2xC2": 4, "C6": 6, "S3": 6, "D6": 12}
GROUP_AUT = {"1": 1, "C2": 1, "C3": 2, "C2xC2": 6, "C6": 2, "S3": 6, "D6": 12}
# number of subgroups of D6 in each isomorphism class
SUBGROUP_COUNT = {"1": 1, "C2": 7, "C3": 1, "C2xC2": 3, "C6": 1, "S3": 2, "D6": 1}


@dataclass(frozen=True)
class QuadraticClass:
    p: object
    class_id: str
    valuation_parity: int
    unit_residue: int
    conductor_exponent: int


@dataclass(frozen=True)
class CubicType:
    p: object
    type_id: str
    kind: str
    disc_exponent: int
    aut_count: int
    multiplicity: int
    resolvent: str


@dataclass(frozen=True)
class LocalEtaleRecord:
    """One Galois extension of Q_p with group a subgroup of D6."""

    p: object
    galois_group: str
    disc_exponent: int
    aut_count: int
    provenance_label: str = ""


def _parse_place(s: str):
    s = s.strip()
    if s == "inf":
        return "inf"
    try:
        p = int(s)
    except ValueError as exc:
        raise DataError(f"bad place {s!r}") from exc
    if p < 2:
        raise DataError(f"bad place {s!r}")
    return p


def _read_rows(path: Path | None, default: str, header: list[str]) -> list[dict[str, str]]:
    if path is None:
        text = resources.files("sixtorsion.data").joinpath(default).read_text()
    else:
        text = Path(path).read_text()
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames != header:
        raise DataError(f"{default}: expected header {','.join(header)}, got {reader.fieldnames}")
    rows = list(reader)
    for i, r in enumerate(rows):
        if None in r or any(v is None or v.strip() == "" for k, v in r.items() if k != "provenance_label"):
            raise DataError(f"{default}: malformed row {i + 2}")
    return rows


def _int(s: str, what: str) -> int:
    try:
        return int(s)
    except ValueError as exc:
        raise DataError(f"non-integer {what}: {s!r}") from exc


@lru_cache(maxsize=None)
def quadratic_classes(path: Path | None = None) -> tuple[QuadraticClass, ...]:
    rows = _read_rows(path, "quadratic_etale.csv",
                      ["p", "class_id", "valuation_parity", "unit_residue", "conductor_exponent"])
    out = tuple(
        QuadraticClass(_parse_place(r["p"]), r["class_id"], _int(r["valuation_parity"], "parity"),
                       _int(r["unit_residue"], "residue"), _int(r["conductor_exponent"], "conductor"))
        for r in rows
    )
    for p, n in ((2, 8), (3, 4), ("inf", 2)):
        if sum(1 for q in out if q.p == p) != n:
            raise DataError(f"quadratic table must have {n} classes at {p}")
    return out


@lru_cache(maxsize=None)
def cubic_types(path: Path | None = None) -> tuple[CubicType, ...]:
    rows = _read_rows(path, "cubic_etale.csv",
                      ["p", "type_id", "kind", "disc_exponent", "aut_count", "multiplicity", "resolvent"])
    out = []
    for r in rows:
        if r["kind"] not in CUBIC_KINDS:
            raise DataError(f"unknown cubic kind {r['kind']!r}")
        out.append(CubicType(_parse_place(r["p"]), r["type_id"], r["kind"], _int(r["disc_exponent"], "exponent"),
                             _int(r["aut_count"], "aut"), _int(r["multiplicity"], "multiplicity"), r["resolvent"]))
    ids = Counter((t.p, t.type_id) for t in out)
    dup = [k for k, n in ids.items() if n > 1]
    if dup:
        raise DataError(f"duplicate cubic types {dup}")
    known = {(q.p, q.class_id) for q in quadratic_classes()}
    for t in out:
        if (t.p, t.resolvent) not in known:
            raise DataError(f"cubic type {t.type_id} at {t.p} has unknown resolvent {t.resolvent}")
        expected_aut = {"111": 6, "12": 2, "C3": 3, "S3": 1}[t.kind]
        if t.aut_count != expected_aut:
            raise DataError(f"cubic type {t.type_id} at {t.p}: aut {t.aut_count} inconsistent with kind {t.kind}")
    return tuple(out)


@lru_cache(maxsize=None)
def local_etale_table(path: Path | None = None) -> tuple[LocalEtaleRecord, ...]:
    """Strict parse of ``local_etale.csv``; unknown group labels are rejected."""
    rows = _read_rows(path, "local_etale.csv", ["p", "galois_group", "disc_exponent", "aut_count", "provenance_label"])
    out = []
    for i, r in enumerate(rows):
        g = r["galois_group"]
        if g not in GALOIS_GROUPS:
            raise DataError(f"local_etale.csv row {i + 2}: unknown group label {g!r}")
        rec = LocalEtaleRecord(_parse_place(r["p"]), g, _int(r["disc_exponent"], "exponent"),
                               _int(r["aut_count"], "aut"), r["provenance_label"])
        if rec.disc_exponent < 0:
            raise DataError(f"local_etale.csv row {i + 2}: negative exponent")
        if rec.aut_count != GROUP_AUT[g]:
            raise IntegrityError(f"local_etale.csv row {i + 2}: aut_count {rec.aut_count} is not |Aut({g})| = {GROUP_AUT[g]}")
        out.append(rec)
    return tuple(out)


# ---------------------------------------------------------------------------
# Square classes and conductors
# ---------------------------------------------------------------------------


def _quad(p, class_id) -> QuadraticClass:
    for q in quadratic_classes():
        if q.p == p and q.class_id == class_id:
            return q
    raise DomainError(f"no quadratic class {class_id!r} at {p}")


def square_class(p, n: int) -> str:
    """Class of the nonzero integer n in Q_p^*/Q_p^*2 (p = 2, 3) or R^*/R^*2."""
    n = int(n)
    if n == 0:
        raise DomainError("0 has no square class")
    if p == "inf":
        return "+" if n > 0 else "-"
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    m = 8 if p == 2 else 3
    key = (v % 2, n % m)
    for q in quadratic_classes():
        if q.p == p and (q.valuation_parity, q.unit_residue % m) == key:
            return q.class_id
    raise IntegrityError(f"square class of {n} at {p} missing from table")


def class_product(p, c1: str, c2: str) -> str:
    if p == "inf":
        return "+" if (c1 == "+") == (c2 == "+") else "-"
    a, b = _quad(p, c1), _quad(p, c2)
    m = 8 if p == 2 else 3
    key = ((a.valuation_parity + b.valuation_parity) % 2, (a.unit_residue * b.unit_residue) % m)
    for q in quadratic_classes():
        if q.p == p and (q.valuation_parity, q.unit_residue % m) == key:
            return q.class_id
    raise IntegrityError("class product fell outside the table")


def conductor_exponent(p, class_id: str) -> int:
    if p == "inf":
        return 0
    return _quad(p, class_id).conductor_exponent


def cubic_type(p, type_id: str) -> CubicType:
    for t in cubic_types():
        if t.p == p and t.type_id == type_id:
            return t
    raise DomainError(f"no cubic type {type_id!r} at {p}")


def cubic_mass(p) -> Fraction:
    """m_p = sum over cubic étale algebras of 1 / (|Disc|_p^{-1} |Aut|)."""
    base = 1 if p == "inf" else p
    return sum((Fraction(t.multiplicity, t.aut_count * base**t.disc_exponent) for t in cubic_types() if t.p == p),
               Fraction(0))


def cubic_weight(p, type_id: str) -> Fraction:
    """w_p = 1 / (|Aut(E)| m_p) for one algebra of the given type."""
    return 1 / (cubic_type(p, type_id).aut_count * cubic_mass(p))


def twisted_rho_conductor(p, quad_id: str, t: CubicType) -> int:
    """Conductor exponent of rho x chi_Q for the cubic algebra type t."""
    if p == "inf":
        return 0
    K = t.resolvent
    vQ = conductor_exponent(p, quad_id)
    vK = conductor_exponent(p, K)
    vQK = conductor_exponent(p, class_product(p, quad_id, K))
    if t.kind == "111":
        return 2 * vQ
    if t.kind == "12":
        # rho = 1 + chi_K
        return vQ + vQK
    if t.kind == "C3":
        # rho = psi + psi^{-1} with a(psi) = v(E)/2
        a_psi = t.disc_exponent // 2
        return 2 * (max(a_psi, vQ) if a_psi != vQ else a_psi)
    # S3: rho = Ind_K psi, a(rho) = v_K + f_K a_K(psi)
    if quad_id == "1" or quad_id == K:
        return t.disc_exponent
    f_K = 2 if vK == 0 else 1
    a_psi = (t.disc_exponent - vK) // f_K
    if vK == 0:
        a_chi = vQ
    elif p != 2:
        a_chi = min(vQ, vQK)
    else:
        raise IntegrityError("ramified resolvent with an S3 algebra at 2 is outside the table")
    if a_psi != a_chi:
        m = max(a_psi, a_chi)
    elif a_psi <= 1:
        m = a_psi
    else:
        raise IntegrityError(f"conductor of rho x chi undetermined for {t.type_id} at {p} with {quad_id}")
    return vK + f_K * m


def d6_exponent(p, quad_id: str, type_id: str) -> int:
    """v_p of the discriminant of the D6 algebra attached to (Q, E) at p."""
    if p == "inf":
        return 0
    t = cubic_type(p, type_id)
    K = t.resolvent
    vQ = conductor_exponent(p, quad_id)
    vK = conductor_exponent(p, K)
    vQK = conductor_exponent(p, class_product(p, quad_id, K))
    return vQ + vK + vQK + 2 * t.disc_exponent + 2 * twisted_rho_conductor(p, quad_id, t)


# ---------------------------------------------------------------------------
# Galois inventory generated from the quadratic and cubic tables
# ---------------------------------------------------------------------------


def galois_inventory(p: int) -> list[LocalEtaleRecord]:
    """Galois extensions of Q_p (p = 2, 3) with group inside D6, by conductors.

    Each field is the compositum of a quadratic field and (the Galois closure
    of) a cubic algebra; its discriminant exponent is the sum of the conductor
    exponents of the characters of its group.
    """
    if p not in (2, 3):
        raise DomainError("wild inventory only at 2 and 3")
    quads = [q.class_id for q in quadratic_classes() if q.p == p and q.class_id != "1"]
    cubics = [t for t in cubic_types() if t.p == p]
    out: list[LocalEtaleRecord] = [LocalEtaleRecord(p, "1", 0, 1, "trivial")]
    a = {q: conductor_exponent(p, q) for q in quads}
    for q in quads:
        out.append(LocalEtaleRecord(p, "C2", a[q], 1, f"quad:{q}"))
    c3 = [t for t in cubics if t.kind == "C3"]
    for t in c3:
        for i in range(t.multiplicity):
            out.append(LocalEtaleRecord(p, "C3", t.disc_exponent, 2, _tag(f"cubic:{t.type_id}", i, t.multiplicity)))
    # biquadratic fields: planes {Q1, Q2, Q1Q2}
    seen = set()
    for q1 in quads:
        for q2 in quads:
            q3 = class_product(p, q1, q2)
            key = frozenset((q1, q2, q3))
            if q1 == q2 or key in seen:
                continue
            seen.add(key)
            v = a[q1] + a[q2] + a[q3]
            o = sorted(key, key=quads.index)
            out.append(LocalEtaleRecord(p, "C2xC2", v, 6, f"biquad:{o[0]}*{o[1]}"))
    # C6 = C2 x C3: chi_Q + 2 psi + 2 chi_Q psi
    for q in quads:
        for t in c3:
            a_psi = t.disc_exponent // 2
            a_mix = max(a[q], a_psi) if a[q] != a_psi else a_psi
            v = a[q] + 2 * a_psi + 2 * a_mix
            for i in range(t.multiplicity):
                out.append(LocalEtaleRecord(p, "C6", v, 2, _tag(f"quad:{q}*cubic:{t.type_id}", i, t.multiplicity)))
    # S3 closures and their D6 twists
    for t in cubics:
        if t.kind != "S3":
            continue
        vK = conductor_exponent(p, t.resolvent)
        for i in range(t.multiplicity):
            out.append(LocalEtaleRecord(p, "S3", vK + 2 * t.disc_exponent, 6,
                                        _tag(f"closure:{t.type_id}", i, t.multiplicity)))
        done = set()
        for q in quads:
            if q == t.resolvent or q in done:
                continue
            done.update({q, class_product(p, q, t.resolvent)})
            v = d6_exponent(p, q, t.type_id)
            for i in range(t.multiplicity):
                out.append(LocalEtaleRecord(p, "D6", v, 12, _tag(f"closure:{t.type_id}*quad:{q}", i, t.multiplicity)))
    return out


def _tag(base: str, i: int, mult: int) -> str:
    return base if mult == 1 else f"{base}#{i + 1}"


# ---------------------------------------------------------------------------
# Local specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalSpecSigma:
    """Quadratic and cubic étale choices at infinity, 2 and 3."""

    quad_inf: str
    quad2: str
    quad3: str
    cubic_inf: str
    cubic2: str
    cubic3: str

    @property
    def sigma_id(self) -> str:
        return f"{self.quad_inf},{self.quad2},{self.quad3}|{self.cubic_inf},{self.cubic2},{self.cubic3}"

    @property
    def exponents(self) -> tuple[int, int]:
        return d6_exponent(2, self.quad2, self.cubic2), d6_exponent(3, self.quad3, self.cubic3)

    @property
    def delta_sigma(self) -> int:
        e2, e3 = self.exponents
        return 2**e2 * 3**e3


def all_sigmas() -> list[LocalSpecSigma]:
    quad = {p: [q.class_id for q in quadratic_classes() if q.p == p] for p in PLACES}
    cub = {p: [t.type_id for t in cubic_types() if t.p == p] for p in PLACES}
    return [LocalSpecSigma(*x) for x in product(quad["inf"], quad[2], quad[3], cub["inf"], cub[2], cub[3])]

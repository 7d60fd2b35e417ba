import math
from fractions import Fraction

import numpy as np
import pytest

from sixtorsion import bqf, torsion
from sixtorsion.arith import fundamental_discriminants, is_fundamental_discriminant
from sixtorsion.cubic.fields import FieldFilter
from sixtorsion.errors import DomainError, RangeError


def log3(n):
    k = 0
    while n % 3 == 0:
        n //= 3
        k += 1
    assert n == 1
    return k


def test_torsion_row_examples(fields_1e4):
    r = torsion.torsion_row(-23, fields_1e4)
    assert (r.h2, r.h3, r.h6) == (1, 3, 3)
    r = torsion.torsion_row(-15, fields_1e4)
    assert (r.h2, r.h3, r.h6) == (2, 1, 2)
    r = torsion.torsion_row(12, fields_1e4)
    assert (r.h2_plus, r.h2, r.h3) == (2, 1, 1)
    with pytest.raises(DomainError):
        torsion.torsion_row(-16, fields_1e4)


def test_rows_match_table(fields_1e4):
    for s in (-1, 1):
        t = torsion.torsion_table(3000, s, fields_1e4)
        for row in list(t.rows())[::17]:
            assert torsion.torsion_row(row.D, fields_1e4) == row


def test_negative_h2_h3_match_class_groups(fields_1e4):
    t = torsion.torsion_table(4000, -1, fields_1e4)
    for row in t.rows():
        assert row.h3 == bqf.torsion_count(row.D, 3)
        assert row.h2 == bqf.torsion_count(row.D, 2)
        assert row.h6 == bqf.torsion_count(row.D, 6)


def test_positive_h3_satisfies_reflection(fields_1e4):
    """Scholz: r3(D) <= r3(D*) <= r3(D) + 1 with D* the imaginary partner of D > 0."""
    t = torsion.torsion_table(10**4, 1, fields_1e4)
    for row in t.rows():
        D = row.D
        partner = -3 * D if D % 3 else -D // 3
        assert is_fundamental_discriminant(partner)
        r, rs = log3(row.h3), log3(bqf.torsion_count(partner, 3))
        assert r <= rs <= r + 1


def test_coverage_is_checked(fields_1e4):
    with pytest.raises(RangeError):
        torsion.torsion_table(10**5, -1, fields_1e4)


def test_sums_and_main_terms(fields_1e6):
    s = torsion.torsion_sums(10**6, "minus", "h6", fields_1e6)
    assert 0 < s.ratio < 2
    assert torsion.torsion_sums(10**4, "minus", "h3", fields_1e6).main_term is None
    h2 = torsion.torsion_sums(10**5, "minus", "h2", fields_1e6)
    assert 0.8 < h2.ratio < 1.2


def test_h2_sum_equals_exchanged_sum():
    X = 10**4
    D = np.abs(fundamental_discriminants(X, -1))
    omega = np.array([len({p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, math.isqrt(p) + 1))})
                      for n in D.tolist()])
    total_h2 = int((2 ** (omega - 1)).sum())
    exchanged = 0
    for n in D.tolist():
        primes = [p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, math.isqrt(p) + 1))]
        k = math.prod(primes)
        exchanged += sum(1 for q in range(1, math.isqrt(k) + 1) if k % q == 0 and q * q < k
                         and all(q % (j * j) for j in range(2, math.isqrt(q) + 1)))
    assert total_h2 == exchanged
    assert torsion.torsion_sums(X, "minus", "h2").sum == total_h2


def test_hyperbola_identity_small():
    assert torsion.hyperbola_identity_check(10**4)
    assert torsion.squarefree_kernel(-60) == 30


def test_expectation_ratios(fields_1e4):
    r = torsion.expectation_ratios(100, fields_1e4)
    rows = list(torsion.torsion_table(100, -1, fields_1e4).rows())
    n = len(rows)
    assert r.count == n
    assert r.E2 == Fraction(sum(x.h2 for x in rows), n)
    assert r.E6 == Fraction(sum(x.h6 for x in rows), n)
    assert r.ratio == r.E6 / (r.E2 * r.E3)
    with pytest.raises(DomainError):
        torsion.expectation_ratios(3, fields_1e4)


def test_n3_examples(fields_1e4):
    star = torsion.CountModel("N3*", "minus")
    assert torsion.n3(100, 23, model=star, fields=fields_1e4) == 1
    e = torsion.error_term(100, 23, model=star, fields=fields_1e4)
    assert e == pytest.approx(1 - 0.75 * 2 / math.pi**2 * (23 / 24) / 23 * 100)
    with pytest.raises(DomainError):
        torsion.n3(100, 4, fields=fields_1e4)
    with pytest.raises(DomainError):
        torsion.error_term(100, 1, sigma=FieldFilter(type2=frozenset({"u3"})), fields=fields_1e4)


def test_n3_against_direct_count(fields_1e5):
    X = 10**5
    for d in (1, 5, 7, 30):
        want = sum(1 for D in fields_1e5.disc.tolist() if abs(D) < X and D % d == 0)
        assert torsion.n3(X, d, fields=fields_1e5) == want
    # N3*: no prime totally ramified; q = 1 and the local types at 2, 3 are not totally ramified
    F = fields_1e5
    t2 = np.array([s.startswith("tr") for s in F.type2_ids])[F.type2]
    t3 = np.array([s.startswith("tr") for s in F.type3_ids])[F.type3]
    want = int(np.count_nonzero((np.abs(F.disc) < X) & (F.q == 1) & ~t2 & ~t3))
    assert torsion.n3(X, 1, model=torsion.CountModel("N3*"), fields=F) == want


def test_n3_star_is_fundamental_count(fields_1e5):
    """A cubic field has fundamental discriminant iff no prime is totally ramified."""
    X = 10**5
    fund = sum(1 for D in fields_1e5.disc.tolist() if abs(D) < X and is_fundamental_discriminant(D))
    assert torsion.n3(X, 1, model=torsion.CountModel("N3*"), fields=fields_1e5) == fund


def test_davenport_heilbronn_signed_split(fields_1e6):
    minus = torsion.n3(10**6, 1, model=torsion.CountModel("N3", "minus"), fields=fields_1e6)
    plus = torsion.n3(10**6, 1, model=torsion.CountModel("N3", "plus"), fields=fields_1e6)
    assert abs(minus / (minus + plus) - 0.75) <= 0.02


def test_lod_scan_table(fields_1e4):
    scan = torsion.lod_scan(10**4, 10, fields=fields_1e4)
    assert [r[0] for r in scan.rows] == [1, 2, 3, 5, 6, 7, 10]
    for d, cnt, main, err in scan.rows:
        assert cnt == torsion.n3(10**4, d, model=torsion.CountModel("N3*"), fields=fields_1e4)
        assert err == pytest.approx(abs(cnt - main))
    assert scan.aggregate == pytest.approx(sum(r[3] for r in scan.rows))
    with pytest.raises(DomainError):
        torsion.lod_scan(100, 11, fields=fields_1e4)


def test_write_rows(tmp_path, fields_1e4):
    t = torsion.torsion_table(100, -1, fields_1e4)
    p = tmp_path / "rows.csv"
    torsion.write_torsion_rows(p, t)
    lines = p.read_text().splitlines()
    assert lines[0] == "D,h2,h2_plus,h3,h6,h6_plus"
    assert lines[1] == "-3,1,1,1,1,1"
    assert "-23,1,1,3,3,3" in lines

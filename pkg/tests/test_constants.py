import math
import random
from collections import Counter
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from sixtorsion import constants as K
from sixtorsion import etale
from sixtorsion.arith import small_primes
from sixtorsion.errors import DataError, DomainError, IntegrityError

TAME_PRIMES = [p for p in range(5, 98) if all(p % k for k in range(2, p))]


def direct_product(factor, p_min, N):
    """Plain partial product; with |log factor(p)| <= 3/p^{4/3} the tail is < 9 N^{-1/3}."""
    s = math.fsum(math.log(factor(int(p))) for p in small_primes(N) if p >= p_min)
    return math.exp(s)


def test_power_basis_arithmetic():
    a = K.PowerBasis.term(2, 1, Fraction(1, 3))
    assert a * a * a == K.PowerBasis.term(2, 1, 1)
    assert float(a) == pytest.approx(2 ** (-1 / 3), rel=1e-15)
    with pytest.raises(IntegrityError):
        K.PowerBasis.term(2, 1, Fraction(1, 2))
    with pytest.raises(DomainError):
        a + K.PowerBasis.term(3, 1, 0)


def test_trivial_product():
    r = K.euler_product(lambda p: 1.0, cutoff=100)
    assert r.value == 1.0
    assert r.width <= 3e-12


def test_product_encloses_six_over_pi_squared():
    # log(1 - t^2) = -sum t^{2k}/k; |c_k| <= 2^k/k with the single-root bound
    s = K.log_series([1, 0, -1], [1], 1, 30)
    cert = K.root_certificate(2, 1.0, 30, 1)
    r = K.euler_product(lambda p: 1 - 1 / p**2, 2, 1e-10, cert, s)
    assert r.lower <= 6 / math.pi**2 <= r.upper
    assert r.width <= 1e-10


def test_certificate_violation_is_caught():
    bogus = K.TailCertificate(K=1e-30, delta=1.0, p_from=2)
    with pytest.raises(IntegrityError):
        K.euler_product(lambda p: 1 - 1 / p**2, certificate=bogus, cutoff=1000)


def test_main_constant_enclosure():
    r = K.main_constant()
    assert r.width <= 1e-9
    N = 2 * 10**6
    d = direct_product(lambda p: (1 + 1 / (p + 1)) * (1 - 1 / p), 2, N)
    # |log factor| <= 2/p^2 gives a tail below 2/N
    assert abs(d - r.value) <= r.value * 2 / N + r.width
    assert 0.47 < r.value < 0.48


@pytest.mark.parametrize("name,p_min", [("c2_product", 5), ("tame_product", 5)])
def test_named_products_against_partial_products(name, p_min):
    r = getattr(K, name)()
    assert r.width <= 1e-9
    if name == "c2_product":
        f = lambda p: 1 - 2 / ((p + 1) * (p + 2)) + p ** (-4 / 3) * (1 + p ** (-1 / 3)) * p * p / ((p + 1) * (p + 2))
    else:
        f = lambda p: (1 - 1 / p) ** 3 * (1 + 3 / p + p ** (-4 / 3) + p ** (-5 / 3))
    N = 10**6
    d = direct_product(f, p_min, N)
    # the tail is positive and below sum_{p > N} 2 p^{-4/3} < 6 N^{-1/3} / log N
    tail = 6 * N ** (-1 / 3) / math.log(N)
    assert d <= r.upper
    assert r.lower <= d * math.exp(tail)


def test_enclosures_shrink_with_cutoff():
    s = K.log_series([1, 1, -2], [1, 1], 1, 20)
    cert = K.root_certificate(3, 2.0, 20, 1)
    f = lambda p: (1 + 1 / (p + 1)) * (1 - 1 / p)
    prev = None
    for N in (1000, 4000, 16000, 64000):
        r = K.euler_product(f, 2, certificate=cert, series=s, cutoff=N)
        if prev is not None:
            assert r.width <= prev.width
            assert max(r.lower, prev.lower) <= min(r.upper, prev.upper)
        prev = r


def test_zeta3():
    assert K.zeta3() == pytest.approx(float(mpmath.zeta(3)), abs=1e-15)


def test_tame_table_shapes():
    for p in (7, 13):
        c = Counter((r.galois_group, r.disc_exponent) for r in K.tame_table(p))
        assert c == {("1", 0): 1, ("C2", 0): 1, ("C2", 1): 2, ("C3", 0): 1, ("C3", 2): 3, ("C2xC2", 2): 1,
                     ("C6", 0): 1, ("C6", 3): 2, ("C6", 4): 3, ("C6", 5): 6}
    for p in (5, 11):
        c = Counter((r.galois_group, r.disc_exponent) for r in K.tame_table(p))
        assert c[("S3", 4)] == 1 and c[("D6", 10)] == 1 and c[("C6", 3)] == 2
        assert not any(g == "C3" and v > 0 for g, v in c)
    with pytest.raises(DomainError):
        K.tame_table(2)
    with pytest.raises(DomainError):
        K.tame_table(9)


@pytest.mark.parametrize("p", TAME_PRIMES)
def test_tame_field_sum_identity(p):
    s = K.field_sum(p)
    assert s == K.tame_closed_form(p)
    c0, c1, c2 = s.coeffs
    assert c0 == 12 + Fraction(36, p)
    assert c1 == Fraction(12, p) and c2 == Fraction(12, p)


@pytest.mark.parametrize("p", [2, 3])
def test_wild_field_sum_identity(p):
    assert K.field_sum(p) == K.wild_closed_form(p)


def test_wild_table_sizes():
    rows = etale.local_etale_table()
    assert sum(1 for r in rows if r.p == 2) == 27
    assert sum(1 for r in rows if r.p == 3) == 33


def test_local_sums_relate_to_inner_factors():
    assert K.c3_local("inf") == 2
    assert K.c3_local(2) == Fraction(8, 7) * K.inner_factor(2)
    assert K.c3_local(3) == Fraction(24, 13) * K.inner_factor(3)


def test_constant_chain():
    ls, prod, th = K.ls_constant(), K.c123(), K.closed_form_constant()
    assert abs(ls.value - prod.value) < 1e-9
    assert abs(prod.value - th.value) < 1e-9
    assert K.c3_by_sigma() == pytest.approx(K.c3(), rel=1e-12)
    assert len(etale.all_sigmas()) == 12800


def test_cubic_masses():
    assert etale.cubic_mass(2) == Fraction(7, 4)
    assert etale.cubic_mass(3) == Fraction(13, 9)


def test_psi_and_C_qe():
    assert K.psi(6) == Fraction(1, 2)
    assert K.psi(1) == 1
    with pytest.raises(DomainError):
        K.psi(0)
    m = K.main_constant()
    c = K.C_qe(1, 1)
    assert c.value == pytest.approx(m.value / ((1 + 1 / 3) * (1 + 1 / 4)), rel=1e-14)


def test_phi_hat_strata():
    assert K.phi_hat_magnitude(5, "zero") == Fraction(29, 125)
    assert K.phi_hat_magnitude(5, "disc_divisible_nonzero") == Fraction(4, 125)
    assert K.phi_hat_magnitude(5, "generic") == Fraction(1, 125)
    with pytest.raises(DomainError):
        K.phi_hat_magnitude(3, "zero")


def test_squarefree_progressions():
    rng = random.Random(0)
    done = 0
    while done < 50:
        c = rng.randint(1, 60)
        m = rng.randint(1, 300)
        a = rng.randint(0, c - 1)
        Y = rng.randint(100, 10**5)
        if math.gcd(a * m, c) != 1:
            continue
        done += 1
        r = K.squarefree_progression_check(a, c, m, Y)
        brute = sum(1 for q in range(1, Y + 1) if q % c == a % c and math.gcd(q, m) == 1
                    and all(q % (k * k) for k in range(2, math.isqrt(q) + 1))) if Y < 3000 else None
        if brute is not None:
            assert r.count == brute
        assert r.ok, r


def test_strict_table_parse(tmp_path):
    bad = tmp_path / "local_etale.csv"
    text = etale.resources.files("sixtorsion.data").joinpath("local_etale.csv").read_text()
    bad.write_text(text.replace("\n2,C2,0,1,", "\n2,Z2,0,1,", 1))
    with pytest.raises(DataError):
        etale.local_etale_table(bad)
    bad.write_text("p,group,disc_exponent\n2,1,0\n")
    with pytest.raises(DataError):
        etale.local_etale_table(bad)
    wrong_aut = tmp_path / "aut.csv"
    wrong_aut.write_text(text.replace("\n2,C2,0,1,", "\n2,C2,0,5,", 1))
    with pytest.raises(IntegrityError):
        etale.local_etale_table(wrong_aut)


def test_alternate_table_changes_constant(tmp_path):
    text = etale.resources.files("sixtorsion.data").joinpath("local_etale.csv").read_text()
    lines = text.splitlines()
    drop = next(i for i, l in enumerate(lines) if l.startswith("3,D6"))
    alt = tmp_path / "alt.csv"
    alt.write_text("\n".join(lines[:drop] + lines[drop + 1 :]) + "\n")
    table = etale.local_etale_table(alt)
    assert K.field_sum(3, table) != K.wild_closed_form(3)
    assert K.ls_constant(table).value < K.ls_constant().value


def test_local_type_frequencies(fields_1e6):
    """Field proportions by local type at 2 and 3 approach the mass-formula weights."""
    F = fields_1e6
    for p, col, ids in ((2, F.type2, F.type2_ids), (3, F.type3, F.type3_ids)):
        for k, tid in enumerate(ids):
            t = etale.cubic_type(p, tid)
            pred = float(t.multiplicity * etale.cubic_weight(p, tid)) / p**t.disc_exponent
            obs = np.count_nonzero(col == k) / len(F)
            # secondary terms of relative size X^{-1/6} are still large at 10^6
            assert abs(obs - pred) <= 0.25 * pred, (p, tid, obs, pred)
            v = np.abs(F.disc[col == k]).astype(object)
            assert all(x % p**t.disc_exponent == 0 and x % p ** (t.disc_exponent + 1) != 0 for x in v[:5000])

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sixtorsion import bqf, hooley
from sixtorsion.arith import fundamental_discriminants
from sixtorsion.errors import DomainError


def window_scan(n):
    """Delta(n) from every real left end u, sampled at divisors d and d/e (exact in Fractions)."""
    divs = [d for d in range(1, n + 1) if n % d == 0]
    lo, hi = hooley._e_enclosure(40)
    best = 0
    for u in divs:
        best = max(best, sum(1 for d in divs if u <= d and Fraction(d, u) <= lo))
    return best


def test_delta_examples():
    assert hooley.delta(1).delta == 1
    assert hooley.delta(2).delta == 2
    assert hooley.delta(5).delta == 1
    s = hooley.delta(12)
    assert s.delta == 3 and s.witness_u == 2
    with pytest.raises(DomainError):
        hooley.delta(0)


@given(st.integers(1, 5000))
def test_delta_matches_window_scan(n):
    assert hooley.delta(n).delta == window_scan(n) == hooley.delta_all_pairs(n)


def test_exact_comparison_with_e():
    assert hooley.le_e_times(2718281828, 10**9)
    assert not hooley.le_e_times(2718281829, 10**9)
    # convergent 1264/465 of e lies below e, 1457/536 lies above
    assert hooley.le_e_times(1264, 465)
    assert not hooley.le_e_times(1457, 536)


def test_delta_array_small():
    vals = hooley.delta_array(2000)
    assert vals.tolist() == [hooley.delta(n).delta for n in range(1, 2001)]
    assert hooley.delta_all_pairs_range(2000).tolist() == vals.tolist()


def test_delta_average_small():
    r = hooley.delta_average(10)
    assert r.mean == pytest.approx(sum(window_scan(n) for n in range(1, 11)) / 10)
    assert r.bound_ratio == pytest.approx(r.mean / math.log(math.log(10)) ** 2.5)
    with pytest.raises(DomainError):
        hooley.delta_average(5)


def test_submultiplicativity_small():
    assert hooley.submultiplicative_check(pairs=500, max_value=500, seed=3) == []


def test_window_sum_against_class_groups(fields_1e4):
    T, L = 5000, 1.0
    w = hooley.window_divisor_sum(T, L, -1, fields_1e4)
    lo, hi = math.sqrt(T) / math.log(T), math.sqrt(T) * math.log(T)
    want = 0
    for D in fundamental_discriminants(T + 1, -1).tolist():
        h3 = bqf.torsion_count(D, 3)
        if h3 > 1:
            want += (h3 - 1) * sum(1 for d in range(1, -D + 1) if -D % d == 0 and lo <= d <= hi)
    assert w.sum == want
    assert w.bound == pytest.approx(T * math.log(math.log(T)) ** 3.5 * L)


def test_window_sum_empty_range(fields_1e4):
    assert hooley.window_divisor_sum(40, 1.0, 1, fields_1e4).sum == 0
    with pytest.raises(DomainError):
        hooley.window_divisor_sum(100, 0.5, 1, fields_1e4)


def test_delta_stats_csv(tmp_path):
    p = tmp_path / "d.csv"
    hooley.write_delta_stats(p, 12)
    assert p.read_text().splitlines()[:4] == ["n,delta", "1,1", "2,2", "3,1"]

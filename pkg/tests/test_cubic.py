import math
import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixtorsion import constants
from sixtorsion.arith import factorize, is_fundamental_discriminant
from sixtorsion.cubic.fields import (
    FieldFilter,
    enumerate_classes,
    enumerate_cubic_fields,
    field_table,
)
from sixtorsion.cubic.forms import (
    BinaryCubicForm,
    act,
    discriminant,
    is_irreducible,
    is_maximal_at,
    is_maximal_at_fast,
    is_perfect_square,
    ramification_type,
    superforms,
)
from sixtorsion.cubic.oracle import oracle_classes
from sixtorsion.cubic.reduction import reduce_form
from sixtorsion.errors import DomainError, RangeError

PRIMES = [2, 3, 5, 7, 11, 13]


def unimodular(rng, steps=6):
    M = np.eye(2, dtype=object)
    gens = [((1, 1), (0, 1)), ((1, -1), (0, 1)), ((0, -1), (1, 0)), ((1, 0), (0, -1))]
    for _ in range(steps):
        M = M.dot(np.array(rng.choice(gens), dtype=object))
    return tuple(tuple(int(x) for x in row) for row in M)


def test_discriminant_examples():
    assert discriminant((1, 0, -1, -1)) == -23
    assert discriminant((0, 1, 0, -1)) == 4
    assert discriminant((1, 0, 0, 0)) == 0


def test_discriminant_overflow_guard():
    with pytest.raises(RangeError):
        discriminant((10**20, 10**20, 10**20, 10**20))


def test_irreducibility_examples():
    assert is_irreducible((1, 0, -1, -1))
    assert not is_irreducible((1, 0, 0, -1))
    assert not is_irreducible((0, 1, 1, 1))


def test_maximality_examples():
    assert not is_maximal_at((1, 0, 0, 4), 2)
    assert is_maximal_at((1, 0, -1, -1), 23)
    assert is_maximal_at((1, 0, 0, 4), 3)
    with pytest.raises(DomainError):
        is_maximal_at((1, 0, -1, -1), 4)


def test_superforms_count():
    assert len(superforms((1, 0, -1, -1), 5)) == 6


def test_ramification_examples():
    assert ramification_type((1, 0, -1, -1), 23) == "partially_ramified"
    assert ramification_type((1, 0, -1, -1), 5) == "split_12"
    assert ramification_type((1, 0, 0, -2), 5) == "split_12"


small_forms = st.tuples(*[st.integers(-12, 12)] * 4).filter(lambda f: discriminant(f) != 0)


@given(small_forms, st.sampled_from(PRIMES))
@settings(max_examples=400)
def test_fast_maximality_matches_superforms(f, p):
    assert is_maximal_at_fast(f, p) == is_maximal_at(f, p)


@given(small_forms, st.integers(0, 10**6))
@settings(max_examples=200)
def test_disc_and_maximality_are_class_invariants(f, seed):
    M = unimodular(random.Random(seed))
    g = act(f, M)
    assert discriminant(g) == discriminant(f)
    for p in (2, 3, 5):
        assert is_maximal_at(g, p) == is_maximal_at(f, p)


def test_enumeration_small_examples():
    assert list(enumerate_classes(22)) == []
    e23 = list(enumerate_classes(23))
    assert [f.disc for f in e23] == [-23]
    assert reduce_form((1, 0, -1, -1)) == e23[0]
    assert reduce_form((1, -1, -2, 1)) in list(enumerate_classes(49))


def test_enumeration_matches_box_oracle():
    X = 1500
    oracle = oracle_classes(X)
    prod = Counter(f.disc for f in enumerate_classes(X))
    assert {D: len(v) for D, v in oracle.items() if v} == dict(prod)


def test_box_oracle_is_saturated():
    X = 800
    a = {D: len(v) for D, v in oracle_classes(X).items() if v}
    b = {D: len(v) for D, v in oracle_classes(X, cd_bound=4 * math.isqrt(X) + 20).items() if v}
    assert a == b


def test_reduction_is_class_normalization():
    rng = random.Random(1)
    forms = [f for f in enumerate_classes(10**4)]
    for f in rng.sample(forms, 500):
        for _ in range(20):
            g = act(f, unimodular(rng, rng.randint(1, 10)))
            if rng.random() < 0.5:
                g = tuple(-t for t in g)
            assert reduce_form(g) == f


def test_field_records_examples():
    recs = enumerate_cubic_fields(23)
    assert [(r.disc, r.beta, r.q, r.is_galois) for r in recs] == [(-23, -23, 1, False)]
    fund = enumerate_cubic_fields(81, FieldFilter(fundamental_only=True))
    assert 81 not in [r.disc for r in fund]
    assert 81 in [r.disc for r in enumerate_cubic_fields(81)]
    tr7 = enumerate_cubic_fields(200, FieldFilter(totally_ramified_at=(7,)))
    assert tr7 and all(r.disc % 49 == 0 for r in tr7)
    for r in tr7:
        assert ramification_type(r.form, 7) == "totally_ramified"


def test_field_record_invariants(fields_1e5):
    for r in fields_1e5.records():
        f = r.form
        assert discriminant(f) == r.disc
        assert is_irreducible(f)
        s2 = Fraction(r.disc, r.beta)
        assert s2.denominator == 1 and is_perfect_square(int(s2))
        assert r.beta == 1 or is_fundamental_discriminant(r.beta)
        assert r.is_galois == is_perfect_square(r.disc)
        assert r.disc % (r.q * r.q) == 0 and math.gcd(r.q, 6) == 1


def test_maximality_and_types_on_sample(fields_1e5):
    rng = random.Random(7)
    for i in rng.sample(range(len(fields_1e5)), 400):
        r = fields_1e5.record(i)
        for p in (2, 3, 5, 7, 11, 13):
            assert is_maximal_at(r.form, p)
        q = 1
        for p, _ in factorize(r.disc).factors:
            if p >= 5 and ramification_type(r.form, p) == "totally_ramified":
                q *= p
        assert q == r.q


def test_davenport_heilbronn_density(fields_1e6):
    target = 1 / (4 * constants.zeta3())
    dens = []
    for X in (10**4, 10**5, 10**6):
        n = int(np.count_nonzero((fields_1e6.disc < 0) & (-fields_1e6.disc <= X)))
        dens.append(n / X)
    assert 0.16 <= dens[-1] <= 0.22
    assert dens[0] < dens[1] < dens[2] < target


def test_sorted_and_unique(fields_1e5):
    key = np.abs(fields_1e5.disc)
    assert np.all(np.diff(key) >= 0)
    assert len({tuple(r) for r in fields_1e5.forms.tolist()}) == len(fields_1e5)

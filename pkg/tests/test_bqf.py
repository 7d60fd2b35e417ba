import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixtorsion import bqf
from sixtorsion.arith import fundamental_discriminants, is_fundamental_discriminant
from sixtorsion.bqf import QuadForm
from sixtorsion.errors import DomainError, RangeError

NEG_FUND = fundamental_discriminants(5000, -1).tolist()


def kronecker(D, n):
    """Kronecker symbol (D/n) for n > 0."""
    out = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        out *= 1 if D % 8 in (1, 7) else -1
    a, m = D % n, n
    # Jacobi symbol (a/m), m odd
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                out = -out
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            out = -out
        a %= m
    return out if m == 1 else 0


def dirichlet_class_number(D):
    """h(D) = -(w / 2|D|) sum_{a < |D|} (D/a) a for D < 0."""
    w = {-3: 6, -4: 4}.get(D, 2)
    s = sum(kronecker(D, a) * a for a in range(1, -D))
    h = -w * s / (2 * -D)
    assert h == int(h)
    return int(h)


def test_reduced_forms_examples():
    assert bqf.reduced_forms(-4) == [QuadForm(1, 0, 1)]
    assert sorted(bqf.reduced_forms(-23)) == sorted([QuadForm(1, 1, 6), QuadForm(2, 1, 3), QuadForm(2, -1, 3)])
    assert sorted(bqf.reduced_forms(-15)) == sorted([QuadForm(1, 1, 4), QuadForm(2, 1, 2)])
    with pytest.raises(DomainError):
        bqf.reduced_forms(-16)
    with pytest.raises(DomainError):
        bqf.reduced_forms(5)


def test_compose_examples():
    assert bqf.compose(QuadForm(2, 1, 3), QuadForm(2, 1, 3)) == QuadForm(2, -1, 3)
    assert bqf.compose(QuadForm(2, 1, 2), QuadForm(2, 1, 2)) == QuadForm(1, 1, 4)


@pytest.mark.parametrize("D", NEG_FUND[::7])
def test_class_number_matches_dirichlet_formula(D):
    assert len(bqf.reduced_forms(D)) == dirichlet_class_number(D)


def test_class_number_one():
    ones = [D for D in NEG_FUND if len(bqf.reduced_forms(D)) == 1]
    assert ones == [-3, -4, -7, -8, -11, -19, -43, -67, -163]


def test_known_group_structures():
    assert bqf.class_group(-3299).elementary_divisors == (3, 9)
    assert bqf.class_group(-4027).elementary_divisors == (3, 3)
    assert bqf.class_group(-84).elementary_divisors == (2, 2)


@given(st.sampled_from(NEG_FUND), st.integers(0, 10**6))
@settings(max_examples=150, deadline=None)
def test_group_axioms(D, seed):
    rng = random.Random(seed)
    forms = bqf.reduced_forms(D)
    f, g, k = (rng.choice(forms) for _ in range(3))
    e = bqf.principal_form(D)
    assert bqf.compose(f, e) == f
    assert bqf.compose(f, g) == bqf.compose(g, f)
    assert bqf.compose(bqf.compose(f, g), k) == bqf.compose(f, bqf.compose(g, k))
    assert bqf.compose(f, bqf.inverse(f)) == e
    h = len(forms)
    assert bqf.power(f, h) == e
    assert h % bqf.element_order(f) == 0


@pytest.mark.parametrize("D", NEG_FUND[::11])
def test_torsion_counts_agree_with_structure(D):
    G = bqf.class_group(D)
    assert math.prod(G.elementary_divisors) == G.order
    for n in (2, 3, 6):
        assert bqf.torsion_count(D, n) == G.torsion(n)


@pytest.mark.parametrize("D", NEG_FUND[::13])
def test_two_torsion_is_genus_count(D):
    omega = len({p for p in range(2, -D + 1) if -D % p == 0 and all(p % q for q in range(2, math.isqrt(p) + 1))})
    assert bqf.torsion_count(D, 2) == 2 ** (omega - 1)


def test_range_limit():
    with pytest.raises(RangeError):
        bqf.torsion_count(-23, 3, max_abs_disc=10)


@given(st.integers(1, 50), st.integers(-50, 50), st.integers(1, 200))
def test_reduce_form_preserves_disc_and_reduces(a, b, c):
    D = b * b - 4 * a * c
    if D >= 0:
        return
    r = bqf.reduce_form(QuadForm(a, b, c))
    assert r.disc == D and bqf.is_reduced(r)

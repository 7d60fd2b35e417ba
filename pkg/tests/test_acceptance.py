"""Acceptance suite: one check per criterion, each reported as a PASS/FAIL line."""

import hashlib
import math
import random
import time

import numpy as np
import pytest
from click.testing import CliRunner
from conftest import report

from sixtorsion import bqf, constants, d6, hooley, torsion
from sixtorsion.arith import factorize
from sixtorsion.cli import main
from sixtorsion.cubic.cache import build_cache, get_field_table, sha256_file
from sixtorsion.cubic.fields import field_table


def check(criterion, label, ok, detail):
    report(criterion, label, ok, detail)
    assert ok, detail


@pytest.fixture(scope="module")
def fields_1e7():
    return get_field_table(10**7)


def test_criterion_1_h3_oracle():
    t0 = time.time()
    F = field_table(20000)
    table = torsion.torsion_table(20000, -1, F)
    bad = [D for D, h3 in zip(table.D.tolist(), table.h3.tolist()) if bqf.torsion_count(D, 3) != h3]
    dt = time.time() - t0
    check("1", "", not bad and dt < 120,
          f"{len(table)} fundamental D in (-20000, 0), {len(bad)} mismatches, {dt:.1f}s")


def test_criterion_2_hyperbola_identity():
    ok = torsion.hyperbola_identity_check(10**5)
    check("2", "", ok, "hyperbola_identity_check(10^5) exact")


def test_criterion_3_constant_identities():
    tame = [p for p in range(5, 98) if all(p % k for k in range(2, p))]
    bad = [p for p in tame if constants.field_sum(p) != constants.tame_closed_form(p)]
    report("3", "a", not bad, f"tame field sums equal 12 + 36/p + 12p^-4/3 + 12p^-5/3 for {len(tame)} primes")
    wild = {p: constants.field_sum(p) == constants.wild_closed_form(p) for p in (2, 3)}
    report("3", "b", all(wild.values()), f"wild sums at 2, 3 exact: {wild}")
    ls, prod, th = constants.ls_constant(), constants.c123(), constants.closed_form_constant()
    r1, r2 = abs(ls.value - prod.value), abs(prod.value - th.value)
    widths = max(ls.width, prod.width, th.width)
    ok_c = r1 < 1e-9 and r2 < 1e-9 and widths < 1e-9
    report("3", "c", ok_c, f"|c(G) - C1C2C3| = {r1:.2e}, |C1C2C3 - closed form| = {r2:.2e}, "
                           f"certified widths <= {widths:.1e}")
    assert not bad and all(wild.values()) and ok_c


def test_criterion_4_davenport_heilbronn(fields_1e6):
    target = 1 / (4 * constants.zeta3())
    minus = torsion.CountModel("N3", "minus")
    d6_ = torsion.n3(10**6, 1, model=minus, fields=fields_1e6) / 10**6
    d4 = torsion.n3(10**4, 1, model=minus, fields=fields_1e6) / 10**4
    allf = torsion.n3(10**6, 1, model=torsion.CountModel("N3"), fields=fields_1e6)
    split = d6_ * 10**6 / allf
    ok = 0.16 <= d6_ <= 0.22 and abs(d6_ - target) < abs(d4 - target) and abs(split - 0.75) <= 0.02
    check("4", "", ok, f"N3-(10^6)/X = {d6_:.4f} (10^4: {d4:.4f}, limit {target:.4f}); "
                       f"N3-/N3 = {split:.4f}")


def test_criterion_5_level_of_distribution(fields_1e7):
    model = torsion.CountModel("N3*", "both")
    vals = {}
    scans = {}
    for X in (10**5, 10**6, 10**7):
        scans[X] = torsion.lod_scan(X, 30, model, fields_1e7)
        vals[X] = scans[X].normalized
    e1 = scans[10**7].rows[0]
    assert e1[0] == 1
    e1x = e1[3] / 10**7
    seq = [vals[X] for X in sorted(vals)]
    ok = seq[0] > seq[1] > seq[2] and e1x <= 0.05
    check("5", "", ok, "A(X,30)/X = " + ", ".join(f"{v:.4f}" for v in seq) + f"; |E*(10^7,1)|/X = {e1x:.4f}")


def test_criterion_6_hooley():
    x = 10**5
    fast = hooley.delta_array(x)
    oracle = hooley.delta_all_pairs_range(x)
    report("6", "a", np.array_equal(fast, oracle), f"delta = all-pairs oracle for n <= {x}")
    bad = hooley.submultiplicative_check(pairs=10_000, max_value=10**4, seed=0)
    report("6", "b", not bad, f"Delta(mn) <= Delta(m) tau(n) on 10^4 seeded coprime pairs, {len(bad)} violations")
    avg = hooley.delta_average(10**6)
    ok_c = math.isfinite(avg.bound_ratio) and avg.bound_ratio > 0
    report("6", "c", ok_c, f"delta_average(10^6): mean {avg.mean:.4f}, bound_ratio {avg.bound_ratio:.4f}")
    assert np.array_equal(fast, oracle) and not bad and ok_c


def test_criterion_7_torsion_trend(fields_1e7):
    ratios = {X: float(torsion.expectation_ratios(X, fields_1e7).ratio) for X in (10**4, 10**5, 10**6, 10**7)}
    r4, r7 = ratios[10**4], ratios[10**7]
    ok = 0.5 <= r7 <= 1.5 and abs(r7 - 1) <= abs(r4 - 1) + 0.05
    check("7", "", ok, "E6/(E2E3) = " + ", ".join(f"{ratios[X]:.4f}" for X in sorted(ratios)))


@pytest.fixture(scope="module")
def d6_fields():
    return field_table(d6.required_cubic_bound(10**16))


def test_criterion_8a_d6_integrality_and_orders(d6_fields):
    grid = [10**8, 10**9, 10**10, 10**11, 10**12, 10**13, 10**14]
    rows = []
    ok = True
    for X in grid:
        c = d6.count_d6(X, d6_fields)
        outer = d6.count_pairs_alpha_outer(X, d6_fields)
        ok &= sum(c.by_sigma.values()) % 12 == 0 and c.pairs == outer == 2 * c.count
        rows.append(f"{X:.0e}:{c.count}")
    check("8", "a", ok, "12 | surjections and field-outer = alpha-outer pair counts; counts " + " ".join(rows))


def test_criterion_8b_tame_valuations(d6_fields):
    recs = d6.enumerate_d6(10**16, d6_fields)
    tame = [r for r in recs if any(p >= 5 for p, _ in factorize(r.abs_disc).factors)]
    sample = random.Random(0).sample(tame, 100)
    bad = []
    checked = 0
    for r in sample:
        ap, bp = abs(r.alpha), abs(r.field.beta)
        for p, e in factorize(r.abs_disc).factors:
            if p < 5:
                continue
            checked += 1
            want = d6.tame_exponent_by_characters(ap % p == 0, bp % p == 0, r.field.q % p == 0)
            if e != want:
                bad.append((r.abs_disc, p, e, want))
    check("8", "b", not bad, f"{len(sample)} sampled records, {checked} tame primes, {len(bad)} mismatches")


def test_criterion_8c_subfield_growth(d6_fields):
    recs = d6.enumerate_d6(10**12, d6_fields)
    ratios = {X: d6.count_with_quadratic_subfield(X, -3, records=recs) / X ** (1 / 6) for X in (10**8, 10**10, 10**12)}
    ok = ratios[10**12] <= 2 * ratios[10**8]
    check("8", "c", ok, "count(X, -3)/X^(1/6) = " + ", ".join(f"{X:.0e}: {v:.4g}" for X, v in ratios.items())
          + " (largest <= 2 x smallest)")


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_9_determinism(tmp_path):
    runner = CliRunner()
    cache = tmp_path / "cache"
    commands = [
        ["torsion-sum", "--X", "20000", "--sign", "minus", "--variant", "h6", "--no-cache"],
        ["lod-scan", "--X", "20000", "--dmax", "30", "--no-cache"],
        ["hooley", "--x", "5000"],
        ["d6-count", "--X", "1000000000000", "--no-cache"],
    ]
    same = True
    for i, cmd in enumerate(commands):
        digests = []
        for rep in range(2):
            out = tmp_path / f"run{i}_{rep}"
            res = runner.invoke(main, ["--out", str(out), "--cache-dir", str(cache), *cmd])
            assert res.exit_code == 0, res.output
            digests.append({p.name: _sha(p) for p in sorted(out.glob("*.csv"))})
        same &= digests[0] == digests[1] and bool(digests[0])
    report("9", "a", same, f"{len(commands)} commands run twice, CSVs byte-identical")

    whole = build_cache(10**5, tmp_path / "whole")
    part = tmp_path / "part"
    build_cache(10**5, part, max_chunks=3)
    resumed = build_cache(10**5, part)
    files = ["fields.csv", "fields.npy"] + sorted(p.name for p in whole.glob("chunk_*.npy"))
    equal = all(sha256_file(whole / f) == sha256_file(resumed / f) for f in files)
    report("9", "b", equal, f"resumed cache equals uninterrupted cache ({len(files)} files by sha256)")
    assert same and equal

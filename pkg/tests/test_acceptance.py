"""One line per acceptance criterion, printed even when output is captured."""

import random
import time
from fractions import Fraction

import pytest
from mpmath import mp

from singmod.casecheck import check_all_cases, margin_below, table3_printed_subtotal
from singmod.isogeny import construct_isogeny_degree, isogenous_upper_triangular
from singmod.jfun import eval_j, verify_expansion_constants
from singmod.quadforms import (
    ambiguous_forms,
    class_number,
    class_number_formula,
    compose,
    denominator_count_bounds,
    max_forms_per_denominator,
    principal_form,
    reduced_forms,
    split_discriminant,
)
from singmod.relations import (
    parameter_region_delta,
    parameter_region_root_y,
    relation_lattice_bruteforce,
    verify_relation_exact,
)
from singmod.searches import (
    enumerate_two_elementary,
    largest_with_class_number_at_most,
    sieve_class_numbers,
    watkins_extension_bound_detail,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}")
        assert ok, detail

    return emit


def test_criterion_1_watkins_desk_scale(report):
    t0 = time.perf_counter()
    mx64, _ = largest_with_class_number_at_most(sieve_class_numbers(1_000_000, workers=4, chunks=4), 64)
    t1 = time.perf_counter()
    mx100, _ = largest_with_class_number_at_most(sieve_class_numbers(2_500_000, workers=4, chunks=8), 100)
    t2 = time.perf_counter()
    ok = mx64 == 991027 and mx100 == 2383747 and t1 - t0 <= 300 and t2 - t1 <= 1800
    report(1, ok, f"h<=64 max {mx64}, h<=100 max {mx100}", t2 - t0)


def test_criterion_2_formula_bound(report):
    t0 = time.perf_counter()
    d = watkins_extension_bound_detail()
    ok = d.bound == 28753200 and d.argmax_f == 420
    report(2, ok, f"bound {d.bound} at f = {d.argmax_f}", time.perf_counter() - t0)


def test_criterion_3_two_elementary(report):
    t0 = time.perf_counter()
    plain = enumerate_two_elementary(False, check_bands=False)
    almost = enumerate_two_elementary(True)
    elapsed = time.perf_counter() - t0
    ok = (
        (plain.count, plain.max_abs) == (101, 7392)
        and (almost.count, almost.max_abs) == (425, 87360)
        and max(h for _, h in plain.discriminants) <= 16
        and max(h for _, h in almost.discriminants) <= 64
        and almost.bands_empty
        and elapsed <= 600
    )
    detail = f"{plain.count}/{plain.max_abs}, almost {almost.count}/{almost.max_abs}, bands empty {almost.bands_empty}"
    report(3, ok, detail, elapsed)


def test_criterion_4_denominator_statistics(report):
    t0 = time.perf_counter()
    S = [denominator_count_bounds(A) for A in (13, 18, 30)]
    s = [max_forms_per_denominator(a) for a in (2, 3, 4, 5)]
    report(4, S == [32, 48, 99] and s == [2, 2, 2, 2], f"S = {S}, s = {s}", time.perf_counter() - t0)


def test_criterion_5_case_analysis(report):
    t0 = time.perf_counter()
    rep = check_all_cases()
    elapsed = time.perf_counter() - t0
    counts_ok = not rep.audit_problems and table3_printed_subtotal() == 390
    ok = counts_ok and rep.passed and elapsed <= 10
    detail = (
        f"{sum(v for k, v in rep.counts.items() if k != 't2')} systems, counts match: {counts_ok}, "
        f"nontrivial kernels: {len(rep.nontrivial)}"
    )
    report(5, ok, detail, elapsed)


def test_criterion_6_expansion_constants(report):
    t0 = time.perf_counter()
    checks = verify_expansion_constants(256)
    elapsed = time.perf_counter() - t0
    ok = all(c.ok and c.margin > 0 for c in checks) and elapsed <= 10
    report(6, ok, f"{sum(c.ok for c in checks)}/{len(checks)} constants certified", elapsed)


def test_criterion_7_exact_relation(report):
    t0 = time.perf_counter()
    values = [1728, -32768, -884736]
    identity = verify_relation_exact(values, [10, 6, -10])
    basis = relation_lattice_bruteforce(values, 12)
    elapsed = time.perf_counter() - t0
    ok = identity and basis == [(5, 3, -5)] and elapsed <= 60
    report(7, ok, f"identity {identity}, basis {basis}", elapsed)


def test_criterion_8_hypothesis_arithmetic(report):
    t0 = time.perf_counter()
    checks = [
        parameter_region_root_y(4, 9, 10**6, 4),
        parameter_region_root_y(6, 162, 10**10, 36),
        parameter_region_delta(4, 9, Fraction(16, 100), 10**6, 4),
        parameter_region_delta(6, 30, Fraction(1, 100), 10**10, 36),
        margin_below(10**7),
    ]
    elapsed = time.perf_counter() - t0
    report(8, all(checks) and elapsed <= 10, f"{sum(checks)}/{len(checks)} certified", elapsed)


def test_criterion_9_property_suites(report):
    t0 = time.perf_counter()
    failures = []
    hs = sieve_class_numbers(100_000)
    for n in range(3, 100_001):
        if n % 4 not in (0, 3):
            continue
        if hs[n] != class_number(-n):
            failures.append(f"sieve {n}")
        d = split_discriminant(-n)
        if d.conductor > 1 and class_number_formula(d.fundamental, d.conductor, int(hs[-d.fundamental])) != hs[n]:
            failures.append(f"formula {n}")
        if n <= 20_000:
            one = principal_form(-n)
            if sum(1 for f in reduced_forms(-n) if compose(f, f) == one) != len(ambiguous_forms(-n)):
                failures.append(f"ambiguous {n}")
    rng = random.Random(0)
    for _ in range(100):
        while True:
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.87, 20))
            if abs(tau) >= 1:
                break
        if not eval_j(tau, 64).overlaps(eval_j(tau, 128)):
            failures.append(f"enclosure {tau}")
    for _ in range(200):
        n = rng.randint(300, 100_000)
        if n % 4 not in (0, 3):
            continue
        y = rng.choice([f for f in reduced_forms(-n) if 4 * f.a * f.a <= n])
        x = principal_form(-n)
        deg = construct_isogeny_degree((x, -n), (y, -n))
        if deg is None or not isogenous_upper_triangular(x.tau(), y.tau(), deg):
            failures.append(f"isogeny {n} {tuple(y)}")
    elapsed = time.perf_counter() - t0
    report(9, not failures and elapsed <= 900, f"{len(failures)} disagreements {failures[:3]}", elapsed)

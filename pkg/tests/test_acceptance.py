"""Acceptance gate: criteria 1-12 at their stated tolerances, one PASS/FAIL line each.

Criteria that do not hold on the desk recipe are left failing; the printed line carries
the observed values.
"""

import itertools
import math
import random
import time
from fractions import Fraction


from quasistair.complexity import complexity_table, pbound, right_special, verify_counting_lemmas
from quasistair.recipe import chacon, check_growth_conditions, d1, derive_scales, validate_recipe
from quasistair.rigidity import (
    build_rauzy,
    fibonacci_word,
    find_constants,
    period_analysis,
    rigidity_witness_search,
    sweep_commuting_powers,
    sweep_period_divisibility,
    sweep_root_transfer,
)
from quasistair.symbolic import correlation, enumerate_language, expand, to_array, word_language
from quasistair.synthesis import (
    TargetFunction,
    lag_window_violations,
    regularize_target,
    synthesize_sequences,
)
from quasistair.tower import (
    LevelSet,
    build_tower,
    discrepancy,
    hn_sweep,
    measure_growth,
    mixing_curve,
    mixtrick_sweep,
)

import chacon_oracle


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def test_criterion_01_words_and_heights(capsys):
    start = time.perf_counter()
    b2 = expand(d1(), 2)
    b3 = expand(d1(), 3)
    elapsed = time.perf_counter() - start
    hs = derive_scales(d1()).h
    ok = (b2 == "01" * 4 + "011" * 4 + "0111" * 4 + "0" and len(b2) == 37 == hs[1]
          and len(b3) == 793 == hs[2] and elapsed < 1)
    report(capsys, 1, ok, f"|B_2|={len(b2)} |B_3|={len(b3)} in {elapsed:.3f}s")


def test_criterion_02_complexity_decomposition(capsys):
    start = time.perf_counter()
    table = complexity_table(d1(), 19)
    elapsed = time.perf_counter() - start
    decomposed = all(r.p == 1 + r.q + sum(r.levels) for r in table.rows)
    cassaigne = all(r.delta_p == r.rs_count for r in table.rows)
    ok = decomposed and cassaigne and table.ok and elapsed < 30
    report(capsys, 2, ok, f"q<=19, p(19)={table.p(19)}, violations={len(table.violations)}, {elapsed:.1f}s")


def test_criterion_03_counting_lemmas(capsys):
    reports = [verify_counting_lemmas(d1(), n) for n in (1, 2)]
    fails = [(r.lemma, r.n, r.ell, r.predicted, r.observed) for rep in reports for r in rep.failures]
    totals = [rep.by_lemma("level_total")[0] for rep in reports]
    pmn = all(t.status == "ok" for t in totals) and totals[0].observed == "36"
    ok = not fails and pmn
    report(capsys, 3, ok, f"p_1(19)={totals[0].observed}, p_2(264)={totals[1].observed}; "
                          f"mismatches (lemma, n, ell, claimed, observed): {fails}")


def test_criterion_04_upper_bound(capsys):
    table = complexity_table(d1(), 19)
    bad = [r.q for r in table.rows if r.p > r.bound]
    p20 = len(enumerate_language(d1(), 20))
    if p20 > pbound(d1(), 20):
        bad.append(20)
    report(capsys, 4, not bad, f"checked q=1..20, violations at {bad}")


def test_criterion_05_tower_identities(capsys):
    start = time.perf_counter()
    tower = build_tower(d1(), 4)
    counts = {}
    bad = 0
    checks = hn_sweep(tower, 2)
    counts["hn n=2"] = len(checks)
    bad += sum(1 for c in checks if not c.passed or c.unresolved)
    for n in (2, 3):
        for which in (2, 3):
            checks = mixtrick_sweep(tower, n, which, samples=600, seed=n)
            counts[f"mixtrick{which} n={n}"] = len(checks)
            bad += sum(1 for c in checks if not c.passed or c.unresolved)
    elapsed = time.perf_counter() - start
    ok = bad == 0 and min(counts.values()) >= 500 and elapsed < 120
    report(capsys, 5, ok, f"{counts}, failures={bad}, {elapsed:.1f}s")


def test_criterion_06_discrepancy_algebra(capsys):
    tower = build_tower(d1(), 4)
    rng = random.Random(2024)
    bad = 0
    for _ in range(100):
        n = rng.choice([2, 3])
        N = rng.randint(1, n)
        B = LevelSet.of(N, rng.sample(range(tower.height(N)), rng.randint(1, min(6, tower.height(N)))))
        A = LevelSet.of(4, rng.sample(range(tower.height(4)), 5))
        A2 = LevelSet.of(4, [j for j in rng.sample(range(tower.height(4)), 5) if LevelSet.level(4, j).isdisjoint(A)])
        lam = discrepancy(tower, A, B).value
        if abs(lam) > tower.measure(A):
            bad += 1
        if len(A2) and discrepancy(tower, A | A2, B).value != lam + discrepancy(tower, A2, B).value:
            bad += 1
        j, i = rng.randrange(tower.height(n)), rng.randrange(tower.cut(n) + 1)
        whole = discrepancy(tower, LevelSet.level(n, j), B).value
        if discrepancy(tower, tower.sublevel(n, j, i), B).value * (tower.cut(n) + 1) != whole:
            bad += 1
    report(capsys, 6, bad == 0, f"100 random pairs, {bad} exact mismatches")


def test_criterion_07_mixing_trend(capsys):
    sums = mixing_curve(d1(), [2, 3, 4], budget=10**8)
    vals = [s.value for s in sums]
    sums_ok = all(x > y for x, y in zip(vals, vals[1:]))
    words = ["0", "1", "00", "01", "10", "11"]
    r = d1()
    hs, cs = r.heights(), r.c
    emp = []
    for n in range(2, 6):
        arr = to_array(r, n + 1, budget=10**8)
        t = hs[n - 1] + cs[n - 1]
        emp.append(max(abs(correlation(r, u, v, t, n + 1, arr=arr).discrepancy)
                       for u in words for v in words))
    emp_ok = all(x > y for x, y in zip(emp, emp[1:]))
    detail = ("sums n=2..4: " + ", ".join(f"{float(s.value):.6f}+-{float(s.error_bound):.6f}" for s in sums)
              + "; empirical max n=2..5: " + ", ".join(f"{float(x):.5f}" for x in emp))
    report(capsys, 7, sums_ok and emp_ok, detail)


def test_criterion_08_finite_measure(capsys):
    rows = measure_growth(d1(), 5)
    growth = check_growth_conditions(d1())
    r = d1()
    partial, expect = Fraction(0), []
    for n in range(1, 6):
        partial += Fraction(r.c[n - 1] + r.b[n - 1], r.heights()[n - 1])
        expect.append(partial)
    ok = all(row.ok and row.mu_S <= row.bound for row in rows) and \
        [g.spacer_partial_sum for g in growth] == expect
    report(capsys, 8, ok, f"partial sum at n=5: {expect[-1]} ~ {float(expect[-1]):.6f}")


def test_criterion_09_synthesis(capsys):
    g = regularize_target(TargetFunction.from_callable(lambda q: q, 100))
    halves = g.values == tuple(math.ceil(q / 2) for q in range(1, 101))
    rec = synthesize_sequences(g, 6)
    validate_recipe(rec)
    window = lag_window_violations(rec)
    report(capsys, 9, halves and not window, f"g=ceil(q/2): {halves}, lag window violations {window}")


def test_criterion_10_string_lemmas(capsys):
    start = time.perf_counter()
    a1 = sweep_root_transfer(12)
    b1 = sweep_commuting_powers(16)
    d1_ = sweep_period_divisibility(20)
    period_bad = 0
    for n in range(1, 17):
        for bits in itertools.product("01", repeat=n):
            w = "".join(bits)
            brute = next(p for p in range(1, n + 1) if w[p:] == w[:n - p])
            period_bad += period_analysis(w).period != brute
    elapsed = time.perf_counter() - start
    ok = a1.ok and b1.ok and d1_.ok and period_bad == 0 and elapsed < 120
    report(capsys, 10, ok, f"root transfer {a1.checked}, commuting {b1.checked}, divisibility {d1_.checked} "
                           f"instances, period mismatches {period_bad}, {elapsed:.1f}s")


def test_criterion_11_rauzy(capsys):
    fib = fibonacci_word(10_000)
    slices = {q: word_language(fib, q) for q in range(1, 32)}
    one_rs = all(len(build_rauzy(slices[q], slices[q + 1]).right_special) == 1 for q in range(1, 31))
    rc = find_constants({q: len(s) for q, s in slices.items()}, 30)
    dx = rc.delta_X()
    exact_dx = dx == Fraction(1, 2 * (16 * 680**681) ** 2)
    r = d1()
    dslices = {q: enumerate_language(r, q) for q in range(1, 17)}
    match = all(build_rauzy(dslices[q], dslices[q + 1]).right_special == right_special(r, q)
                for q in range(1, 16))
    ok = one_rs and (rc.k, rc.K, rc.C) == (2, 340, 680) and exact_dx and match
    report(capsys, 11, ok, f"Fibonacci one RS vertex q<=30: {one_rs}, k={rc.k} K={rc.K} C={rc.C}, "
                           f"delta_X exact: {exact_dx}, D1 RS match q<=15: {match}")


def test_criterion_12_rigidity_contrast(capsys):
    L = chacon_oracle.CYL_LEN
    hs = chacon().heights()
    ch = rigidity_witness_search(chacon(), [hs[n - 1] + 1 for n in range(3, 9)], L, stage=chacon_oracle.STAGE)
    floor = min(r.min_ratio for r in ch)
    r = d1()
    dh = r.heights()
    dd = rigidity_witness_search(r, [dh[n - 1] + r.c[n - 1] for n in range(2, 6)], L, stage=6, budget=10**8)
    below = dd[-1].min_ratio < chacon_oracle.R0
    ok = floor >= chacon_oracle.R0 and below
    report(capsys, 12, ok, f"R0={float(chacon_oracle.R0)}, Chacon floor {float(floor):.6f}; D1 n=2..5: "
                           + ", ".join(f"{float(x.min_ratio):.4f}" for x in dd))

import math
from fractions import Fraction

import pytest

from quasistair.complexity import (
    INF,
    LevelForms,
    alpha_beta,
    complexity_csv,
    complexity_table,
    lemma_csv,
    level_complexity,
    level_decomposition,
    level_of,
    pbound,
    ratio_curve,
    regimes,
    right_special,
    tail_length,
    twosuccs_failures,
    verify_counting_lemmas,
)
from quasistair.recipe import chacon, d1, derive_scales
from quasistair.symbolic import InsufficientDepth, expand

from conftest import brute_rs, factors

D1_P = [2, 3, 5, 8, 13, 19, 25, 32, 40, 49, 58, 68, 79, 91, 103, 116, 130, 145, 161]


@pytest.fixture(scope="module")
def table():
    return complexity_table(d1(), 19)


@pytest.fixture(scope="module")
def report1():
    return verify_counting_lemmas(d1(), 1)


@pytest.fixture(scope="module")
def b5():
    return expand(d1(), 5, budget=2 * 10**6)


def test_tail_length():
    assert tail_length("111") == INF
    assert tail_length("010") == 0
    assert tail_length("0110111") == 3


def test_right_special_small():
    assert right_special(d1(), 2) == ("01", "11")
    assert right_special(d1(), 1) == ("1",)


def test_right_special_matches_brute_force(b5):
    for q in range(1, 12):
        assert list(right_special(d1(), q)) == brute_rs(factors(b5, q + 1))


def test_complexity_values(table):
    assert [r.p for r in table.rows] == D1_P
    assert table.p(0) == 1
    assert table.ok, table.violations
    assert table.exact


def test_first_difference_is_rs_count(table):
    assert all(r.delta_p == r.rs_count for r in table.rows)


def test_decomposition_identity(table):
    for r in table.rows:
        assert r.p == 1 + r.q + sum(r.levels)


def test_levels_at_q2():
    dec = level_decomposition(d1(), 2)
    assert dec.ones == ("11",)
    assert dec.words(1) == ("01",)
    assert level_of(d1(), "01") == 1


def test_rs_tails_never_below_c1():
    for q in range(1, 15):
        for w in right_special(d1(), q):
            assert tail_length(w) >= 1


def test_level_complexity_values():
    assert level_complexity(d1(), 1, 1) == 0
    assert level_complexity(d1(), 1, 3) == 1
    assert level_complexity(d1(), 1, 19) == 36 == 37 - 1


def test_alpha_beta_and_bound(table):
    assert alpha_beta(d1(), 19) == (1, 5)
    assert alpha_beta(d1(), 5)[0] == 0
    for r in table.rows:
        assert r.alpha <= r.beta
        assert r.p <= r.bound == pbound(d1(), r.q)


def test_every_rs_word_has_a_structural_form():
    for q in range(2, 20):
        assert twosuccs_failures(d1(), right_special(d1(), q)) == []


def test_forms_are_exclusive_at_level_one():
    forms = LevelForms(d1(), 1)
    for q in range(2, 20):
        for w in level_decomposition(d1(), q).words(1):
            assert len(forms.matches(w)) == 1


def test_regimes_cover_level_two():
    a, b, c = d1().params(2)
    named = [regimes(a, b, c, 37, ell) for ell in range(1, 300)]
    assert {"empty", "ramp", "flat", "bump", "flat_upper", "full_word", "taper", "dead"} == \
        {name for rows in named for name, _ in rows}
    # one length is claimed by no regime: the step right after the full word
    assert [ell for ell, rows in enumerate(named, start=1) if not rows] == [a * 37 + (a + 1) * c + 1]


def test_counting_lemmas_level_one(report1):
    # lengths up to m_1 = 19 are exact; the margin past c_5 + b_5 = 20 uses the continuation
    assert report1.complete and not report1.exact
    bad = {(r.lemma, r.ell) for r in report1.failures}
    # only the full-word step disagrees (see the next test)
    assert bad == {("full_word", 9)}
    for name in ("empty", "ramp", "flat", "bump", "flat_upper", "taper", "dead",
                 "exact_count", "forms", "taper_total", "level_total", "level_bound", "level_saturated"):
        assert all(r.status == "ok" for r in report1.by_lemma(name)), name
    assert report1.by_lemma("level_total")[0].observed == "36"


def test_full_word_step_is_b_not_b_plus_one(report1):
    # at ell = a h + (a+1) c the single-word chain for i = 0 has just ended,
    # so the step is b_n, one less than the claimed b_n + 1
    row = report1.by_lemma("full_word")[0]
    assert (row.ell, row.predicted, row.observed) == (9, "4", "3")
    forms = LevelForms(d1(), 1)
    words = level_decomposition(d1(), 9).words(1)
    assert set(words) == forms.predicted(9)
    assert len(forms.chains[0]) == 8
    assert words == ("011011011", "101010101", "101110111")


def test_literal_total_reading_differs(report1):
    row = report1.by_lemma("taper_total_full_p")[0]
    assert row.status == "differs"
    assert (row.predicted, row.observed) == ("16", "121")


def test_ramp_example(report1):
    row = [r for r in report1.by_lemma("ramp") if r.ell == 2][0]
    assert row.observed == "1" and row.status == "ok"


@pytest.mark.slow
def test_counting_lemmas_level_two():
    rep = verify_counting_lemmas(d1(), 2)
    assert not rep.exact                     # lengths past 20 use the minimal continuation
    assert {(r.lemma, r.ell) for r in rep.failures} == {("full_word", 250)}
    assert rep.by_lemma("level_total")[0].observed == str(793 - 37)


def test_insufficient_depth_without_extension():
    with pytest.raises(InsufficientDepth):
        verify_counting_lemmas(d1(), 1, allow_extension=False)
    with pytest.raises(InsufficientDepth):
        complexity_table(d1(), 20)


def test_rank_one_table_has_no_level_columns():
    t = complexity_table(chacon(), 8)
    assert t.ok
    assert [r.p for r in t.rows] == [2] + [2 * q - 1 for q in range(2, 9)]


def test_ratio_curve_rows():
    rows = ratio_curve(d1(), lambda q: 1, [3, 19, 264])
    assert rows[0] == type(rows[0])(3, "exact", Fraction(5, 3))
    assert rows[2].kind == "bound"
    assert rows[2].value == Fraction(pbound(d1(), 264), 264)


def test_csv_headers(table, report1):
    assert complexity_csv(table).splitlines()[0].startswith("q,p,delta_p,rs_count,p1,")
    assert complexity_csv(table).splitlines()[0].endswith(",alpha,beta,bound")
    assert lemma_csv([report1]).splitlines()[0] == "lemma,n,ell,predicted,observed,status"

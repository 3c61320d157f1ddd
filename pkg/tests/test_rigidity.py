import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quasistair.complexity import right_special
from quasistair.recipe import chacon, d1
from quasistair.rigidity import (
    NoWitness,
    RigidityConstants,
    border_array,
    build_rauzy,
    check_commuting_powers,
    check_period_divisibility,
    check_root_transfer,
    constant_K,
    constants_report,
    fibonacci_word,
    find_constants,
    has_period,
    is_root,
    path_decomposition,
    period_analysis,
    primitive_root,
    rigidity_csv,
    rigidity_witness_search,
    sci,
    sweep_commuting_powers,
    sweep_period_divisibility,
    sweep_root_transfer,
)
from quasistair.symbolic import enumerate_language, word_language

import chacon_oracle

binary = st.text(alphabet="01", min_size=1, max_size=24)


def brute_period(w):
    return next(p for p in range(1, len(w) + 1) if all(w[i] == w[i + p] for i in range(len(w) - p)))


def test_period_examples():
    pa = period_analysis("0100101")
    assert pa.period == 5 and pa.root == "00101"
    assert period_analysis("1111").root == "1"
    assert border_array("aabaaab") == [0, 1, 0, 1, 2, 2, 3]


def test_border_period_exhaustive_16():
    for n in range(1, 17):
        for bits in itertools.product("01", repeat=n):
            w = "".join(bits)
            assert period_analysis(w).period == brute_period(w)


@given(binary)
def test_minimal_root_is_shortest_root(w):
    pa = period_analysis(w)
    roots = [len(w) - k for k in range(len(w)) if is_root(w[k:], w)]
    assert min(roots) == pa.period
    assert w.endswith(pa.root)


def test_root_definition():
    assert is_root("01", "1010101")
    assert not is_root("10", "1010101")
    assert not is_root("0110", "011")


def test_string_lemma_sweeps_small():
    assert sweep_root_transfer(8).ok
    assert sweep_commuting_powers(10).ok
    assert sweep_period_divisibility(12).ok


def test_string_lemma_premises():
    with pytest.raises(ValueError):
        check_root_transfer("0", "1", "1")
    with pytest.raises(ValueError):
        check_commuting_powers("01", "10")
    cr = check_commuting_powers("0101", "01")
    assert (cr.root, cr.t, cr.s) == ("01", 2, 1)
    assert check_period_divisibility("010010010").passed


@given(st.text(alphabet="01", min_size=1, max_size=6), st.integers(1, 4), st.integers(1, 4))
def test_commuting_powers_property(v, t, s):
    cr = check_commuting_powers(v * t, v * s)
    assert cr.root == primitive_root(v)


@given(binary, st.integers(1, 12))
def test_has_period_matches_definition(w, p):
    assert has_period(w, p) == all(w[i] == w[i + p] for i in range(len(w) - p))


# ---------------------------------------------------------------- Rauzy graphs

@pytest.fixture(scope="module")
def fib():
    return fibonacci_word(10_000)


def test_fibonacci_prefix():
    assert fibonacci_word(13) == "0100101001001"


def test_fibonacci_graph_q2(fib):
    g = build_rauzy(word_language(fib, 2), word_language(fib, 3))
    assert g.vertices == ("00", "01", "10")
    assert g.right_special == ("10",)
    assert g.edge_count == 4


def test_fibonacci_decomposition_ell5(fib):
    g = build_rauzy(word_language(fib, 5), word_language(fib, 6))
    dec = path_decomposition(g, 5, 2)
    assert len(dec.right_special) == 1
    assert len(dec.labels) == 2
    assert dec.problems == ()
    for lab in dec.cycles:
        assert period_analysis(lab.start + lab.label).root == lab.label


def test_fibonacci_constants(fib):
    p = {q: len(word_language(fib, q)) for q in range(1, 32)}
    rc = find_constants(p, 30)
    assert (rc.k, rc.K, rc.C) == (2, 340, 680)
    assert rc.delta() == Fraction(1, 16 * 680**681)
    assert rc.delta_X() == rc.delta() ** 2 / 2


def test_k_one_constants():
    rc = RigidityConstants(1, (1,), constant_K(1), 2 * constant_K(1))
    assert (rc.K, rc.C) == (6, 12)
    assert rc.delta() == Fraction(1, 4 * 12**13)
    assert float(rc.delta()) == pytest.approx(10 ** rc.log10_delta, rel=1e-9)
    assert float(sci(rc.log10_delta)) == pytest.approx(float(rc.delta()), rel=1e-5)


def test_constants_report_lines(fib):
    p = {q: len(word_language(fib, q)) for q in range(1, 12)}
    text = constants_report(find_constants(p, 10))
    assert "delta=1/(16*680^681)" in text
    assert text.endswith("\n") and "\r" not in text


def test_superlinear_data_has_no_witness():
    p = {q: 2**q for q in range(1, 12)}
    with pytest.raises(NoWitness, match="no non-superlinear witness at this horizon"):
        find_constants(p, 10, k_cap=4)


def test_d1_rauzy_matches_complexity():
    r = d1()
    slices = {q: enumerate_language(r, q) for q in range(1, 17)}
    for q in range(1, 16):
        g = build_rauzy(slices[q], slices[q + 1])
        assert g.right_special == right_special(r, q)
        assert g.edge_count == len(slices[q + 1])
        assert not g.ambiguous


def test_d1_decomposition_at_admissible_lengths():
    r = d1()
    slices = {q: enumerate_language(r, q) for q in range(1, 21)}
    p = {q: len(s) for q, s in slices.items()}
    rc = find_constants(p, 19)
    assert rc.k == 6
    for ell in rc.ells:
        dec = path_decomposition(build_rauzy(slices[ell], slices[ell + 1]), ell, rc.k)
        assert dec.problems == ()
        assert all(lab.certified for lab in dec.cycles)


def test_rauzy_keeps_most_frequent_component():
    # two disjoint cycles 0^* and 1^*; frequency decides
    g = build_rauzy({"00", "11"}, {"000", "111"}, freq={"00": 1, "11": 5})
    assert g.vertices == ("11",) and g.ambiguous


# ---------------------------------------------------------------- witness search

def test_lag_zero_ratio_is_one():
    rows = rigidity_witness_search(chacon(), [0], 3, stage=6)
    assert rows[0].min_ratio == 1 == rows[0].avg_ratio


def test_witness_search_matches_brute_force():
    text = chacon_oracle.chacon_word(9)
    hs = chacon_oracle.heights(9)
    ts = [hs[n - 1] + 1 for n in range(3, 8)]
    rows = rigidity_witness_search(chacon(), ts, 2, stage=9)
    for t, row in zip(ts, rows):
        assert row.min_ratio == chacon_oracle.min_return_ratio(text, t, 2)


def test_word_source():
    fib = fibonacci_word(3000)
    rows = rigidity_witness_search(fib, [34, 55], 2)
    assert all(r.min_ratio > Fraction(9, 10) for r in rows)
    assert rigidity_csv(rows).splitlines()[0] == "t,L,min_ratio,avg_ratio,stage"


def test_chacon_floor_regression():
    hs = chacon().heights()
    rows = rigidity_witness_search(chacon(), [hs[n - 1] + 1 for n in range(3, 9)],
                                   chacon_oracle.CYL_LEN, stage=chacon_oracle.STAGE)
    assert rows[0].min_ratio == Fraction(127937, 265715)
    assert min(r.min_ratio for r in rows) >= chacon_oracle.R0

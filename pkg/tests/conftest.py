"""Shared oracles: naive expansions written independently of the package internals."""

import pytest

from quasistair.recipe import chacon, d1


def naive_block(cuts, spacers, n):
    """``B_n`` by direct concatenation from the raw cut/spacer lists."""
    word = "0"
    for k in range(n - 1):
        word = "".join(word + "1" * s for s in spacers[k][: cuts[k] + 1])
    return word


def naive_quasi_block(a, b, c, n):
    """``B_n`` straight from the quasi-staircase spacer formula."""
    word = "0"
    for k in range(n - 1):
        r = a[k] * b[k]
        word = "".join(word + "1" * (c[k] + t // a[k]) for t in range(r)) + word
    return word


def factors(text, q):
    return {text[i:i + q] for i in range(len(text) - q + 1)}


def brute_rs(words_next):
    """Right-special words from a slice of the next length."""
    return sorted({w[:-1] for w in words_next if w[:-1] + "0" in words_next and w[:-1] + "1" in words_next})


@pytest.fixture(scope="session")
def D1():
    return d1()


@pytest.fixture(scope="session")
def CH():
    return chacon()


@pytest.fixture(scope="session")
def d1_b4():
    r = d1()
    return naive_quasi_block(r.a, r.b, r.c, 4)

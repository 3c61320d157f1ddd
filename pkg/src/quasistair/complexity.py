"""Word complexity, right-special words and the level decomposition of quasi-staircase languages.

Right-special words containing a 0 are bucketed by their tail length ``z(w)``: ``w`` belongs
to level ``n`` when ``c_n <= z(w) < c_{n+1}``. ``p_n(q)`` counts level-``n`` words shorter
than ``q``. Everything here is brute force over enumerated language slices, and the
structural predictions are checked against it.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .recipe import QuasiStaircaseRecipe, derive_scales
from .symbolic import InsufficientDepth, enumerate_language, expand

INF = math.inf


def tail_length(w: str) -> float:
    """Length of the final run of 1s; ``inf`` for ``1^|w|`` and 0 for words ending in 0."""
    if not w:
        raise ValueError("empty word")
    k = w.rfind("0")
    return INF if k < 0 else len(w) - 1 - k


def _slices_by_truncation(recipe, q_top: int, allow_extension: bool):
    """``{q: L_q}`` for ``q = 1 .. q_top`` from the top slice (languages are right-extendable)."""
    top = enumerate_language(recipe, q_top, allow_extension=allow_extension)
    out = {q_top: frozenset(top.words)}
    for q in range(q_top - 1, 0, -1):
        out[q] = frozenset(w[:q] for w in out[q + 1])
    return out, top.exact


def right_special_from(longer: frozenset, q: int) -> tuple[str, ...]:
    """Right-special words of length ``q`` read off the slice of length ``q + 1``."""
    return tuple(sorted(w[:q] for w in longer if w[q] == "0" and w[:q] + "1" in longer))


def right_special(recipe, q: int, allow_extension: bool = False) -> tuple[str, ...]:
    """Sorted length-``q`` words ``w`` with both ``w0`` and ``w1`` in the language."""
    longer = frozenset(enumerate_language(recipe, q + 1, allow_extension).words)
    return right_special_from(longer, q)


# ---------------------------------------------------------------- level structure

def _c_sequence(recipe: QuasiStaircaseRecipe, z: int) -> QuasiStaircaseRecipe:
    """Recipe extended (minimally) until its ``c`` sequence passes ``z``."""
    work = recipe
    while work.c[-1] <= z:
        work = work.extended(work.depth + 1)
    return work


def level_of(recipe: QuasiStaircaseRecipe, w: str, allow_extension: bool = False,
             c: tuple[int, ...] | None = None) -> int | None:
    """Level ``n`` with ``c_n <= z(w) < c_{n+1}``; ``None`` for ``1^|w|``."""
    z = tail_length(w)
    if z == INF:
        return None
    if z >= recipe.next_spacer_floor() and not allow_extension:
        raise InsufficientDepth(f"insufficient depth: tail length {z} reaches c_depth + b_depth")
    if c is None or c[-1] <= z:
        c = _c_sequence(recipe, int(z)).c
    if z < c[0]:
        raise ValueError(f"right-special word {w!r} has tail length {z} below c_1 = {c[0]}")
    return bisect.bisect_right(c, z)


@dataclass(frozen=True)
class LevelDecomposition:
    q: int
    ones: tuple[str, ...]
    levels: dict = field(default_factory=dict)     # n -> sorted words of length q

    def words(self, n: int) -> tuple[str, ...]:
        return self.levels.get(n, ())


def level_decomposition(recipe, q: int, rs: tuple[str, ...] | None = None,
                        allow_extension: bool = False) -> LevelDecomposition:
    if rs is None:
        rs = right_special(recipe, q, allow_extension)
    ones, levels = [], {}
    c = _c_sequence(recipe, q).c
    for w in rs:
        n = level_of(recipe, w, allow_extension, c)
        if n is None:
            ones.append(w)
        else:
            levels.setdefault(n, []).append(w)
    return LevelDecomposition(q, tuple(ones), {n: tuple(ws) for n, ws in sorted(levels.items())})


class LevelForms:
    """The three families of level-``n`` right-special words, built from ``B_n``.

    chain ``i``: suffixes of ``1^{c+i-1} (B_n 1^{c+i})^a``, longer than ``c + i``;
    gap: suffixes of ``1^{c+b-1} B_n 1^c``, longer than ``h + 2c``;
    full: the single word ``1^c (B_n 1^c)^a``.
    """

    def __init__(self, recipe: QuasiStaircaseRecipe, n: int):
        self.n = n
        self.a, self.b, self.c = recipe.params(n)
        block = expand(recipe, n)
        self.h = len(block)
        a, b, c = self.a, self.b, self.c
        self.chains = [("1" * (c + i - 1)) + (block + "1" * (c + i)) * a for i in range(b)]
        self.gap = "1" * (c + b - 1) + block + "1" * c
        self.full = "1" * c + (block + "1" * c) * a

    @property
    def full_length(self) -> int:
        return self.a * self.h + (self.a + 1) * self.c

    def predicted(self, ell: int) -> set[str]:
        """Level-``n`` right-special words of length ``ell`` the three families produce."""
        out = set()
        for i, chain in enumerate(self.chains):
            if self.c + i < ell <= len(chain):
                out.add(chain[-ell:])
        if self.h + 2 * self.c < ell <= len(self.gap):
            out.add(self.gap[-ell:])
        if ell == len(self.full):
            out.add(self.full)
        return out

    def matches(self, w: str) -> list[str]:
        """Families ``w`` belongs to, with the length restrictions applied."""
        ell = len(w)
        tags = [f"chain{i}" for i, chain in enumerate(self.chains)
                if self.c + i < ell <= len(chain) and chain.endswith(w)]
        if self.h + 2 * self.c < ell <= len(self.gap) and self.gap.endswith(w):
            tags.append("gap")
        if w == self.full:
            tags.append("full")
        return tags

    def is_suffix_of_any(self, w: str) -> bool:
        """Unrestricted suffix test against all families (used for every right-special word)."""
        return w == self.full or self.gap.endswith(w) or any(ch.endswith(w) for ch in self.chains)


# ---------------------------------------------------------------- complexity table

@dataclass(frozen=True)
class ComplexityRow:
    q: int
    p: int
    delta_p: int
    rs_count: int
    levels: tuple[int, ...]          # p_1(q) .. p_L(q)
    alpha: int
    beta: int
    bound: int


@dataclass(frozen=True)
class ComplexityTable:
    rows: tuple[ComplexityRow, ...]
    exact: bool
    violations: tuple[str, ...]

    def p(self, q: int) -> int:
        if q == 0:
            return 1
        return self.rows[q - 1].p

    def row(self, q: int) -> ComplexityRow:
        return self.rows[q - 1]

    @property
    def ok(self) -> bool:
        return not self.violations


def alpha_beta(recipe: QuasiStaircaseRecipe, q: int) -> tuple[int, int]:
    """``alpha(q) = max{n : m_n <= q}`` (0 below ``m_1``) and ``beta(q) = min{n : q < c_{n+1}}``.

    Stages past the recipe are taken from the minimal continuation, which is only
    consulted when ``q`` reaches ``c_depth + b_depth``; callers labelling exactness check that.
    """
    work = _c_sequence(recipe, q)
    scales = derive_scales(work)
    alpha = max((n for n, m in enumerate(scales.m, start=1) if m <= q), default=0)
    if alpha == work.depth and q >= scales.h[-1]:
        raise InsufficientDepth(f"alpha({q}) is not determined by the recipe")
    beta = next(n for n in range(1, work.depth) if q < work.c[n])
    return alpha, beta


def pbound(recipe: QuasiStaircaseRecipe, q: int) -> int:
    """``q (2 + sum_{n=alpha}^{beta} b_n)`` with the sum starting at 1 when ``alpha = 0``."""
    alpha, beta = alpha_beta(recipe, q)
    work = _c_sequence(recipe, q)
    return q * (2 + sum(work.b[n - 1] for n in range(max(alpha, 1), beta + 1)))


def complexity_table(recipe, Q: int, allow_extension: bool = False,
                     independent: bool = True) -> ComplexityTable:
    """``p(q)`` for ``1 <= q <= Q`` with right-special counts and level complexities.

    ``p(q)`` comes from separately enumerated slices when ``independent`` is set, so the
    first-difference identity ``p(q+1) - p(q) = |RS(q)|`` is a real check rather than
    a consequence of truncation. Violations of any identity are listed, not raised.
    """
    slices, exact = _slices_by_truncation(recipe, Q + 1, allow_extension)
    if independent:
        p = {q: len(enumerate_language(recipe, q, allow_extension)) for q in range(1, Q + 2)}
    else:
        p = {q: len(slices[q]) for q in range(1, Q + 2)}
    quasi = isinstance(recipe, QuasiStaircaseRecipe)
    violations = []
    level_hist: dict[int, dict[int, int]] = {}   # n -> {length: count}
    rs_count = {}
    for q in range(1, Q + 1):
        rs = right_special_from(slices[q + 1], q)
        rs_count[q] = len(rs)
        if len(slices[q]) != p[q]:
            violations.append(f"q={q}: truncated slice has {len(slices[q])} words, direct {p[q]}")
        if p[q + 1] - p[q] != len(rs):
            violations.append(f"q={q}: p(q+1)-p(q)={p[q + 1] - p[q]} but |RS(q)|={len(rs)}")
        if quasi:
            dec = level_decomposition(recipe, q, rs, allow_extension)
            if dec.ones != ("1" * q,):
                violations.append(f"q={q}: all-ones family is {dec.ones}")
            for n, ws in dec.levels.items():
                level_hist.setdefault(n, {})[q] = len(ws)

    depth_levels = max(level_hist, default=0)
    rows = []
    for q in range(1, Q + 1):
        levels = tuple(sum(cnt for ell, cnt in level_hist.get(n, {}).items() if ell < q)
                       for n in range(1, depth_levels + 1))
        if quasi:
            alpha, beta = alpha_beta(recipe, q)
            bound = pbound(recipe, q)
            if p[q] != 1 + q + sum(levels):
                violations.append(f"q={q}: p(q)={p[q]} but 1+q+sum p_n = {1 + q + sum(levels)}")
            if p[q] > bound:
                violations.append(f"q={q}: p(q)={p[q]} exceeds bound {bound}")
            if alpha > beta:
                violations.append(f"q={q}: alpha={alpha} > beta={beta}")
        else:
            alpha = beta = bound = 0
        rows.append(ComplexityRow(q, p[q], p[q + 1] - p[q], rs_count[q], levels, alpha, beta, bound))
    return ComplexityTable(tuple(rows), exact, tuple(violations))


def level_complexity(recipe, n: int, q: int, allow_extension: bool = False) -> int:
    """``p_n(q)``: level-``n`` right-special words of length below ``q``."""
    if q <= 1:
        return 0
    slices, _ = _slices_by_truncation(recipe, q, allow_extension)
    total = 0
    for ell in range(1, q):
        rs = right_special_from(slices[ell + 1], ell)
        total += len(level_decomposition(recipe, ell, rs, allow_extension).words(n))
    return total


def twosuccs_failures(recipe: QuasiStaircaseRecipe, rs: tuple[str, ...],
                      allow_extension: bool = False) -> list[str]:
    """Right-special words with a 0 that are not a suffix of any family word at their level."""
    forms = {}
    bad = []
    for w in rs:
        n = level_of(recipe, w, allow_extension)
        if n is None:
            continue
        if n not in forms:
            forms[n] = LevelForms(recipe.extended(max(n, recipe.depth)), n)
        if not forms[n].is_suffix_of_any(w):
            bad.append(w)
    return bad


# ---------------------------------------------------------------- lemma verification

@dataclass(frozen=True)
class LemmaRow:
    lemma: str
    n: int
    ell: int
    predicted: str
    observed: str
    status: str      # ok | FAIL | differs | agrees

    @property
    def failed(self) -> bool:
        return self.status == "FAIL"


@dataclass(frozen=True)
class LemmaReport:
    n: int
    rows: tuple[LemmaRow, ...]
    exact: bool                     # False when the minimal continuation was needed
    complete: bool                  # False when the budget forced sampling
    witnesses: tuple[str, ...] = ()

    @property
    def failures(self) -> list[LemmaRow]:
        return [r for r in self.rows if r.failed]

    def by_lemma(self, name: str) -> list[LemmaRow]:
        return [r for r in self.rows if r.lemma == name]


def regimes(a: int, b: int, c: int, h: int, ell: int) -> list[tuple[str, int | None]]:
    """Named regimes containing ``ell`` with the single-step count they claim (``None``: bound only)."""
    full = a * h + (a + 1) * c
    m = a * h + (a + 1) * (c + b - 1)
    out = []
    if ell <= c:
        out.append(("empty", 0))
    if c < ell < c + b:
        out.append(("ramp", ell - c))
    if c + b <= ell <= h + 2 * c:
        out.append(("flat", b))
    if h + 2 * c < ell < h + 2 * c + b:
        out.append(("bump", b + 1))
    if h + 2 * c + b <= ell < full:
        out.append(("flat_upper", b))
    if ell == full:
        out.append(("full_word", b + 1))
    if full + 1 < ell < m:
        out.append(("taper", None))
    if ell >= m:
        out.append(("dead", 0))
    return out


def verify_counting_lemmas(recipe: QuasiStaircaseRecipe, n: int, budget: int = 5000,
                           allow_extension: bool = True, margin: int | None = None,
                           sample_step: int = 97) -> LemmaReport:
    """Compare brute-force level-``n`` first differences with every structural prediction.

    ``ell`` runs over ``1 .. m_n + margin`` (default margin ``b_n``). Beyond ``budget``
    only every ``sample_step``-th length is checked and the report is marked incomplete.
    """
    a, b, c = recipe.params(n)
    scales = derive_scales(recipe)
    h, m = scales.height(n), scales.post(n)
    h_next = scales.height(n + 1)
    margin = b if margin is None else margin
    top = m + margin
    complete = m <= budget
    exact = top + 1 <= recipe.next_spacer_floor()
    if not exact and not allow_extension:
        raise InsufficientDepth(f"insufficient depth: level {n} needs slices up to {top + 1}")
    slices, _ = _slices_by_truncation(recipe, top + 1, allow_extension=True)
    forms = LevelForms(recipe, n)
    full = forms.full_length

    def check_len(ell):
        return complete or ell <= c + b + 2 or ell % sample_step == 0 or abs(ell - full) <= 1 \
            or abs(ell - m) <= 1 or h + 2 * c <= ell <= h + 2 * c + b

    rows: list[LemmaRow] = []
    witnesses: list[str] = []
    delta: dict[int, int] = {}
    level_words: dict[int, tuple[str, ...]] = {}
    p_full: dict[int, int] = {q: len(slices[q]) for q in slices}
    for ell in range(1, top + 1):
        rs = right_special_from(slices[ell + 1], ell)
        words = level_decomposition(recipe, ell, rs, allow_extension=True).words(n)
        level_words[ell] = words
        delta[ell] = len(words)

    for ell in range(1, top + 1):
        if not check_len(ell):
            continue
        obs = delta[ell]
        for name, claim in regimes(a, b, c, h, ell):
            if claim is None:
                status = "ok" if obs <= b else "FAIL"
                rows.append(LemmaRow(name, n, ell, f"<={b}", str(obs), status))
            else:
                status = "ok" if obs == claim else "FAIL"
                rows.append(LemmaRow(name, n, ell, str(claim), str(obs), status))
            if status == "FAIL":
                witnesses.append(f"{name} ell={ell}: " + " ".join(level_words[ell]))
        predicted = forms.predicted(ell)
        same = predicted == set(level_words[ell])
        rows.append(LemmaRow("exact_count", n, ell, str(len(predicted)), str(obs), "ok" if same else "FAIL"))
        if not same:
            witnesses.append(f"exact_count ell={ell}: missing {sorted(predicted - set(level_words[ell]))}"
                             f" extra {sorted(set(level_words[ell]) - predicted)}")
        unique = sum(1 for w in level_words[ell] if len(forms.matches(w)) == 1)
        rows.append(LemmaRow("forms", n, ell, str(obs), str(unique), "ok" if unique == obs else "FAIL"))

    def p_n(q):
        return sum(delta[ell] for ell in range(1, q))

    taper_claim = (a + 1) * b * (b - 1) // 2 + 1
    taper_obs = p_n(m) - p_n(full)
    rows.append(LemmaRow("taper_total", n, m, str(taper_claim), str(taper_obs),
                         "ok" if taper_obs == taper_claim else "FAIL"))
    literal = p_full[m] - p_full[full]
    rows.append(LemmaRow("taper_total_full_p", n, m, str(taper_claim), str(literal),
                         "agrees" if literal == taper_claim else "differs"))
    rows.append(LemmaRow("level_total", n, m, str(h_next - h), str(p_n(m)),
                         "ok" if p_n(m) == h_next - h else "FAIL"))
    for q in range(c, m):
        if not check_len(q):
            continue
        bound = (q - c + 1) * b
        rows.append(LemmaRow("level_bound", n, q, f"<={bound}", str(p_n(q)),
                             "ok" if p_n(q) <= bound else "FAIL"))
    for q in range(m, top + 1):
        rows.append(LemmaRow("level_saturated", n, q, str(h_next - h), str(p_n(q)),
                             "ok" if p_n(q) == h_next - h else "FAIL"))
    rows.sort(key=lambda r: (r.ell, r.lemma))
    return LemmaReport(n, tuple(rows), exact, complete, tuple(witnesses))


# ---------------------------------------------------------------- ratio curve

@dataclass(frozen=True)
class RatioRow:
    q: int
    kind: str          # exact | bound
    value: Fraction


def ratio_curve(recipe: QuasiStaircaseRecipe, f, qs, exact_limit: int | None = None) -> list[RatioRow]:
    """``p(q) / (q f(q))`` where ``p`` is enumerable, else the bound ``(2 + sum b_n) / f(q)``."""
    limit = recipe.next_spacer_floor() if exact_limit is None else min(exact_limit, recipe.next_spacer_floor())
    rows = []
    for q in sorted(set(qs)):
        fq = f(q)
        if q <= limit:
            p = len(enumerate_language(recipe, q))
            rows.append(RatioRow(q, "exact", Fraction(p, q * fq)))
        else:
            rows.append(RatioRow(q, "bound", Fraction(pbound(recipe, q), q * fq)))
    return rows


# ---------------------------------------------------------------- CSV

def complexity_csv(table: ComplexityTable) -> str:
    width = max((len(r.levels) for r in table.rows), default=0)
    head = ["q", "p", "delta_p", "rs_count"] + [f"p{n}" for n in range(1, width + 1)] + ["alpha", "beta", "bound"]
    lines = [",".join(head)]
    for r in table.rows:
        levels = list(r.levels) + [0] * (width - len(r.levels))
        lines.append(",".join(str(x) for x in [r.q, r.p, r.delta_p, r.rs_count, *levels, r.alpha, r.beta, r.bound]))
    return "\n".join(lines) + "\n"


def lemma_csv(reports) -> str:
    lines = ["lemma,n,ell,predicted,observed,status"]
    for rep in reports:
        for r in rep.rows:
            lines.append(f"{r.lemma},{r.n},{r.ell},{r.predicted},{r.observed},{r.status}")
    return "\n".join(lines) + "\n"

"""Symbolic words ``B_n``, windowed materialization, language slices and word frequencies.

``B_1 = 0`` and ``B_{n+1} = prod_i B_n 1^{s_{n,i}}``. Heights explode quickly, so nothing
here expands ``B_n`` unless asked to: windows are extracted by descending the block
layout, languages are built from the junction windows ``suffix(B_n) 1^s prefix(B_n)``
and occurrence counts follow the same recursion.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .recipe import QuasiStaircaseRecipe

DEFAULT_BUDGET = 10**7
_CACHE_LIMIT = 1 << 16


class InsufficientDepth(ValueError):
    """The recipe's horizon does not determine the requested object."""


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SymbolicWord:
    """Lazy ``B_n``: ``bases[k-1][i]`` is where copy ``i`` of ``B_k`` starts inside ``B_{k+1}``.

    ``bases[k-1]`` has ``r_k + 2`` entries; the last one is ``h_{k+1}``.
    """

    recipe: object
    stage: int
    heights: tuple[int, ...]
    bases: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return self.heights[self.stage - 1]

    def __len__(self) -> int:
        return self.length


def build_symbolic(recipe, n: int) -> SymbolicWord:
    if not 1 <= n <= recipe.depth + 1:
        raise InsufficientDepth(f"stage {n} outside 1..{recipe.depth + 1}")
    heights = [1]
    bases = []
    for k in range(1, n):
        h = heights[-1]
        row = recipe.spacer_row(k)
        offs = [0]
        for s in row:
            offs.append(offs[-1] + h + s)
        bases.append(tuple(offs))
        heights.append(offs[-1])
    return SymbolicWord(recipe, n, tuple(heights), tuple(bases))


class _Expander:
    """Recursive window extraction with a cache of small fully expanded ``B_k``."""

    def __init__(self, word: SymbolicWord):
        self.word = word
        self.cache = {1: "0"}

    def full(self, k: int) -> str:
        if k not in self.cache:
            h = self.word.heights[k - 1]
            if h > _CACHE_LIMIT:
                return self.window(k, 0, h)
            prev = self.full(k - 1)
            row = self.word.recipe.spacer_row(k - 1)
            self.cache[k] = "".join(prev + "1" * s for s in row)
        return self.cache[k]

    def window(self, k: int, lo: int, hi: int) -> str:
        if lo >= hi:
            return ""
        if k in self.cache or self.word.heights[k - 1] <= _CACHE_LIMIT:
            return self.full(k)[lo:hi]
        h = self.word.heights[k - 2]
        offs = self.word.bases[k - 2]
        out = []
        i = bisect.bisect_right(offs, lo) - 1
        while i < len(offs) - 1 and offs[i] < hi:
            start = offs[i]
            copy_lo, copy_hi = max(lo, start), min(hi, start + h)
            if copy_lo < copy_hi:
                out.append(self.window(k - 1, copy_lo - start, copy_hi - start))
            run_lo, run_hi = max(lo, start + h), min(hi, offs[i + 1])
            if run_lo < run_hi:
                out.append("1" * (run_hi - run_lo))
            i += 1
        return "".join(out)


def materialize(word: SymbolicWord, i: int, j: int, budget: int = DEFAULT_BUDGET) -> str:
    """The slice ``B_n[i:j]`` without expanding the rest of ``B_n``."""
    if not 0 <= i <= j <= word.length:
        raise IndexError(f"window [{i}, {j}) outside [0, {word.length}]")
    if j - i > budget:
        raise BudgetExceeded(f"window of {j - i} symbols exceeds budget {budget}")
    return _Expander(word).window(word.stage, i, j)


def expand(recipe, n: int, budget: int = DEFAULT_BUDGET) -> str:
    word = build_symbolic(recipe, n)
    return materialize(word, 0, word.length, budget)


def to_array(recipe, n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``B_n`` as a ``uint8`` array, built stage by stage."""
    word = build_symbolic(recipe, n)
    if word.length > budget:
        raise BudgetExceeded(f"h_{n} = {word.length} exceeds budget {budget}")
    cur = np.zeros(1, dtype=np.uint8)
    for k in range(1, n):
        offs = word.bases[k - 1]
        nxt = np.ones(offs[-1], dtype=np.uint8)
        h = cur.size
        for start in offs[:-1]:
            nxt[start:start + h] = cur
        cur = nxt
    return cur


# ---------------------------------------------------------------- languages

def _windows(s: str, q: int) -> set[str]:
    return {s[i:i + q] for i in range(len(s) - q + 1)}


def _tail(s: str, k: int) -> str:
    return s[len(s) - k:] if k else ""


def _language_stages(recipe, q: int, last: int):
    """Yield ``(n, L_q(B_n))`` for ``n = 1 .. last``.

    Runs of 1s are capped at ``q`` (a length-``q`` window cannot tell longer runs apart).
    Once ``h_n >= q - 1`` only the prefix/suffix of length ``q - 1`` and the distinct
    capped spacer values matter.
    """
    full = "0"
    lang = _windows(full, q)
    yield 1, frozenset(lang)
    pre = suf = None
    seen: set[tuple[str, int]] = set()
    for k in range(1, last):
        row = recipe.spacer_row(k)
        if pre is None:
            full = "".join(full + "1" * min(s, q) for s in row)
            lang = _windows(full, q)
            if len(full) >= q - 1:
                pre, suf = full[:q - 1], _tail(full, q - 1)
        else:
            for s in sorted({min(s, q) for s in row[:-1]}):
                if (suf, s) not in seen:
                    seen.add((suf, s))
                    lang |= _windows(suf + "1" * s + pre, q)
            closing = suf + "1" * min(row[-1], q)
            lang |= _windows(closing, q)
            suf = _tail(closing, q - 1)
        yield k + 1, frozenset(lang)


@dataclass(frozen=True)
class LanguageSlice:
    """Sorted length-``q`` words of the language with the stage that produced them.

    ``certificate_stage`` is the later stage whose slice was recomputed and found equal.
    ``exact`` is False only when the set depends on a continuation of the recipe
    beyond its given depth (see :func:`enumerate_language`).
    """

    q: int
    words: tuple[str, ...]
    stage: int
    certificate_stage: int
    exact: bool = True

    def __len__(self):
        return len(self.words)

    def __contains__(self, w):
        return w in self._set

    @property
    def _set(self):
        s = self.__dict__.get("_members")
        if s is None:
            s = frozenset(self.words)
            object.__setattr__(self, "_members", s)
        return s


def enumerate_language(recipe, q: int, allow_extension: bool = False) -> LanguageSlice:
    """All words of length ``q`` in the language of the subshift.

    Quasi-staircase: with ``N* = min{n : c_n >= q}`` the slice is read off ``B_{N*+2}`` and
    certified against ``B_{N*+3}``. Stages past the recipe's depth are filled with the
    minimal legal continuation; for ``q <= c_depth + b_depth`` every legal continuation
    gives the same slice, so the result is exact. Larger ``q`` needs ``allow_extension``
    and is marked ``exact=False``.

    General rank-one recipes: the slice of ``B_{depth+1}`` certified against ``B_depth``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if isinstance(recipe, QuasiStaircaseRecipe):
        exact = q <= recipe.next_spacer_floor()
        if not exact and not allow_extension:
            raise InsufficientDepth(
                f"insufficient depth: q={q} exceeds c_depth + b_depth = {recipe.next_spacer_floor()}"
            )
        work = recipe
        while work.c[-1] < q:
            work = work.extended(work.depth + 1)
        n_star = next(n for n in range(1, work.depth + 1) if work.c[n - 1] >= q)
        stage, cert = n_star + 2, n_star + 3
        work = work.extended(max(work.depth, cert - 1))
        slices = dict(_language_stages(work, q, cert))
        if slices[stage] != slices[cert]:
            raise InsufficientDepth(f"fixpoint certificate failed for q={q} at stage {stage}")
        return LanguageSlice(q, tuple(sorted(slices[stage])), stage, cert, exact)

    last = recipe.depth + 1
    slices = dict(_language_stages(recipe, q, last))
    if last < 2 or slices[last] != slices[last - 1]:
        raise InsufficientDepth(f"insufficient depth: slice for q={q} still growing at stage {last}")
    stage = min(n for n in slices if slices[n] == slices[last])
    return LanguageSlice(q, tuple(sorted(slices[last])), stage, last)


def word_language(text: str, q: int) -> LanguageSlice:
    """Length-``q`` factors of a finite word (used for external subshifts)."""
    return LanguageSlice(q, tuple(sorted(_windows(text, q))), 0, 0)


def write_language(slice_: LanguageSlice) -> str:
    return f"q={slice_.q} stage={slice_.stage}\n" + "".join(w + "\n" for w in slice_.words)


# ---------------------------------------------------------------- counting

def count_in(text: str, w: str) -> int:
    """Overlapping occurrences of ``w`` in ``text``."""
    return sum(1 for _ in re.finditer(f"(?={re.escape(w)})", text))


def _count_runs_capped(runs: list[list], w: str) -> int:
    """Occurrences of ``w`` in a run-length encoded binary word, capping long runs."""
    L = len(w)
    cap = 2 * L
    text = "".join(ch * min(n, cap) for ch, n in runs)
    total = count_in(text, w)
    if w == w[0] * L:
        total += sum(n - cap for ch, n in runs if ch == w[0] and n > cap)
    return total


def count_occurrences(recipe, w: str, n: int) -> int:
    """Number of positions ``j`` with ``B_n[j:j+|w|] = w``, via the block recursion.

    ``count(B_{k+1}) = (r_k + 1) count(B_k) + occurrences in the junction windows``;
    junctions are ``suffix(B_k) 1^s prefix(B_k)`` of width ``|w| - 1`` on each side.
    """
    word = build_symbolic(recipe, n)
    ex = _Expander(word)
    L = len(w)
    memo: dict[int, int] = {}

    def runs_of(k: int) -> list[list]:
        out: list[list] = []
        for ch in ex.full(k):
            if out and out[-1][0] == ch:
                out[-1][1] += 1
            else:
                out.append([ch, 1])
        return out

    def count(k: int) -> int:
        if k in memo:
            return memo[k]
        h = word.heights[k - 1]
        if h <= _CACHE_LIMIT:
            memo[k] = count_in(ex.full(k), w)
            return memo[k]
        hp = word.heights[k - 2]
        row = recipe.spacer_row(k - 1)
        if hp >= L - 1:
            pre = ex.window(k - 1, 0, L - 1)
            suf = ex.window(k - 1, hp - (L - 1), hp)
            total = len(row) * count(k - 1)
            for i, s in enumerate(row):
                tail = pre if i < len(row) - 1 else ""
                runs = [[ch, 1] for ch in suf]
                runs.append(["1", s])
                runs.extend([ch, 1] for ch in tail)
                merged: list[list] = []
                for ch, m in runs:
                    if m == 0:
                        continue
                    if merged and merged[-1][0] == ch:
                        merged[-1][1] += m
                    else:
                        merged.append([ch, m])
                total += _count_runs_capped(merged, w)
        else:
            base = runs_of(k - 1)
            runs: list[list] = []
            for s in row:
                for ch, m in base + [["1", s]]:
                    if m == 0:
                        continue
                    if runs and runs[-1][0] == ch:
                        runs[-1][1] += m
                    else:
                        runs.append([ch, m])
            total = _count_runs_capped(runs, w)
        memo[k] = total
        return total

    if L == 0:
        return word.length + 1
    if L > word.length:
        return 0
    return count(n)


@dataclass(frozen=True)
class EmpiricalEstimate:
    word: str
    stage: int
    count: int
    denominator: int
    value: Fraction


def empirical_cylinder(recipe, w: str, n: int) -> EmpiricalEstimate:
    """Frequency of ``w`` in ``B_n``: all occurrences over ``h_n - |w|``."""
    word = build_symbolic(recipe, n)
    if len(w) >= word.length:
        raise ValueError(f"|w| = {len(w)} is not shorter than h_{n} = {word.length}")
    cnt = count_occurrences(recipe, w, n)
    den = word.length - len(w)
    return EmpiricalEstimate(w, n, cnt, den, Fraction(cnt, den))


def match_mask(arr: np.ndarray, w: str) -> np.ndarray:
    """Boolean mask over start positions ``0 .. len(arr) - |w|`` where ``w`` occurs."""
    L = len(w)
    size = arr.size - L + 1
    if size <= 0:
        return np.zeros(0, dtype=bool)
    mask = np.ones(size, dtype=bool)
    for i, ch in enumerate(w):
        mask &= arr[i:i + size] == (1 if ch == "1" else 0)
    return mask


@dataclass(frozen=True)
class Correlation:
    u: str
    v: str
    lag: int
    stage: int
    count: int
    denominator: int
    joint: Fraction
    product: Fraction

    @property
    def discrepancy(self) -> Fraction:
        return self.joint - self.product


def correlation(recipe, u: str, v: str, t: int, n: int, budget: int = DEFAULT_BUDGET,
                arr: np.ndarray | None = None) -> Correlation:
    """Joint frequency of ``u`` at ``j`` and ``v`` at ``j + t`` inside ``B_n``.

    The count runs over every ``j`` where both windows fit; the denominator is
    ``h_n - |u| - t - |v| + 1``. ``product`` multiplies the two single-word frequencies.
    """
    if arr is None:
        arr = to_array(recipe, n, budget)
    h = arr.size
    den = h - len(u) - t - len(v) + 1
    if t < 0 or den <= 0:
        raise ValueError(f"window |u| + t + |v| = {len(u) + t + len(v)} exceeds h_{n} = {h}")
    cnt = joint_count(arr, u, v, t)
    fu = Fraction(int(match_mask(arr, u).sum()), h - len(u))
    fv = Fraction(int(match_mask(arr, v).sum()), h - len(v))
    return Correlation(u, v, t, n, cnt, den, Fraction(cnt, den), fu * fv)


def joint_count(arr: np.ndarray, u: str, v: str, t: int) -> int:
    span = max(len(u), t + len(v))
    size = arr.size - span + 1
    if size <= 0:
        return 0
    mu = match_mask(arr, u)[:size]
    mv = match_mask(arr, v)[t:t + size]
    return int(np.count_nonzero(mu & mv))

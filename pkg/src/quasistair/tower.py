"""Exact cutting-and-stacking towers.

Only level indices are tracked. Level ``j`` of column ``C_n`` splits into sublevels
``I_{n,j}^{[i]}``, which become level ``base_n(i) + j`` of ``C_{n+1}`` where
``base_n(i) = i h_n + sum_{t<i} s_{n,t}``. Widths use ``mu(I_1) = 1``; normalized
measures divide by the mass of the top column ``C_M`` of the tower, so mass pushed
past the top is reported as an explicit error term.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import prod

import numpy as np

from .recipe import QuasiStaircaseRecipe
from .symbolic import DEFAULT_BUDGET, BudgetExceeded


class PreconditionError(ValueError):
    """Parameters outside the range where an identity is asserted."""


# ---------------------------------------------------------------- level sets

def _merge(runs) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for lo, hi in sorted(runs):
        if lo >= hi:
            continue
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


@dataclass(frozen=True)
class LevelSet:
    """Union of levels of ``C_stage`` stored as sorted half-open runs ``[lo, hi)``."""

    stage: int
    runs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "runs", _merge(self.runs))

    @classmethod
    def of(cls, stage: int, indices) -> LevelSet:
        return cls(stage, tuple((j, j + 1) for j in indices))

    @classmethod
    def level(cls, stage: int, j: int) -> LevelSet:
        return cls(stage, ((j, j + 1),))

    def __len__(self) -> int:
        return sum(hi - lo for lo, hi in self.runs)

    def indices(self) -> list[int]:
        return [j for lo, hi in self.runs for j in range(lo, hi)]

    def __or__(self, other: LevelSet) -> LevelSet:
        if other.stage != self.stage:
            raise ValueError("level sets live at different stages; refine first")
        return LevelSet(self.stage, self.runs + other.runs)

    def __and__(self, other: LevelSet) -> LevelSet:
        if other.stage != self.stage:
            raise ValueError("level sets live at different stages; refine first")
        out, i, k = [], 0, 0
        a, b = self.runs, other.runs
        while i < len(a) and k < len(b):
            lo, hi = max(a[i][0], b[k][0]), min(a[i][1], b[k][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[k][1]:
                i += 1
            else:
                k += 1
        return LevelSet(self.stage, tuple(out))

    def isdisjoint(self, other: LevelSet) -> bool:
        return len(self & other) == 0


# ---------------------------------------------------------------- tower

@dataclass(frozen=True)
class Tower:
    """Columns ``C_1 .. C_M``. ``bases[n-1]`` lists ``base_n(0..r_n)``."""

    recipe: object
    M: int
    heights: tuple[int, ...]
    bases: tuple[tuple[int, ...], ...]

    def height(self, n: int) -> int:
        return self.heights[n - 1]

    def cut(self, n: int) -> int:
        return self.recipe.cut(n)

    def width(self, n: int) -> Fraction:
        """``mu(I_n)`` with ``mu(I_1) = 1``."""
        return Fraction(1, prod(self.recipe.cut(k) + 1 for k in range(1, n)))

    def column_mass(self, n: int) -> Fraction:
        return self.height(n) * self.width(n)

    @property
    def total(self) -> Fraction:
        return self.column_mass(self.M)

    def base(self, n: int, i: int) -> int:
        return self.bases[n - 1][i]

    def column(self, n: int) -> LevelSet:
        return LevelSet(n, ((0, self.height(n)),))

    def sublevel(self, n: int, j: int, i: int) -> LevelSet:
        """``I_{n,j}^{[i]}`` as a level of ``C_{n+1}``."""
        if not 0 <= j < self.height(n):
            raise IndexError(f"level {j} outside C_{n}")
        return LevelSet.level(n + 1, self.base(n, i) + j)

    def spacer_levels(self, n: int) -> LevelSet:
        """Levels of ``C_{n+1}`` added as spacers when building it from ``C_n``."""
        h = self.height(n)
        offs = self.bases[n - 1]
        ends = list(offs[1:]) + [self.height(n + 1)]
        return LevelSet(n + 1, tuple((lo + h, hi) for lo, hi in zip(offs, ends)))

    def measure(self, ls: LevelSet) -> Fraction:
        """Normalized measure (``mu(C_M) = 1``)."""
        return len(ls) * self.width(ls.stage) / self.total


def build_tower(recipe, M: int, budget: int = DEFAULT_BUDGET) -> Tower:
    if not 1 <= M <= recipe.depth + 1:
        raise ValueError(f"stage {M} outside 1..{recipe.depth + 1}")
    heights = [1]
    bases = []
    for n in range(1, M):
        h = heights[-1]
        offs = [0]
        for s in recipe.spacer_row(n)[:-1]:
            offs.append(offs[-1] + h + s)
        bases.append(tuple(offs))
        heights.append(offs[-1] + h + recipe.spacer_row(n)[-1])
    if heights[-1] > budget:
        raise BudgetExceeded(f"h_{M} = {heights[-1]} exceeds the index budget {budget}")
    return Tower(recipe, M, tuple(heights), tuple(bases))


def refine(tower: Tower, ls: LevelSet, M: int | None = None) -> LevelSet:
    """The same set written as levels of ``C_M`` (default: the tower's top)."""
    M = tower.M if M is None else M
    if ls.stage > M:
        raise ValueError(f"cannot refine stage {ls.stage} down to {M}")
    runs = ls.runs
    for n in range(ls.stage, M):
        runs = tuple((b + lo, b + hi) for b in tower.bases[n - 1] for lo, hi in runs)
    return LevelSet(M, runs)


@dataclass(frozen=True)
class Shifted:
    levels: LevelSet
    unresolved: int                 # levels pushed outside C_M
    unresolved_mass: Fraction       # normalized


def apply_T(tower: Tower, ls: LevelSet, t: int) -> Shifted:
    """``T^t`` on a union of levels, resolved inside ``C_M``."""
    ls = refine(tower, ls)
    h = tower.height(tower.M)
    kept, lost = [], 0
    for lo, hi in ls.runs:
        lo, hi = lo + t, hi + t
        clo, chi = max(lo, 0), min(hi, h)
        if clo < chi:
            kept.append((clo, chi))
            lost += (hi - lo) - (chi - clo)
        else:
            lost += hi - lo
    mass = lost * tower.width(tower.M) / tower.total
    return Shifted(LevelSet(tower.M, tuple(kept)), lost, mass)


@dataclass(frozen=True)
class DiscrepancyResult:
    value: Fraction
    unresolved: Fraction = Fraction(0)


def discrepancy(tower: Tower, A: LevelSet, B: LevelSet, unresolved: Fraction = Fraction(0)) -> DiscrepancyResult:
    """``lambda_B(A) = mu(A & B) - mu(A) mu(B)`` with the tower's normalization."""
    stage = max(A.stage, B.stage)
    A, B = refine(tower, A, stage), refine(tower, B, stage)
    mu = tower.measure
    return DiscrepancyResult(mu(A & B) - mu(A) * mu(B), unresolved)


# ---------------------------------------------------------------- shift identities

@dataclass(frozen=True)
class IdentityCheck:
    passed: bool
    shift: int
    source: tuple[int, int, int]     # (n, j, subcolumn)
    target: tuple[int, int, int]
    unresolved: int


def _require(cond: bool, msg: str):
    if not cond:
        raise PreconditionError(msg)


def _compare(tower: Tower, n: int, j: int, u: int, t: int, j2: int, u2: int) -> IdentityCheck:
    _require(tower.M >= n + 1, f"tower top {tower.M} must be at least n + 1 = {n + 1}")
    image = apply_T(tower, tower.sublevel(n, j, u), t)
    expected = refine(tower, tower.sublevel(n, j2, u2))
    ok = image.unresolved == 0 and image.levels == expected
    return IdentityCheck(ok, t, (n, j, u), (n, j2, u2), image.unresolved)


def _quasi(tower: Tower) -> QuasiStaircaseRecipe:
    if not isinstance(tower.recipe, QuasiStaircaseRecipe):
        raise TypeError("shift identities need a quasi-staircase recipe")
    return tower.recipe


def verify_identity_hn(tower: Tower, n: int, k: int, ell: int, i: int, j: int) -> IdentityCheck:
    """``T^{k(h+c)} I_{n,j}^{[ell a + i]} = I_{n,j-k ell}^{[ell a + i + k]}``."""
    a, b, c = _quasi(tower).params(n)
    h = tower.height(n)
    _require(0 <= ell < b and k >= 0 and i >= 0 and i + k <= a, "need 0 <= ell < b, i, k >= 0, i + k <= a")
    _require(k * ell <= j < h, f"need k*ell <= j < h_n, got j={j}")
    return _compare(tower, n, j, ell * a + i, k * (h + c), j - k * ell, ell * a + i + k)


def mixtrick2_offset(a: int, x: int, q: int, ell: int, i: int) -> int:
    return a * x * (x - 1) // 2 + q * x + i * x + ell * (x * a + q)


def verify_identity_mixtrick2(tower: Tower, n: int, x: int, q: int, ell: int, i: int, j: int) -> IdentityCheck:
    """Shift by ``(x a + q)(h + c)`` of a sublevel in the first ``a - q`` positions of its block."""
    a, b, c = _quasi(tower).params(n)
    h = tower.height(n)
    _require(0 <= x < b and 0 <= q < a, "need 0 <= x < b and 0 <= q < a")
    _require(0 <= ell < b - x and 0 <= i < a - q, "need 0 <= ell < b - x and 0 <= i < a - q")
    off = mixtrick2_offset(a, x, q, ell, i)
    _require(off <= j < h, f"need {off} <= j < h_n, got j={j}")
    return _compare(tower, n, j, ell * a + i, (x * a + q) * (h + c), j - off, (ell + x) * a + i + q)


def mixtrick3_stated_bound(a: int, x: int, q: int, ell: int, i: int) -> int:
    return a * x * (x + 1) // 2 + q * (x + 1) + i * (x + 1) + ell * (x * a + 1)


def mixtrick3_offset(a: int, x: int, q: int, ell: int, i: int) -> int:
    return a * x * (x + 1) // 2 + (q + i - a) * (x + 1) + ell * (x * a + q)


def verify_identity_mixtrick3(tower: Tower, n: int, x: int, q: int, ell: int, i: int, j: int) -> IdentityCheck:
    """Shift by ``(x a + q)(h + c)`` of a sublevel in the last ``q`` positions of its block.

    Besides the stated lower bound on ``j``, the target level index must be nonnegative;
    the stated bound alone does not guarantee that (see :func:`mixtrick3_undefined_targets`).
    """
    a, b, c = _quasi(tower).params(n)
    h = tower.height(n)
    _require(0 <= x < b and 0 <= q < a, "need 0 <= x < b and 0 <= q < a")
    _require(0 <= ell < b - x - 1 and a - q <= i < a, "need 0 <= ell < b - x - 1 and a - q <= i < a")
    lo = mixtrick3_stated_bound(a, x, q, ell, i)
    _require(lo <= j < h, f"need {lo} <= j < h_n, got j={j}")
    off = mixtrick3_offset(a, x, q, ell, i)
    _require(j - off >= 0, f"target level {j - off} is negative")
    return _compare(tower, n, j, ell * a + i, (x * a + q) * (h + c), j - off, (ell + x) * a + i + q)


def mixtrick3_undefined_targets(recipe: QuasiStaircaseRecipe, n: int) -> list[tuple[int, int, int, int, int]]:
    """Tuples ``(x, q, ell, i, j)`` meeting the stated bound whose target index is negative."""
    a, b, _ = recipe.params(n)
    h = recipe.heights()[n - 1]
    out = []
    for x in range(b):
        for q in range(a):
            for ell in range(max(0, b - x - 1)):
                for i in range(a - q, a):
                    lo = mixtrick3_stated_bound(a, x, q, ell, i)
                    off = mixtrick3_offset(a, x, q, ell, i)
                    out.extend((x, q, ell, i, j) for j in range(lo, min(off, h)))
    return out


def hn_sweep(tower: Tower, n: int) -> list[IdentityCheck]:
    """Every legal ``(k, ell, i, j)`` at level ``n``."""
    a, b, _ = _quasi(tower).params(n)
    h = tower.height(n)
    return [verify_identity_hn(tower, n, k, ell, i, j)
            for k in range(a + 1) for i in range(a - k + 1) for ell in range(b)
            for j in range(k * ell, h)]


def mixtrick_tuples(recipe: QuasiStaircaseRecipe, n: int, which: int):
    """All legal ``(x, q, ell, i, j)`` for the second (``which=2``) or third identity."""
    a, b, _ = recipe.params(n)
    h = recipe.heights()[n - 1]
    for x in range(b):
        for q in range(a):
            if which == 2:
                for ell in range(b - x):
                    for i in range(a - q):
                        for j in range(mixtrick2_offset(a, x, q, ell, i), h):
                            yield x, q, ell, i, j
            else:
                for ell in range(max(0, b - x - 1)):
                    for i in range(a - q, a):
                        lo = max(mixtrick3_stated_bound(a, x, q, ell, i), mixtrick3_offset(a, x, q, ell, i))
                        for j in range(lo, h):
                            yield x, q, ell, i, j


def mixtrick_sweep(tower: Tower, n: int, which: int, samples: int | None = None,
                   seed: int = 0) -> list[IdentityCheck]:
    """Check the second or third identity on all legal tuples, or a seeded sample of them."""
    tuples = list(mixtrick_tuples(_quasi(tower), n, which))
    if samples is not None and samples < len(tuples):
        tuples = random.Random(seed).sample(tuples, samples)
    fn = verify_identity_mixtrick2 if which == 2 else verify_identity_mixtrick3
    return [fn(tower, n, *tup) for tup in tuples]


# ---------------------------------------------------------------- mixing sums

def _mask(tower: Tower, ls: LevelSet) -> np.ndarray:
    ls = refine(tower, ls)
    mask = np.zeros(tower.height(tower.M), dtype=bool)
    for lo, hi in ls.runs:
        mask[lo:hi] = True
    return mask


def _offsets(tower: Tower, n: int) -> np.ndarray:
    """Levels of ``C_M`` making up level 0 of ``C_n``."""
    offs = np.zeros(1, dtype=np.int64)
    for k in range(n, tower.M):
        offs = (np.asarray(tower.bases[k - 1], dtype=np.int64)[:, None] + offs[None, :]).ravel()
    return np.sort(offs)


@dataclass(frozen=True)
class MixingSum:
    n: int
    t: int
    value: Fraction
    error_bound: Fraction


def uniform_mixing_sum(tower: Tower, B: LevelSet, n: int, t: int, chunk: int = 1 << 22) -> MixingSum:
    """``sum_j |lambda_B(T^t I_{n,j})|`` over the levels of ``C_n``.

    Parts of ``T^t I_{n,j}`` leaving ``C_M`` are dropped from the sum and their mass
    added to ``error_bound`` (``|lambda_B| <= mu``).
    """
    if B.stage > n:
        raise ValueError("B must be a union of levels of a column C_N with N <= n")
    H = tower.height(tower.M)
    mask = _mask(tower, B)
    nb = int(mask.sum())
    offs = _offsets(tower, n)
    rows = max(1, chunk // offs.size)
    total_abs = 0
    lost = 0
    for start in range(0, tower.height(n), rows):
        js = np.arange(start, min(start + rows, tower.height(n)), dtype=np.int64)
        idx = js[:, None] + t + offs[None, :]
        valid = (idx >= 0) & (idx < H)
        hits = np.where(valid, mask[np.clip(idx, 0, H - 1)], False).sum(axis=1)
        sizes = valid.sum(axis=1)
        lost += int(offs.size * js.size - sizes.sum())
        num = hits.astype(object) * H - sizes.astype(object) * nb
        total_abs += sum(abs(int(v)) for v in num)
    return MixingSum(n, t, Fraction(total_abs, H * H), Fraction(lost, H))


def default_stage(recipe, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """``n + 2`` when ``h_{n+2}`` fits the budget, else ``n + 1``."""
    hs = recipe.heights()
    if n + 2 <= len(hs) and hs[n + 1] <= budget:
        return n + 2
    return n + 1


def mixing_curve(recipe: QuasiStaircaseRecipe, ns, B_stage: int = 2, B_level: int = 0,
                 k: int = 1, budget: int = DEFAULT_BUDGET) -> list[MixingSum]:
    """Sums at ``t = k(h_n + c_n)`` for ``B`` a single level of ``C_{B_stage}``."""
    out = []
    for n in ns:
        tower = build_tower(recipe, default_stage(recipe, n, budget), budget)
        t = k * (tower.height(n) + recipe.params(n)[2])
        out.append(uniform_mixing_sum(tower, LevelSet.level(B_stage, B_level), n, t))
    return out


# ---------------------------------------------------------------- finite measure

@dataclass(frozen=True)
class MeasureRow:
    n: int
    mu_C: Fraction
    mu_S: Fraction
    bound: Fraction | None
    ok: bool


def measure_growth(recipe, N: int) -> list[MeasureRow]:
    """``mu(C_n)`` and the spacer mass ``mu(S_n)`` added at stage ``n`` (``mu(I_1) = 1``)."""
    rows = []
    width = Fraction(1)
    hs = recipe.heights()
    for n in range(1, N + 1):
        mu_c = hs[n - 1] * width
        nxt = width / (recipe.cut(n) + 1)
        mu_s = sum(recipe.spacer_row(n)) * nxt
        bound, ok = None, True
        if isinstance(recipe, QuasiStaircaseRecipe):
            a, b, c = recipe.params(n)
            r = a * b
            closed = (c * r + Fraction(r * (b - 1), 2)) * nxt
            bound = Fraction(c + b, hs[n - 1]) * mu_c
            ok = closed == mu_s and mu_s <= bound
        if hs[n] * nxt != mu_c + mu_s:
            ok = False
        rows.append(MeasureRow(n, mu_c, mu_s, bound, ok))
        width = nxt
    return rows


# ---------------------------------------------------------------- CSV

def frac(x: Fraction | None) -> str:
    if x is None:
        return ""
    return f"{x.numerator}/{x.denominator}"


def mixing_curve_csv(rows: list[MixingSum], descriptor: str) -> str:
    lines = ["n,t,B_descriptor,sum,error_bound"]
    lines += [f"{r.n},{r.t},{descriptor},{frac(r.value)},{frac(r.error_bound)}" for r in rows]
    return "\n".join(lines) + "\n"


def measure_growth_csv(rows: list[MeasureRow]) -> str:
    lines = ["n,mu_C,mu_S,bound,ok"]
    lines += [f"{r.n},{frac(r.mu_C)},{frac(r.mu_S)},{frac(r.bound)},{str(r.ok).lower()}" for r in rows]
    return "\n".join(lines) + "\n"

"""Rank-one recipes: cut/spacer sequences, quasi-staircase parameters and derived scales.

Stages are 1-indexed throughout, matching the usual notation: ``recipe.cut(1)`` is
the number of cuts applied to the first column, ``B_1 = "0"`` has height 1 and the
recipe with ``depth`` stages determines ``B_1 .. B_{depth+1}``.
"""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence


class RecipeError(ValueError):
    """Raised when a recipe violates its structural constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"n={n}: {msg}" for n, msg in self.violations)
        super().__init__(f"invalid recipe: {lines}")


@dataclass(frozen=True)
class RankOneRecipe:
    """General rank-one recipe: ``cuts[n-1] = r_n`` and ``spacers[n-1] = (s_{n,0}, .., s_{n,r_n})``."""

    cuts: tuple[int, ...]
    spacers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple(int(r) for r in self.cuts))
        object.__setattr__(self, "spacers", tuple(tuple(int(s) for s in row) for row in self.spacers))
        violations = rank_one_violations(self)
        if violations:
            raise RecipeError(violations)

    @property
    def depth(self) -> int:
        return len(self.cuts)

    def cut(self, n: int) -> int:
        return self.cuts[n - 1]

    def spacer_row(self, n: int) -> tuple[int, ...]:
        return self.spacers[n - 1]

    def heights(self) -> tuple[int, ...]:
        """Heights ``h_1 .. h_{depth+1}``."""
        hs = [1]
        for n in range(1, self.depth + 1):
            hs.append((self.cut(n) + 1) * hs[-1] + sum(self.spacer_row(n)))
        return tuple(hs)

    def to_rank_one(self) -> RankOneRecipe:
        return self


def rank_one_violations(recipe: RankOneRecipe) -> list[tuple[int, str]]:
    out = []
    if not recipe.cuts:
        out.append((0, "empty cut sequence"))
    if len(recipe.spacers) != len(recipe.cuts):
        out.append((0, "cuts and spacers have different lengths"))
    for n, (r, row) in enumerate(zip(recipe.cuts, recipe.spacers), start=1):
        if r < 1:
            out.append((n, f"r_n = {r} < 1"))
        if len(row) != r + 1:
            out.append((n, f"spacer row has {len(row)} entries, expected r_n + 1 = {r + 1}"))
        if any(s < 0 for s in row):
            out.append((n, "negative spacer count"))
    return out


@dataclass(frozen=True)
class QuasiStaircaseRecipe:
    """Quasi-staircase parameters ``a_n, b_n, c_n`` for ``n = 1 .. depth``.

    ``d`` is carried along when the recipe was synthesized from a target function.
    Construction does not validate; call :func:`validate_recipe`.
    """

    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]
    d: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        if self.d is not None:
            object.__setattr__(self, "d", tuple(int(x) for x in self.d))

    @property
    def depth(self) -> int:
        return len(self.a)

    def params(self, n: int) -> tuple[int, int, int]:
        return self.a[n - 1], self.b[n - 1], self.c[n - 1]

    def cut(self, n: int) -> int:
        return self.a[n - 1] * self.b[n - 1]

    def spacer_row(self, n: int) -> tuple[int, ...]:
        a, b, c = self.params(n)
        return tuple(c + t // a for t in range(a * b)) + (0,)

    def heights(self) -> tuple[int, ...]:
        return derive_scales(self).h

    def to_rank_one(self) -> RankOneRecipe:
        return to_rank_one(self)

    def extended(self, depth: int) -> QuasiStaircaseRecipe:
        """Minimal legal continuation: ``a, b`` frozen at their last values, ``c_{n+1} = c_n + b_n``."""
        a, b, c = list(self.a), list(self.b), list(self.c)
        while len(a) < depth:
            c.append(c[-1] + b[-1])
            a.append(a[-1])
            b.append(b[-1])
        return QuasiStaircaseRecipe(a, b, c)

    def next_spacer_floor(self) -> int:
        """Smallest value any legal continuation can use for ``c_{depth+1}``."""
        return self.c[-1] + self.b[-1]


def recipe_violations(recipe: QuasiStaircaseRecipe) -> list[tuple[int, str]]:
    """All ``(n, constraint)`` pairs violated by ``recipe``; empty when valid."""
    a, b, c = recipe.a, recipe.b, recipe.c
    out: list[tuple[int, str]] = []
    if not (a and b and c):
        return [(0, "empty sequence")]
    if not len(a) == len(b) == len(c):
        return [(0, f"length mismatch a={len(a)} b={len(b)} c={len(c)}")]
    for name, seq in (("a", a), ("b", b), ("c", c)):
        for n, x in enumerate(seq, start=1):
            if x < 1:
                out.append((n, f"{name}_{n} = {x} is not positive"))
        for n in range(1, len(seq)):
            if seq[n] < seq[n - 1]:
                out.append((n + 1, f"{name} decreases: {name}_{n + 1} < {name}_{n}"))
    for n in range(1, len(c)):
        if c[n] < c[n - 1] + b[n - 1]:
            out.append((n, f"c_{n + 1} = {c[n]} < c_{n} + b_{n} = {c[n - 1] + b[n - 1]}"))
    return sorted(out)


def validate_recipe(recipe: QuasiStaircaseRecipe) -> QuasiStaircaseRecipe:
    violations = recipe_violations(recipe)
    if violations:
        raise RecipeError(violations)
    return recipe


@dataclass(frozen=True)
class DerivedScales:
    """Exact scales. ``h[0] = h_1`` .. ``h[depth] = h_{depth+1}``; ``m[0] = m_1`` .. ``m[depth-1]``."""

    h: tuple[int, ...]
    m: tuple[int, ...]
    r: tuple[int, ...]

    def height(self, n: int) -> int:
        return self.h[n - 1]

    def post(self, n: int) -> int:
        return self.m[n - 1]

    def post_below_next_height(self) -> list[tuple[int, bool]]:
        """``(n, m_n < h_{n+1})`` for each stage."""
        return [(n, self.m[n - 1] < self.h[n]) for n in range(1, len(self.m) + 1)]


def next_height(h: int, a: int, b: int, c: int) -> int:
    return (a * b + 1) * h + a * b * c + a * b * (b - 1) // 2


def post_productive(h: int, a: int, b: int, c: int) -> int:
    return a * h + (a + 1) * (c + b - 1)


def derive_scales(recipe: QuasiStaircaseRecipe) -> DerivedScales:
    h = [1]
    m = []
    for n in range(1, recipe.depth + 1):
        a, b, c = recipe.params(n)
        m.append(post_productive(h[-1], a, b, c))
        h.append(next_height(h[-1], a, b, c))
    return DerivedScales(tuple(h), tuple(m), tuple(a * b for a, b in zip(recipe.a, recipe.b)))


def to_rank_one(recipe: QuasiStaircaseRecipe) -> RankOneRecipe:
    n_range = range(1, recipe.depth + 1)
    return RankOneRecipe(
        cuts=tuple(recipe.cut(n) for n in n_range),
        spacers=tuple(recipe.spacer_row(n) for n in n_range),
    )


# ---------------------------------------------------------------- presets

def d1() -> QuasiStaircaseRecipe:
    """Small desk recipe with minimal legal ``c``; ``h_2 = 37``, ``h_3 = 793``."""
    return QuasiStaircaseRecipe(a=(4, 6, 8, 10, 12), b=(3, 3, 4, 4, 5), c=(1, 4, 7, 11, 15))


def staircase(depth: int = 8) -> RankOneRecipe:
    """Classical staircase: ``r_n = n`` and ``s_{n,i} = i``."""
    return RankOneRecipe(
        cuts=tuple(range(1, depth + 1)),
        spacers=tuple(tuple(range(n + 1)) for n in range(1, depth + 1)),
    )


def chacon(depth: int = 12) -> RankOneRecipe:
    """Chacon's transformation, ``B_{n+1} = B_n B_n 1 B_n``."""
    return RankOneRecipe(cuts=(2,) * depth, spacers=((0, 1, 0),) * depth)


PRESETS = {"d1": d1, "staircase": staircase, "chacon": chacon}


# ---------------------------------------------------------------- growth report

@dataclass(frozen=True)
class GrowthRow:
    n: int
    mixing_ratio: Fraction | None      # a_n b_n^2 / h_n (quasi-staircase only)
    spacer_ratio: Fraction | None      # (c_n + b_n) / h_n (quasi-staircase only)
    spacer_partial_sum: Fraction | None
    criterion_term: Fraction           # (1 / (r_n h_n)) sum_i s_{n,i}
    criterion_partial_sum: Fraction


def check_growth_conditions(recipe) -> list[GrowthRow]:
    """Finite-horizon values of the growth quantities controlling mixing and finite measure."""
    hs = recipe.heights()
    rows = []
    spacer_sum = Fraction(0)
    crit_sum = Fraction(0)
    quasi = isinstance(recipe, QuasiStaircaseRecipe)
    for n in range(1, recipe.depth + 1):
        h = hs[n - 1]
        term = Fraction(sum(recipe.spacer_row(n)), recipe.cut(n) * h)
        crit_sum += term
        mix = spacer = partial = None
        if quasi:
            a, b, c = recipe.params(n)
            mix = Fraction(a * b * b, h)
            spacer = Fraction(c + b, h)
            spacer_sum += spacer
            partial = spacer_sum
        rows.append(GrowthRow(n, mix, spacer, partial, term, crit_sum))
    return rows


def criterion_increments_nondecreasing(rows: Sequence[GrowthRow]) -> bool:
    """True when the finite-measure criterion terms do not shrink at the horizon (divergence-like)."""
    terms = [row.criterion_term for row in rows]
    return all(x <= y for x, y in zip(terms, terms[1:]))


def decimal_str(x: Fraction | None, digits: int = 12) -> str:
    """Decimal rendering of an exact rational (empty for ``None``)."""
    if x is None:
        return ""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def growth_csv(rows: Sequence[GrowthRow]) -> str:
    cols = ("mixing_ratio", "spacer_ratio", "spacer_partial_sum", "criterion_term", "criterion_partial_sum")
    head = ["n"] + [f"{c}{suffix}" for c in cols for suffix in ("", "_decimal")]
    lines = [",".join(head)]
    for row in rows:
        cells = [str(row.n)]
        for c in cols:
            x = getattr(row, c)
            cells += ["" if x is None else f"{x.numerator}/{x.denominator}", decimal_str(x)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- file format

def recipe_to_dict(recipe) -> dict:
    if isinstance(recipe, QuasiStaircaseRecipe):
        out = {"kind": "quasi_staircase", "a": list(recipe.a), "b": list(recipe.b), "c": list(recipe.c)}
        if recipe.d is not None:
            out["d"] = list(recipe.d)
    else:
        out = {"kind": "rank_one", "cuts": list(recipe.cuts), "spacers": [list(row) for row in recipe.spacers]}
    out["depth"] = recipe.depth
    return out


def recipe_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "quasi_staircase":
        recipe = QuasiStaircaseRecipe(data["a"], data["b"], data["c"], data.get("d"))
    elif kind == "rank_one":
        recipe = RankOneRecipe(data["cuts"], data["spacers"])
    else:
        raise ValueError(f"unknown recipe kind {kind!r}")
    if "depth" in data and data["depth"] != recipe.depth:
        raise ValueError(f"depth field {data['depth']} disagrees with sequence length {recipe.depth}")
    return recipe


def dumps_recipe(recipe) -> str:
    return json.dumps(recipe_to_dict(recipe), separators=(", ", ": ")) + "\n"


def loads_recipe(text: str):
    return recipe_from_dict(json.loads(text))

"""Target-driven synthesis of quasi-staircase parameters.

A target ``f`` is first regularized to a slowly growing ``g <= f`` (``g(q+2) - g(q) <= 1``),
then ``g`` drives the choice of ``b_n`` and of the lag ``d_n`` used to place ``c_n`` at
an earlier post-productive length.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .recipe import (
    QuasiStaircaseRecipe,
    derive_scales,
    next_height,
    post_productive,
    validate_recipe,
)


@dataclass(frozen=True)
class TargetFunction:
    """Positive integer values ``f(1) .. f(Q_max)``; ``values[q-1] = f(q)``."""

    values: tuple[int, ...]
    horizon_sensitive: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if any(v < 1 for v in self.values):
            raise ValueError("target values must be positive integers")

    @property
    def horizon(self) -> int:
        return len(self.values)

    def __call__(self, q: int) -> int:
        if not 1 <= q <= self.horizon:
            raise IndexError(f"q={q} outside [1, {self.horizon}]")
        return self.values[q - 1]

    @classmethod
    def from_callable(cls, f, horizon: int) -> TargetFunction:
        return cls(tuple(f(q) for q in range(1, horizon + 1)))


def read_target_csv(text: str) -> TargetFunction:
    """Parse a two-column ``q,f`` table; ``q`` must cover ``1 .. Q_max`` exactly once."""
    rows = list(csv.reader(io.StringIO(text)))
    if rows and rows[0] and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    table = {}
    for row in rows:
        if not row:
            continue
        q, f = int(row[0]), int(row[1])
        if q in table:
            raise ValueError(f"duplicate q={q}")
        table[q] = f
    horizon = max(table, default=0)
    if sorted(table) != list(range(1, horizon + 1)):
        raise ValueError("target table must list q = 1 .. Q_max without gaps")
    return TargetFunction(tuple(table[q] for q in range(1, horizon + 1)))


def suffix_minimum(f: TargetFunction) -> tuple[int, ...]:
    """``f*(q) = min_{q <= q' <= Q_max} f(q')`` on the finite horizon."""
    out = list(f.values)
    for i in range(len(out) - 2, -1, -1):
        out[i] = min(out[i], out[i + 1])
    return tuple(out)


def regularize_target(f: TargetFunction) -> TargetFunction:
    """Nondecreasing ``g <= f`` with ``g(1) = 1`` whose increments fire at most every other step.

    Rows where the suffix minimum is attained only at the last tabulated value are
    reported in ``horizon_sensitive``: more data could lower them.
    """
    Q = f.horizon
    if Q < 3:
        raise ValueError("target horizon must be at least 3")
    fstar = suffix_minimum(f)
    g = [0] * (Q + 1)          # 1-indexed scratch
    g[1] = 1
    for q in range(2, Q + 1):
        if q % 2 == 0:
            g[q] = g[q - 1]
        else:
            grew = fstar[q - 1] > fstar[q - 3]
            g[q] = g[q - 1] + (1 if grew else 0)
    last = f.values[-1]
    sensitive = frozenset(
        q for q in range(1, Q + 1)
        if fstar[q - 1] == last and min(f.values[q - 1:-1], default=last + 1) > last
    )
    return TargetFunction(tuple(g[1:]), sensitive)


def icbrt(x: int) -> int:
    """Largest ``k`` with ``k**3 <= x`` (exact for arbitrarily large ``x``)."""
    if x < 0:
        raise ValueError("negative argument")
    if x < 2:
        return x
    k = 1 << ((x.bit_length() + 2) // 3)
    while True:
        nk = (2 * k + x // (k * k)) // 3
        if nk >= k:
            break
        k = nk
    while k**3 > x:
        k -= 1
    while (k + 1) ** 3 <= x:
        k += 1
    return k


def synthesize_sequences(g: TargetFunction, depth: int) -> QuasiStaircaseRecipe:
    """Quasi-staircase parameters with ``b_n``, ``d_n`` growing like the cube root of ``g``.

    ``c_n`` jumps back to ``m_{n-d_n}`` whenever ``d`` stays flat and otherwise grows by
    the minimal legal step. Heights and post-productive lengths are updated in order.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth > g.horizon:
        raise ValueError(f"depth {depth} exceeds the target horizon {g.horizon}")
    if g(1) != 1:
        raise ValueError("target must satisfy g(1) = 1; run regularize_target first")

    d = [1 if n <= 2 else icbrt(g(n)) for n in range(1, depth + 1)]
    for n in range(1, depth):
        step = d[n] - d[n - 1]
        if step not in (0, 1):
            raise AssertionError(f"d_{n + 1} - d_{n} = {step} is not 0 or 1")
        if step == 1 and n >= 2 and d[n - 1] - d[n - 2] == 1:
            raise AssertionError(f"d increments at consecutive stages {n} and {n + 1}")
    b = [max(3, icbrt(g(n))) for n in range(1, depth + 1)]
    a = [2 * n + 2 for n in range(1, depth + 1)]

    c: list[int] = []
    h = [1]
    m: list[int] = []
    for n in range(1, depth + 1):
        if n == 1:
            c.append(1)
        elif d[n - 1] == d[n - 2]:
            c.append(m[n - d[n - 1] - 1])
        else:
            c.append(c[-1] + b[n - 2])
        m.append(post_productive(h[-1], a[n - 1], b[n - 1], c[-1]))
        h.append(next_height(h[-1], a[n - 1], b[n - 1], c[-1]))

    return validate_recipe(QuasiStaircaseRecipe(a, b, c, d))


def lag_window_violations(recipe: QuasiStaircaseRecipe) -> list[int]:
    """Stages ``n >= 2`` where ``m_{n-d_n} <= c_n <= m_{n-d_n} + b_{n-1}`` fails."""
    if recipe.d is None:
        raise ValueError("recipe carries no d-sequence")
    m = derive_scales(recipe).m
    bad = []
    for n in range(2, recipe.depth + 1):
        lo = m[n - recipe.d[n - 1] - 1]
        if not lo <= recipe.c[n - 1] <= lo + recipe.b[n - 2]:
            bad.append(n)
    return bad

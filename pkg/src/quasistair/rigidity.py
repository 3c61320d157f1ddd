"""Periods, roots, Rauzy graphs, the rigidity constants and an empirical self-correlation search.

A word ``v`` is a *root* of ``w`` when ``|v| <= |w|`` and ``w`` is the length-``|w|``
suffix of ``v v v ...`` (equivalently ``w`` ends with ``v`` and has period ``|v|``).
The minimal root is the suffix of length ``per(w)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from .symbolic import DEFAULT_BUDGET, to_array

# ---------------------------------------------------------------- periods and roots


def border_array(w: str) -> list[int]:
    """``border[i]`` = length of the longest proper border of ``w[:i+1]``."""
    out = [0] * len(w)
    k = 0
    for i in range(1, len(w)):
        while k and w[i] != w[k]:
            k = out[k - 1]
        if w[i] == w[k]:
            k += 1
        out[i] = k
    return out


@dataclass(frozen=True)
class PeriodAnalysis:
    word: str
    border: tuple[int, ...]
    period: int
    root: str


def period_analysis(w: str) -> PeriodAnalysis:
    if not w:
        raise ValueError("empty word")
    border = border_array(w)
    per = len(w) - border[-1]
    root = w[len(w) - per:]
    if not is_root(root, w):
        raise AssertionError(f"minimal root {root!r} fails the root check for {w!r}")
    return PeriodAnalysis(w, tuple(border), per, root)


def has_period(w: str, p: int) -> bool:
    return 0 < p and (p >= len(w) or w[p:] == w[:-p])


def is_root(v: str, w: str) -> bool:
    return 0 < len(v) <= len(w) and w.endswith(v) and has_period(w, len(v))


def primitive_root(w: str) -> str:
    """Shortest ``v`` with ``w = v^t``."""
    per = period_analysis(w).period
    return w[:per] if len(w) % per == 0 else w


@dataclass(frozen=True)
class StringCheck:
    passed: bool
    detail: str = ""


def check_root_transfer(u: str, w: str, v: str) -> StringCheck:
    """If ``uw = wv`` and ``|v| <= |w|`` then ``v`` is a root of ``w``."""
    if u + w != w + v or len(v) > len(w) or not v:
        raise ValueError("premise fails: need uw = wv with 0 < |v| <= |w|")
    ok = is_root(v, w)
    return StringCheck(ok, "" if ok else f"{v!r} is not a root of {w!r}")


@dataclass(frozen=True)
class CommonRoot:
    root: str
    t: int
    s: int


def check_commuting_powers(u: str, v: str) -> CommonRoot:
    """For commuting nonempty ``u, v`` return ``v0`` with ``u = v0^t`` and ``v = v0^s``."""
    if not u or not v or u + v != v + u:
        raise ValueError("premise fails: need nonempty u, v with uv = vu")
    v0 = primitive_root(u)
    t, s = len(u) // len(v0), len(v) // len(v0)
    if v0 * t != u or v0 * s != v:
        raise AssertionError(f"{u!r} and {v!r} commute but are not powers of {v0!r}")
    return CommonRoot(v0, t, s)


def check_period_divisibility(w: str) -> StringCheck:
    """Every period ``i <= |w|/2`` of ``w`` is a multiple of ``per(w)``."""
    per = period_analysis(w).period
    bad = [i for i in range(1, len(w) // 2 + 1) if has_period(w, i) and i % per]
    return StringCheck(not bad, "" if not bad else f"periods {bad} of {w!r} not multiples of {per}")


def binary_words(max_len: int, min_len: int = 1):
    for n in range(min_len, max_len + 1):
        for bits in itertools.product("01", repeat=n):
            yield "".join(bits)


@dataclass(frozen=True)
class SweepResult:
    checked: int
    counterexamples: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def sweep_root_transfer(max_w: int = 12) -> SweepResult:
    """All binary ``(u, w, v)`` with ``uw = wv``, ``1 <= |v| <= |w| <= max_w``.

    ``|u| = |v| = m`` forces ``u = w[:m]`` and ``v = (uw)[|w|:]``, so each ``(w, m)``
    yields at most one premise instance and the sweep is exhaustive.
    """
    checked, bad = 0, []
    for w in binary_words(max_w):
        for m in range(1, len(w) + 1):
            u = w[:m]
            v = (u + w)[len(w):]
            if u + w != w + v:
                continue
            checked += 1
            if not check_root_transfer(u, w, v).passed:
                bad.append((u, w, v))
    return SweepResult(checked, tuple(bad))


def sweep_commuting_powers(max_total: int = 16) -> SweepResult:
    checked, bad = 0, []
    for total in range(2, max_total + 1):
        for m in range(1, total):
            for bits in itertools.product("01", repeat=total):
                s = "".join(bits)
                u, v = s[:m], s[m:]
                if u + v != v + u:
                    continue
                checked += 1
                try:
                    check_commuting_powers(u, v)
                except AssertionError:
                    bad.append((u, v))
    return SweepResult(checked, tuple(bad))


def sweep_period_divisibility(max_len: int = 20) -> SweepResult:
    checked, bad = 0, []
    for w in binary_words(max_len):
        checked += 1
        if not check_period_divisibility(w).passed:
            bad.append(w)
    return SweepResult(checked, tuple(bad))


# ---------------------------------------------------------------- Rauzy graphs


@dataclass(frozen=True)
class RauzyGraph:
    q: int
    vertices: tuple[str, ...]                 # retained component, sorted
    out: dict = field(default_factory=dict)   # vertex -> sorted ((label, target), ...)
    all_vertices: int = 0
    all_edges: int = 0
    components: int = 1                       # nontrivial strongly connected components seen
    ambiguous: bool = False

    @property
    def right_special(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if len(self.out[v]) > 1)

    def outdeg(self, v: str) -> int:
        return len(self.out[v])

    @property
    def edge_count(self) -> int:
        return sum(len(e) for e in self.out.values())


def build_rauzy(words_q, words_q1, freq: dict | None = None) -> RauzyGraph:
    """Rauzy graph ``G_q`` from the slices of length ``q`` and ``q + 1``.

    When several nontrivial strongly connected components exist, the one containing the
    most frequent vertex (per ``freq``; largest component otherwise) is kept and the
    graph is flagged ``ambiguous``.
    """
    words_q, words_q1 = set(getattr(words_q, "words", words_q)), set(getattr(words_q1, "words", words_q1))
    if not words_q:
        raise ValueError("empty language slice")
    q = len(next(iter(words_q)))
    g = nx.DiGraph()
    g.add_nodes_from(words_q)
    for e in words_q1:
        if e[:-1] not in words_q or e[1:] not in words_q:
            raise ValueError(f"slices are inconsistent at {e!r}")
        g.add_edge(e[:-1], e[1:], label=e[-1])
    comps = [c for c in nx.strongly_connected_components(g)
             if len(c) > 1 or any(g.has_edge(v, v) for v in c)]
    if not comps:
        raise ValueError("no strongly connected component with a cycle")
    if len(comps) == 1:
        keep = comps[0]
    elif freq:
        top = max(words_q, key=lambda w: (freq.get(w, 0), w))
        keep = next((c for c in comps if top in c), max(comps, key=len))
    else:
        keep = max(comps, key=lambda c: (len(c), min(c)))
    sub = g.subgraph(keep)
    out = {v: tuple(sorted((sub.edges[v, t]["label"], t) for t in sub.successors(v))) for v in sorted(keep)}
    return RauzyGraph(q, tuple(sorted(keep)), out, len(words_q), len(words_q1), len(comps), len(comps) > 1)


@dataclass(frozen=True)
class Segment:
    start: str
    end: str
    label: str


@dataclass(frozen=True)
class PathLabel:
    kind: str            # good | cycle
    start: str
    end: str
    label: str
    segments: int
    root_length: int
    disjointness: int    # the c_{n,j} value
    certified: bool      # cycles: label is the minimal root of start + label


@dataclass(frozen=True)
class RauzyDecomposition:
    ell: int
    k: int
    right_special: tuple[str, ...]
    segments: tuple[Segment, ...]
    labels: tuple[PathLabel, ...]
    problems: tuple[str, ...]

    @property
    def good(self):
        return [lab for lab in self.labels if lab.kind == "good"]

    @property
    def cycles(self):
        return [lab for lab in self.labels if lab.kind == "cycle"]


def rs_segments(graph: RauzyGraph) -> list[Segment]:
    """Paths from a right-special vertex to the next one, one per outgoing edge."""
    rs = set(graph.right_special)
    out = []
    for v in graph.right_special:
        for label, nxt in graph.out[v]:
            word = [label]
            cur = nxt
            steps = 0
            while cur not in rs:
                ((label, cur),) = graph.out[cur]
                word.append(label)
                steps += 1
                if steps > len(graph.vertices):
                    raise ValueError("walk does not reach a right-special vertex")
            out.append(Segment(v, cur, "".join(word)))
    return sorted(out, key=lambda s: (s.start, s.label))


def path_decomposition(graph: RauzyGraph, ell: int, k: int, p_ell: int | None = None,
                       p_next: int | None = None) -> RauzyDecomposition:
    """Segments between right-special vertices and the good / short-cycle concatenations.

    Good: simple concatenations (no repeated right-special vertex except a closing one)
    with total length in ``[3 ell / 2, k ell]``. Cycle: simple closed concatenations shorter
    than ``3 ell / 2``. The checks that must hold are collected in ``problems``.
    """
    if graph.q != ell:
        raise ValueError(f"graph is built at q={graph.q}, not {ell}")
    rs = graph.right_special
    problems = []
    if not rs:
        problems.append("no right-special vertex: the retained component is a single cycle")
    segs = rs_segments(graph)
    by_start: dict[str, list[Segment]] = {}
    for s in segs:
        by_start.setdefault(s.start, []).append(s)

    covered = set()
    for s in segs:
        cur = s.start
        for ch in s.label:
            nxt = cur[1:] + ch
            covered.add((cur, nxt))
            cur = nxt
    edges = {(v, t) for v in graph.vertices for _, t in graph.out[v]}
    if covered != edges:
        problems.append(f"{len(edges - covered)} edges not covered by segments")

    p_ell = len(graph.vertices) if p_ell is None else p_ell
    p_next = graph.edge_count if p_next is None else p_next
    excess = sum(graph.outdeg(v) - 1 for v in rs)
    if excess != p_next - p_ell:
        problems.append(f"sum(outdeg - 1) = {excess} but p(ell+1) - p(ell) = {p_next - p_ell}")
    if len(rs) > k:
        problems.append(f"{len(rs)} right-special vertices exceed k = {k}")
    if len(segs) > 2 * k:
        problems.append(f"{len(segs)} segments exceed 2k = {2 * k}")

    labels: list[PathLabel] = []
    lo, hi = Fraction(3 * ell, 2), k * ell

    def emit(start, end, word, nseg):
        n = len(word)
        if end == start and n < lo:
            pa = period_analysis(start + word)
            certified = pa.root == word
            c = min(n, (ell + n) // 2) if 2 * n > ell else n
            labels.append(PathLabel("cycle", start, end, word, nseg, pa.period, c, certified))
        elif lo <= n <= hi:
            per = period_analysis(word).period
            labels.append(PathLabel("good", start, end, word, nseg, per, min(per, n // 2), True))

    def walk(start, cur, word, seen, nseg):
        for s in by_start.get(cur, []):
            w2 = word + s.label
            if s.end == start:
                emit(start, start, w2, nseg + 1)
                continue
            if s.end in seen:
                continue
            emit(start, s.end, w2, nseg + 1)
            if len(w2) < hi:
                walk(start, s.end, w2, seen | {s.end}, nseg + 1)

    for v in rs:
        walk(v, v, "", {v}, 0)

    labels.sort(key=lambda lab: (lab.kind, lab.start, lab.label))
    K = constant_K(k)
    if len(labels) > 2 * K:
        problems.append(f"{len(labels)} labels exceed 2K = {2 * K}")
    for s in segs:
        if len(s.label) > p_ell:
            problems.append(f"segment of length {len(s.label)} exceeds p(ell) = {p_ell}")
    for lab in labels:
        if lab.kind == "cycle" and not lab.certified:
            problems.append(f"cycle label {lab.label!r} is not the minimal root of its base word")
        if lab.kind == "good" and 2 * lab.root_length < ell:
            problems.append(f"good label with minimal root shorter than ell/2: {lab.label!r}")
    return RauzyDecomposition(ell, k, rs, tuple(segs), tuple(labels), tuple(problems))


# ---------------------------------------------------------------- constants


def constant_K(k: int) -> int:
    return sum((2 * k) ** t for t in range(1, 2 * k + 1))


class NoWitness(ValueError):
    """No non-superlinear witness at this horizon."""


@dataclass(frozen=True)
class RigidityConstants:
    k: int
    ells: tuple[int, ...]
    K: int
    C: int

    @property
    def log10_delta(self) -> float:
        return -(math.log10(4 * self.k ** 2) + (self.C + 1) * math.log10(self.C))

    @property
    def log10_delta_X(self) -> float:
        return 2 * self.log10_delta - math.log10(2)

    def delta(self) -> Fraction:
        """``1 / (4 k^2 C^(C+1))`` exactly (large for k >= 3)."""
        return Fraction(1, 4 * self.k ** 2 * self.C ** (self.C + 1))

    def delta_X(self) -> Fraction:
        return self.delta() ** 2 / 2

    def delta_expr(self) -> str:
        return f"1/({4 * self.k ** 2}*{self.C}^{self.C + 1})"

    def delta_X_expr(self) -> str:
        return f"1/(2*({4 * self.k ** 2}*{self.C}^{self.C + 1})^2)"


def find_constants(p, Q: int, fraction: Fraction = Fraction(1, 4), k_cap: int = 64) -> RigidityConstants:
    """Smallest ``k`` with at least ``ceil(fraction * Q)`` lengths ``ell <= Q`` such that
    ``p(ell+1) - p(ell) <= k`` and ``p(ell) <= k ell``.

    ``p`` maps ``q -> p(q)`` for ``1 <= q <= Q + 1``.
    """
    need = math.ceil(fraction * Q)
    for k in range(1, k_cap + 1):
        ells = tuple(ell for ell in range(1, Q + 1) if p[ell + 1] - p[ell] <= k and p[ell] <= k * ell)
        if len(ells) >= need:
            K = constant_K(k)
            return RigidityConstants(k, ells, K, 2 * K)
    raise NoWitness(f"no non-superlinear witness at this horizon (k <= {k_cap}, Q = {Q})")


def sci(log10_value: float, digits: int = 6) -> str:
    """Render ``10**log10_value`` in scientific notation without forming the number."""
    exp = math.floor(log10_value)
    mant = 10 ** (log10_value - exp)
    if round(mant, digits - 1) >= 10:
        mant, exp = mant / 10, exp + 1
    return f"{mant:.{digits - 1}f}e{exp}"


def constants_report(rc: RigidityConstants) -> str:
    lines = [
        f"k={rc.k}",
        f"K={rc.K}",
        f"C={rc.C}",
        f"delta={rc.delta_expr()}",
        f"delta_decimal={sci(rc.log10_delta)}",
        f"delta_X={rc.delta_X_expr()}",
        f"delta_X_decimal={sci(rc.log10_delta_X)}",
        "ells=" + " ".join(str(x) for x in rc.ells),
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- word sources


def fibonacci_word(length: int) -> str:
    """Prefix of the fixed point of ``0 -> 01, 1 -> 0``."""
    a, b = "0", "01"
    while len(b) < length:
        a, b = b, b + a
    return b[:length]


def word_array(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def source_array(source, stage: int | None = None, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    if isinstance(source, np.ndarray):
        return source
    if isinstance(source, str):
        return word_array(source)
    if stage is None:
        raise ValueError("a recipe source needs a stage")
    return to_array(source, stage, budget)


def window_codes(arr: np.ndarray, L: int) -> np.ndarray:
    """Integer code of every length-``L`` window (most significant bit first)."""
    if L > 62:
        raise ValueError("cylinder length too large for integer codes")
    n = arr.size - L + 1
    codes = np.zeros(n, dtype=np.int64)
    for i in range(L):
        codes = (codes << 1) | arr[i:i + n].astype(np.int64)
    return codes


@dataclass(frozen=True)
class WitnessRow:
    t: int
    L: int
    min_ratio: Fraction
    avg_ratio: Fraction
    stage: int
    argmin: str


def self_correlation_ratios(codes: np.ndarray, t: int, L: int) -> dict[int, Fraction]:
    """``#{j : A at j and at j+t} / #{j : A at j}`` over ``j`` where both windows fit."""
    n = codes.size - t
    if n <= 0:
        raise ValueError(f"lag {t} leaves no room in a word of length {codes.size + L - 1}")
    head = codes[:n]
    counts = np.bincount(head, minlength=1 << L)
    joint = np.bincount(head[head == codes[t:t + n]], minlength=1 << L)
    return {int(a): Fraction(int(joint[a]), int(counts[a])) for a in np.nonzero(counts)[0]}


def rigidity_witness_search(source, ts, L: int, stage: int | None = None,
                            budget: int = DEFAULT_BUDGET) -> list[WitnessRow]:
    """Worst and average return ratio ``mu(A & T^-t A) / mu(A)`` over cylinders of length ``L``."""
    arr = source_array(source, stage, budget)
    codes = window_codes(arr, L)
    rows = []
    for t in ts:
        ratios = self_correlation_ratios(codes, t, L)
        worst = min(ratios, key=lambda a: (ratios[a], a))
        avg = sum(ratios.values(), Fraction(0)) / len(ratios)
        rows.append(WitnessRow(t, L, ratios[worst], avg, stage or 0, format(worst, f"0{L}b")))
    return rows


def rigidity_csv(rows: list[WitnessRow]) -> str:
    lines = ["t,L,min_ratio,avg_ratio,stage"]
    lines += [f"{r.t},{r.L},{r.min_ratio.numerator}/{r.min_ratio.denominator},"
              f"{r.avg_ratio.numerator}/{r.avg_ratio.denominator},{r.stage}" for r in rows]
    return "\n".join(lines) + "\n"

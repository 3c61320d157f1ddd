"""Command-line entry point: ``quasistair <subcommand> ...``.

Exit codes: 0 when every verified property holds, 1 when one fails (witnesses go to the
report and stderr), 2 for usage, input or budget problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import complexity as cx
from . import rigidity as rg
from . import tower as tw
from .recipe import (
    PRESETS,
    QuasiStaircaseRecipe,
    RecipeError,
    check_growth_conditions,
    derive_scales,
    dumps_recipe,
    growth_csv,
    loads_recipe,
    rank_one_violations,
    recipe_violations,
)
from .symbolic import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    InsufficientDepth,
    enumerate_language,
    word_language,
    write_language,
)
from .synthesis import lag_window_violations, read_target_csv, regularize_target, synthesize_sequences

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _note(msg: str):
    print(msg, file=sys.stderr)


def _frac(x) -> str:
    return tw.frac(x)


def load_source(args):
    """The recipe named by ``--recipe`` or ``--preset``."""
    if getattr(args, "recipe", None) and getattr(args, "preset", None):
        raise UsageError("give either --recipe or --preset, not both")
    if getattr(args, "preset", None):
        return PRESETS[args.preset]()
    if not getattr(args, "recipe", None):
        raise UsageError("a recipe is required (--recipe FILE or --preset NAME)")
    try:
        text = Path(args.recipe).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.recipe}: {exc}") from exc
    return loads_recipe(text)


def _quasi(recipe, what: str) -> QuasiStaircaseRecipe:
    if not isinstance(recipe, QuasiStaircaseRecipe):
        raise UsageError(f"{what} needs a quasi-staircase recipe")
    return recipe


def _read_word(path: str) -> str:
    try:
        text = "".join(Path(path).read_text(encoding="utf-8").split())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not text or set(text) - {"0", "1"}:
        raise UsageError("word file must contain a nonempty binary word")
    return text


# ---------------------------------------------------------------- subcommands

def cmd_validate(args) -> int:
    try:
        recipe = load_source(args)
    except RecipeError as exc:
        for n, msg in exc.violations:
            print(f"n={n}: {msg}")
        return FAILED
    bad = recipe_violations(recipe) if isinstance(recipe, QuasiStaircaseRecipe) else rank_one_violations(recipe)
    for n, msg in bad:
        print(f"n={n}: {msg}")
    if isinstance(recipe, QuasiStaircaseRecipe) and recipe.d is not None and not bad:
        for n in lag_window_violations(recipe):
            print(f"n={n}: c_n outside the lag window")
            bad.append((n, "lag window"))
    if not bad:
        print(f"valid recipe, depth {recipe.depth}")
    return FAILED if bad else OK


def cmd_scales(args) -> int:
    recipe = load_source(args)
    lines = []
    if isinstance(recipe, QuasiStaircaseRecipe):
        validate_or_raise(recipe)
        s = derive_scales(recipe)
        lines.append("n,h,m,r")
        lines += [f"{n},{s.height(n)},{s.post(n)},{recipe.cut(n)}" for n in range(1, recipe.depth + 1)]
        lines.append(f"{recipe.depth + 1},{s.height(recipe.depth + 1)},,")
    else:
        hs = recipe.heights()
        lines.append("n,h,r")
        lines += [f"{n},{hs[n - 1]},{recipe.cut(n)}" for n in range(1, recipe.depth + 1)]
        lines.append(f"{recipe.depth + 1},{hs[-1]},")
    growth = growth_csv(check_growth_conditions(recipe))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out_dir:
        _write(Path(args.out_dir), "scales.csv", text)
        _write(Path(args.out_dir), "growth.csv", growth)
    return OK


def validate_or_raise(recipe):
    bad = recipe_violations(recipe)
    if bad:
        raise RecipeError(bad)


def cmd_synth(args) -> int:
    try:
        target = read_target_csv(Path(args.target).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {args.target}: {exc}") from exc
    g = regularize_target(target)
    recipe = synthesize_sequences(g, args.depth)
    if g.horizon_sensitive:
        _note("horizon-sensitive rows (more data could lower g): "
              + " ".join(str(q) for q in sorted(g.horizon_sensitive)))
    text = dumps_recipe(recipe)
    sys.stdout.write(text)
    out_dir = Path(args.out_dir or ".")
    _write(out_dir, "recipe.json", text)
    _write(out_dir, "g.csv", "q,g\n" + "".join(f"{q},{g(q)}\n" for q in range(1, g.horizon + 1)))
    for name in ("b", "d"):
        seq = getattr(recipe, name)
        if seq[-1] == seq[0]:
            _note(f"{name}_n is constant ({seq[0]}) on this horizon; the asymptotic complexity ratio is not claimed")
    bad = lag_window_violations(recipe)
    for n in bad:
        _note(f"lag window fails at n={n}")
    return FAILED if bad else OK


def cmd_language(args) -> int:
    if args.max_q is None:
        raise UsageError("--max-q is required")
    if args.word_file:
        slice_ = word_language(_read_word(args.word_file), args.max_q)
    else:
        recipe = load_source(args)
        slice_ = enumerate_language(recipe, args.max_q, allow_extension=args.allow_extension)
        if not slice_.exact:
            _note(f"q={args.max_q} lies past c_depth + b_depth; slice uses the minimal continuation")
    text = write_language(slice_)
    if args.out_dir:
        _write(Path(args.out_dir), f"language_{args.max_q}.txt", text)
        _write(Path(args.out_dir), "words.txt", "".join(w + "\n" for w in slice_.words))
    else:
        sys.stdout.write(text)
    return OK


def _word_complexity_csv(text: str, Q: int) -> str:
    slices = {q: word_language(text, q).words for q in range(1, Q + 2)}
    lines = ["q,p,delta_p,rs_count"]
    for q in range(1, Q + 1):
        rs = cx.right_special_from(frozenset(slices[q + 1]), q)
        lines.append(f"{q},{len(slices[q])},{len(slices[q + 1]) - len(slices[q])},{len(rs)}")
    return "\n".join(lines) + "\n"


def cmd_complexity(args) -> int:
    if args.max_q is None:
        raise UsageError("--max-q is required")
    out_dir = Path(args.out_dir or ".")
    if args.word_file:
        _write(out_dir, "complexity.csv", _word_complexity_csv(_read_word(args.word_file), args.max_q))
        return OK
    recipe = load_source(args)
    if isinstance(recipe, QuasiStaircaseRecipe):
        validate_or_raise(recipe)
        limit = recipe.next_spacer_floor()
        if args.max_q + 1 > limit:
            _note(f"q above {limit} uses the minimal continuation (a, b frozen, c_(n+1) = c_n + b_n); "
                  "those rows are not exact for other continuations")
    table = cx.complexity_table(recipe, args.max_q, allow_extension=True)
    _write(out_dir, "complexity.csv", cx.complexity_csv(table))
    failed = not table.ok
    for v in table.violations:
        _note(v)
    if isinstance(recipe, QuasiStaircaseRecipe):
        scales = derive_scales(recipe)
        ns = args.n or [n for n in range(1, recipe.depth + 1) if scales.post(n) <= args.budget_lemma]
        reports = [cx.verify_counting_lemmas(recipe, n, budget=args.budget_lemma) for n in ns]
        _write(out_dir, "lemma_report.csv", cx.lemma_csv(reports))
        for rep in reports:
            if not rep.exact:
                _note(f"level {rep.n}: lengths past c_depth + b_depth use the minimal continuation")
            if not rep.complete:
                _note(f"level {rep.n}: m_n above the lemma budget, lengths were sampled")
            for w in rep.witnesses:
                _note(f"level {rep.n}: {w}")
            failed = failed or bool(rep.failures)
    print(f"p({args.max_q}) = {table.p(args.max_q)}; {len(table.violations)} table violations")
    return FAILED if failed else OK


def cmd_tower_verify(args) -> int:
    recipe = _quasi(load_source(args), "tower-verify")
    validate_or_raise(recipe)
    ns = args.n or [2]
    M = args.stage or max(ns) + 2
    tower = tw.build_tower(recipe, M, args.budget_symbols)
    lines = ["identity,n,tuples,failures,unresolved"]
    failed = False
    for n in ns:
        if n + 1 > M:
            raise UsageError(f"--stage must exceed n = {n}")
        sweeps = [("hn", tw.hn_sweep(tower, n)),
                  ("mixtrick2", tw.mixtrick_sweep(tower, n, 2, args.samples, args.seed)),
                  ("mixtrick3", tw.mixtrick_sweep(tower, n, 3, args.samples, args.seed))]
        for name, checks in sweeps:
            bad = [c for c in checks if not c.passed]
            unresolved = sum(1 for c in checks if c.unresolved)
            lines.append(f"{name},{n},{len(checks)},{len(bad)},{unresolved}")
            for c in bad[:5]:
                _note(f"{name} n={n}: shift {c.shift} maps {c.source} onto {c.target}")
            failed = failed or bool(bad) or bool(unresolved)
        undefined = tw.mixtrick3_undefined_targets(recipe, n)
        if undefined:
            _note(f"n={n}: {len(undefined)} tuples meet the stated third-identity bound but have a "
                  f"negative target level, e.g. (x, q, ell, i, j) = {undefined[0]}")
    rows = tw.measure_growth(recipe, min(recipe.depth, M))
    _write(Path(args.out_dir or "."), "tower_verify.csv", "\n".join(lines) + "\n")
    _write(Path(args.out_dir or "."), "measure_growth.csv", tw.measure_growth_csv(rows))
    failed = failed or not all(r.ok for r in rows)
    sys.stdout.write("\n".join(lines) + "\n")
    return FAILED if failed else OK


def cmd_mix(args) -> int:
    recipe = _quasi(load_source(args), "mix")
    validate_or_raise(recipe)
    ns = args.n or [2, 3, 4]
    rows = tw.mixing_curve(recipe, ns, B_stage=args.b_stage, B_level=args.b_level, budget=args.budget_symbols)
    out_dir = Path(args.out_dir or ".")
    _write(out_dir, "mixing_curve.csv", tw.mixing_curve_csv(rows, f"C{args.b_stage}:{args.b_level}"))
    for r in rows:
        print(f"n={r.n} t={r.t} sum={float(r.value):.6f} error<={float(r.error_bound):.6f}")
    if args.t:
        from .symbolic import correlation, to_array

        stage = args.stage or min(recipe.depth + 1, max(ns) + 1)
        arr = to_array(recipe, stage, args.budget_symbols)
        words = [w for L in range(1, args.cyl_len + 1) for w in enumerate_language(recipe, L).words]
        lines = ["u,v,t,stage,joint,product,discrepancy"]
        for t in args.t:
            for u in words:
                for v in words:
                    c = correlation(recipe, u, v, t, stage, args.budget_symbols, arr=arr)
                    lines.append(f"{u},{v},{t},{stage},{_frac(c.joint)},{_frac(c.product)},{_frac(c.discrepancy)}")
        _write(out_dir, "correlation.csv", "\n".join(lines) + "\n")
    return OK


def _decomposition_csv(slices, rc, limit: int) -> tuple[str, list[str]]:
    lines = ["ell,right_special,segments,good,cycles,problems"]
    problems = []
    for ell in rc.ells:
        if ell > limit:
            break
        graph = rg.build_rauzy(slices[ell], slices[ell + 1])
        dec = rg.path_decomposition(graph, ell, rc.k, len(slices[ell]), len(slices[ell + 1]))
        if graph.ambiguous:
            problems.append(f"ell={ell}: {graph.components} candidate components, kept the most frequent")
        problems += [f"ell={ell}: {p}" for p in dec.problems]
        lines.append(f"{ell},{len(dec.right_special)},{len(dec.segments)},{len(dec.good)},"
                     f"{len(dec.cycles)},{len(dec.problems)}")
    return "\n".join(lines) + "\n", problems


def cmd_rigidity(args) -> int:
    out_dir = Path(args.out_dir or ".")
    L = args.cyl_len
    if args.word_file:
        text = _read_word(args.word_file)
        Q = args.max_q or 30
        slices = {q: word_language(text, q).words for q in range(1, Q + 2)}
        source, stage = text, 0
        ts = args.t or []
    else:
        recipe = load_source(args)
        limit = recipe.next_spacer_floor() if isinstance(recipe, QuasiStaircaseRecipe) else 12
        Q = args.max_q or limit - 1
        if isinstance(recipe, QuasiStaircaseRecipe) and Q + 1 > limit:
            _note(f"q above {limit} uses the minimal continuation")
        slices = {q: enumerate_language(recipe, q, allow_extension=True).words for q in range(1, Q + 2)}
        hs = recipe.heights()
        fits = [n for n in range(2, len(hs) + 1) if hs[n - 1] <= args.budget_symbols]
        if not args.stage and not fits:
            raise UsageError("no stage fits the symbol budget")
        stage = args.stage or fits[-1]
        source = recipe
        if args.t:
            ts = args.t
        elif isinstance(recipe, QuasiStaircaseRecipe):
            ts = [hs[n - 1] + recipe.c[n - 1] for n in range(2, stage)]
        else:
            ts = [hs[n - 1] + 1 for n in range(2, stage)]
    p = {q: len(slices[q]) for q in slices}
    try:
        rc = rg.find_constants(p, Q)
    except rg.NoWitness as exc:
        _note(str(exc))
        return FAILED
    _write(out_dir, "constants.txt", rg.constants_report(rc))
    dec_csv, problems = _decomposition_csv(slices, rc, Q)
    _write(out_dir, "rauzy.csv", dec_csv)
    for msg in problems:
        _note(msg)
    if ts:
        rows = rg.rigidity_witness_search(source, ts, L, stage or None, args.budget_symbols)
        _write(out_dir, "rigidity.csv", rg.rigidity_csv(rows))
        for r in rows:
            print(f"t={r.t} min={float(r.min_ratio):.6f} ({r.argmin}) avg={float(r.avg_ratio):.6f}")
    print(f"k={rc.k} K={rc.K} C={rc.C} admissible lengths: {len(rc.ells)}")
    hard = [m for m in problems if "candidate components" not in m]
    return FAILED if hard else OK


def cmd_presets(args) -> int:
    out_dir = Path(args.out_dir or ".")
    names = [args.preset] if args.preset else sorted(PRESETS)
    for name in names:
        path = _write(out_dir, f"{name}.json", dumps_recipe(PRESETS[name]()))
        print(path)
    return OK


# ---------------------------------------------------------------- parser

def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--recipe", help="recipe JSON file")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--out-dir", help="directory for CSV and report files")
    common.add_argument("--budget-symbols", type=_positive, default=DEFAULT_BUDGET,
                        help="largest word materialized (default 10^7)")
    common.add_argument("--budget-lemma", type=_positive, default=5000,
                        help="exhaustive lemma checks when m_n is at most this (default 5000)")

    parser = argparse.ArgumentParser(prog="quasistair", description="Quasi-staircase rank-one experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check recipe constraints")
    sub.add_parser("scales", parents=[common], help="heights, post-productive lengths, cuts")

    p = sub.add_parser("synth", parents=[common], help="recipe from a target complexity CSV")
    p.add_argument("--target", required=True, help="CSV with columns q,f")
    p.add_argument("--depth", type=_positive, default=6)

    p = sub.add_parser("language", parents=[common], help="export a language slice")
    p.add_argument("--max-q", type=_positive)
    p.add_argument("--word-file")
    p.add_argument("--allow-extension", action="store_true")

    p = sub.add_parser("complexity", parents=[common], help="complexity table and lemma report")
    p.add_argument("--max-q", type=_positive)
    p.add_argument("--n", type=_ints, help="levels for the lemma report, e.g. 1,2")
    p.add_argument("--word-file")

    p = sub.add_parser("tower-verify", parents=[common], help="exact shift identity sweeps")
    p.add_argument("--n", type=_ints)
    p.add_argument("--stage", type=_positive)
    p.add_argument("--samples", type=_positive, help="sample this many tuples per identity")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("mix", parents=[common], help="uniform mixing sums and correlations")
    p.add_argument("--n", type=_ints)
    p.add_argument("--stage", type=_positive)
    p.add_argument("--t", type=_ints, help="lags for the cylinder correlation table")
    p.add_argument("--cyl-len", type=_positive, default=2)
    p.add_argument("--b-stage", type=_positive, default=2)
    p.add_argument("--b-level", type=int, default=0)

    p = sub.add_parser("rigidity", parents=[common], help="constants, Rauzy decomposition, witness search")
    p.add_argument("--word-file")
    p.add_argument("--max-q", type=_positive)
    p.add_argument("--stage", type=_positive)
    p.add_argument("--t", type=_ints)
    p.add_argument("--cyl-len", type=_positive, default=2)

    sub.add_parser("presets", parents=[common], help="write preset recipe files")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "scales": cmd_scales,
    "synth": cmd_synth,
    "language": cmd_language,
    "complexity": cmd_complexity,
    "tower-verify": cmd_tower_verify,
    "mix": cmd_mix,
    "rigidity": cmd_rigidity,
    "presets": cmd_presets,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, BudgetExceeded, InsufficientDepth, tw.PreconditionError, ValueError) as exc:
        _note(f"error: {exc}")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

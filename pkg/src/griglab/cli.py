"""Command line entry point: growth tables, conjugacy brackets, audits,
width searches.

Outputs are UTF-8 with LF line endings and are byte-identical for identical
run configurations, whatever the thread count; all sampling flows from the
single --seed.  Audit exit codes: 0 all checked properties passed, 1 a
verified property failed, 2 inconclusive searches present but none failed,
3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from . import (
    bounds,
    conjugacy,
    constructions,
    core,
    enumeration,
    expressions,
    width,
    words,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

AUDIT_LEMMAS = (
    "subwords",
    "comm-k",
    "comm-g",
    "bcw-rewrite",
    "palindrome",
    "dihedral",
    "recursion",
    "assembly",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    group: str = "grigorchuk"
    max_length: int = 8
    depth: int = 8
    radius: int = 6
    threads: int = 1
    cache_dir: str | None = None
    out_format: str = "csv"
    seed: int = 0
    budget_seconds: float | None = None

    def __post_init__(self):
        for name in ("max_length", "depth", "radius", "threads"):
            if getattr(self, name) < 0 or (name == "threads" and self.threads < 1):
                raise UsageError(f"--{name.replace('_', '-')} must be positive")

    def preset(self):
        return core.load_preset(self.group)

    def rng(self):
        return random.Random(self.seed)


def _add_common(parser):
    parser.add_argument("--group", default="grigorchuk")
    parser.add_argument("--max-length", type=int, default=8)
    parser.add_argument("--depth", type=int, default=8)
    parser.add_argument("--radius", type=int, default=6)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--cache-dir", default=os.environ.get("GRIGLAB_CACHE"))
    parser.add_argument("--format", dest="out_format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget-seconds", type=float, default=None)
    parser.add_argument("--out", default=None, help="output file (default stdout)")


def _config(args):
    return RunConfig(
        group=args.group,
        max_length=args.max_length,
        depth=args.depth,
        radius=args.radius,
        threads=args.threads,
        cache_dir=args.cache_dir,
        out_format=args.out_format,
        seed=args.seed,
        budget_seconds=args.budget_seconds,
    )


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cached_ball(config, preset, radius):
    if not config.cache_dir:
        return enumeration.ball(preset, radius, threads=config.threads)
    cache = Path(config.cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / f"{preset.name}_r{radius}.ballv1"
    if path.exists():
        return enumeration.load_ball(preset, path)
    ball_ = enumeration.ball(preset, radius, threads=config.threads)
    enumeration.save_ball(ball_, path)
    return ball_


# ----------------------------------------------------------------------
# subcommands


def cmd_growth(config, out_path):
    preset = config.preset()
    ball_ = _cached_ball(config, preset, config.max_length)
    rows = [(n, ball_.count_within(n)) for n in range(config.max_length + 1)]
    table = enumeration.GrowthTable(rows)
    depth = enumeration.default_action_depth(config.max_length)
    other = enumeration.independent_gamma(preset, config.max_length, depth)
    if other != rows:
        raise enumeration.DedupMismatchError(
            f"dedup paths disagree: {rows} vs {other}"
        )
    if config.out_format == "json":
        _emit(json.dumps({"rows": rows}, sort_keys=True) + "\n", out_path)
    else:
        _emit(table.to_csv(), out_path)
    return EXIT_OK


def cmd_conjgrowth(config, out_path, witness_path=None):
    preset = config.preset()
    ball_ = _cached_ball(config, preset, config.max_length)
    rows = conjugacy.conj_growth_table(
        preset,
        config.max_length,
        depth=config.depth,
        radius=config.radius,
        ball_=ball_,
        escalate_to=config.radius + 2,
    )
    if witness_path:
        part = conjugacy.class_partition(ball_, config.depth, config.radius)
        _emit(part.witness_json(), witness_path)
    if config.out_format == "json":
        payload = [vars(r) for r in rows]
        _emit(json.dumps(payload, sort_keys=True) + "\n", out_path)
    else:
        _emit(conjugacy.conj_rows_to_csv(rows), out_path)
    return EXIT_OK


def cmd_width(config, target_expr, mode, out_path):
    preset = config.preset()
    try:
        word = words.parse_word_expr(target_expr)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    target = core.evaluate(preset, word)
    budget = width.SearchBudget(
        radius=config.radius,
        factor_cap={"conjugates": 4, "commutators": 2, "palindromes": 5}[mode],
        time_limit=config.budget_seconds,
    )
    if mode == "conjugates":
        result = width.conjugate_width(target, budget, preset)
    elif mode == "commutators":
        result = width.commutator_width(target, budget, preset)
    else:
        result = width.palindromic_width(target, budget, preset, word=word)
    witness = result.expression.describe() if result.expression else ""
    factors = result.factors if result.factors is not None else ""
    lines = [
        "length,element,status,factors,witness",
        f"{len(word)},{word},{result.status},{factors},{witness}",
    ]
    _emit("\n".join(lines) + "\n", out_path)
    return EXIT_OK if result.status == width.DECOMPOSED else EXIT_INCONCLUSIVE


# ----------------------------------------------------------------------
# audits


def _audit_subwords(config, preset, rng):
    failures = []
    for n in range(7):
        for w1 in words.enumerate_reduced(n):
            res = constructions.encode_right(w1, preset)
            if len(res.word) > 2 * len(w1) + 4 or res.sections[1] != w1:
                failures.append(w1)
    coverage = constructions.image_coverage_report(
        min(config.max_length, 8), preset
    )
    one_ab = constructions.encode_pair("", "ab", preset)
    report = {
        "lemma": "subwords",
        "status": "failed" if failures or not coverage.consistent() else "passed",
        "counts": {
            "encode_right_checked": sum(words.count_reduced(n) for n in range(7)),
            "coverage_reachable": coverage.reachable,
            "coverage_unreachable": coverage.unreachable,
            "coverage_unknown": coverage.unknown,
            "coverage_total": coverage.total,
        },
        "witnesses": {"pair_1_ab": {"status": one_ab.status, "word": one_ab.word}},
        "discrepancies": [
            {"pair": [w0, w1], "cost": cost, "word": word}
            for w0, w1, cost, word in coverage.beyond_bound
        ],
    }
    if failures:
        report["witnesses"]["encode_right_failures"] = failures
    inconclusive = coverage.unknown > 0
    return report, inconclusive


def _k_ball_members(preset, data, radius=8):
    ball_ = enumeration.ball(preset, radius)
    return [e for e, _ in ball_.sorted_items() if data.k_membership(e)]


def _audit_comm_k(config, preset, rng):
    data = constructions.branching_data(preset)
    members = _k_ball_members(preset, data)
    ok = 0
    failures = []
    for _ in range(100):
        k1, k2 = rng.choice(members), rng.choice(members)
        try:
            expr = constructions.comm_k_product(k1, k2, data)
            assert len(expr.factors) == 4
            ok += 1
        except Exception as exc:  # noqa: BLE001 - audit reports, never raises
            failures.append(str(exc))
    report = {
        "lemma": "comm-k",
        "status": "passed" if ok == 100 else "failed",
        "counts": {"verified": ok, "sampled": 100, "k_ball_members": len(members)},
        "witnesses": {},
        "discrepancies": failures,
    }
    return report, False


def _audit_comm_g(config, preset, rng):
    data = constructions.branching_data(preset)
    ball_ = enumeration.ball(preset, min(config.max_length, 6))
    pool = [w for _, (_, w) in ball_.sorted_items()]
    bound = 4 * data.h1_rep_max + 2 * 4
    worst = 0
    failures = []
    for _ in range(50):
        gw, xw = rng.choice(pool), rng.choice(pool)
        try:
            expr = constructions.comm_g_decompose(gw, xw, data)
            worst = max(worst, len(expr.factors))
            if len(expr.factors) > bound:
                failures.append({"pair": [gw, xw], "factors": len(expr.factors)})
        except Exception as exc:  # noqa: BLE001
            failures.append({"pair": [gw, xw], "error": str(exc)})
    report = {
        "lemma": "comm-g",
        "status": "failed" if failures else "passed",
        "counts": {
            "sampled": 50,
            "max_factors": worst,
            "bound": bound,
            "coset_rep_max": data.h1_rep_max,
        },
        "witnesses": {},
        "discrepancies": failures,
    }
    return report, False


def _audit_bcw_rewrite(config, preset, rng):
    gens = preset.gen_labels
    conj_pool = [w for n in range(5) for w in words.enumerate_reduced(n)]
    failures = []
    for _ in range(100):
        n_factors = rng.randint(0, 4)
        factors = tuple(
            expressions.ConjugateFactor(rng.choice(gens), rng.choice(conj_pool))
            for _ in range(n_factors)
        )
        expr = expressions.conjugate_product(preset, factors)
        try:
            _, comm = width.rewrite_conjugates_to_commutators(expr)
            if len(comm.factors) > 3 * n_factors:
                failures.append({"factors": n_factors, "commutators": len(comm.factors)})
        except AssertionError as exc:
            failures.append({"error": str(exc)})
    samples = [(rng.choice(conj_pool), rng.choice(conj_pool)) for _ in range(50)]
    identity_failures = width.conjugate_identity_audit(preset, samples)
    report = {
        "lemma": "bcw-rewrite",
        "status": "failed" if failures or identity_failures else "passed",
        "counts": {"rewrites": 100, "identity_samples": 50},
        "witnesses": {"axay_identity": "confirmed" if not identity_failures else "violated"},
        "discrepancies": failures + [list(p) for p in identity_failures],
    }
    return report, False


def _audit_palindrome(config, preset, rng):
    checked, violations = width.palindrome_conjugate_check(9, preset)
    ball_ = enumeration.ball(preset, 6)
    decomposed = 0
    inconclusive = 0
    for e, (_, w) in ball_.sorted_items():
        res = width.palindromic_width(
            e, width.SearchBudget(radius=4, factor_cap=5), preset, word=w
        )
        if res.status == width.DECOMPOSED and len(res.expression.factors) <= 5:
            decomposed += 1
        else:
            inconclusive += 1
    total = len(ball_.entries)
    report = {
        "lemma": "palindrome",
        "status": "failed" if violations or decomposed < 0.95 * total else "passed",
        "counts": {
            "palindromes_checked": checked,
            "violations": len(violations),
            "ball6_decomposed": decomposed,
            "ball6_inconclusive": inconclusive,
        },
        "witnesses": {},
        "discrepancies": [list(v) for v in violations],
    }
    return report, inconclusive > 0


def _audit_dihedral(config, preset, rng):
    rows, worst = width.dihedral_width_report(20)
    report = {
        "lemma": "dihedral",
        "status": "passed" if worst <= 2 else "failed",
        "counts": {"elements": len(rows), "max_conjugates": worst},
        "witnesses": {},
        "discrepancies": [],
    }
    return report, False


def _audit_recursion(config, preset, rng):
    n_max = min(config.max_length, 8)
    ball_ = enumeration.ball(preset, n_max)
    gamma_rows = [(n, ball_.count_within(n)) for n in range(n_max + 1)]
    st1 = [
        (n, enumeration.membership_counts(conjugacy.subball(ball_, n), "st1"))
        for n in range(n_max + 1)
    ]
    T = bounds.estimate_T(gamma_rows, st1)
    f_rows = conjugacy.conj_growth_table(
        preset, n_max, depth=config.depth, radius=config.radius, ball_=ball_,
        escalate_to=config.radius + 2,
    )
    rep = bounds.grig_recursion_audit(f_rows, T)
    report = {
        "lemma": "recursion",
        "status": "passed" if rep.all_hold else "failed",
        "counts": {
            "T": T,
            "rows": [
                {"n": r.n, "f_n": r.f_n, "f_4n": r.f_4n, "rhs": r.rhs, "holds": r.holds}
                for r in rep.rows
            ],
        },
        "witnesses": {},
        "discrepancies": [{"skipped_nonexact": rep.skipped}] if rep.skipped else [],
    }
    return report, bool(rep.skipped)


def _audit_assembly(config, preset, rng):
    rep = bounds.assembly_audit(min(config.max_length, 2), preset)
    report = {
        "lemma": "assembly",
        "status": "passed" if rep.separated and rep.swap_merged else "failed",
        "counts": {
            "pairs_total": rep.pairs_total,
            "assembled": rep.assembled,
            "skipped": len(rep.skipped_unreachable),
        },
        "witnesses": {},
        "discrepancies": [
            {"pair": list(p), "status": s} for p, s in rep.skipped_unreachable
        ],
    }
    inconclusive = any(
        s == constructions.INCONCLUSIVE for _, s in rep.skipped_unreachable
    )
    return report, inconclusive


_AUDITS = {
    "subwords": _audit_subwords,
    "comm-k": _audit_comm_k,
    "comm-g": _audit_comm_g,
    "bcw-rewrite": _audit_bcw_rewrite,
    "palindrome": _audit_palindrome,
    "dihedral": _audit_dihedral,
    "recursion": _audit_recursion,
    "assembly": _audit_assembly,
}


def cmd_audit(config, lemma, out_path):
    if lemma != "all" and lemma not in _AUDITS:
        raise UsageError(
            f"unknown lemma {lemma!r}; expected one of {', '.join(AUDIT_LEMMAS)} or all"
        )
    preset = config.preset()
    names = list(AUDIT_LEMMAS) if lemma == "all" else [lemma]
    reports = []
    any_failed = False
    any_inconclusive = False
    for name in names:
        rng = config.rng()
        report, inconclusive = _AUDITS[name](config, preset, rng)
        reports.append(report)
        any_failed |= report["status"] == "failed"
        any_inconclusive |= inconclusive
    payload = reports[0] if len(reports) == 1 else reports
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", out_path)
    if any_failed:
        return EXIT_FAILED
    if any_inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ----------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="griglab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("growth", parents=[], help="word growth table")
    _add_common(p)

    p = sub.add_parser("conjgrowth", help="conjugacy growth bracket table")
    _add_common(p)
    p.add_argument("--witness-out", default=None)

    p = sub.add_parser("audit", help="run a constructive audit")
    _add_common(p)
    p.add_argument("--lemma", default="all")

    p = sub.add_parser("width", help="width search for one target")
    _add_common(p)
    p.add_argument("--target", required=True)
    p.add_argument(
        "--mode", choices=("conjugates", "commutators", "palindromes"), default="conjugates"
    )
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _config(args)
        if args.command == "growth":
            return cmd_growth(config, args.out)
        if args.command == "conjgrowth":
            return cmd_conjgrowth(config, args.out, args.witness_out)
        if args.command == "audit":
            return cmd_audit(config, args.lemma, args.out)
        if args.command == "width":
            return cmd_width(config, args.target, args.mode, args.out)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

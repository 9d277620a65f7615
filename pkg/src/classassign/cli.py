"""Command-line entry point.

Exit codes: 0 success, 1 error (bad input, failed check, oracle mismatch),
2 model infeasible (a forbidden slot had to be used).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .analyze import ModelResult, class_report, compare, necessary_condition, profile_of
from .assign import (
    detect_restricted_infeasibility,
    penalized_students,
    preset,
    reporting_vector,
    restrict,
    solve_assignment,
)
from .core import AssignmentError, Instance, penalty_constants
from .data import (
    GROUP_LABELS,
    GeneratorSpec,
    generate_instance,
    load_instance,
    save_instance,
    save_matching,
)
from .flow import Infeasible
from .mechanisms import boston, deferred_acceptance, single_tie_break
from .oracle import oracle_optimum

log = logging.getLogger("classassign")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
MECHANISMS = {"da": ("DA with STB", deferred_acceptance),
              "boston": ("Boston with STB", boston)}


def _model_vector(name: str, instance: Instance, max_rank: Optional[int]):
    vec = preset(name, instance)
    if max_rank is not None:
        vec = restrict(vec, max_rank, penalty_constants(instance).M)
    return vec


def _write_table(table, path: Path) -> None:
    text = table.to_markdown() if path.suffix.lower() in (".md", ".markdown") \
        else table.to_csv()
    path.write_text(text, encoding="utf-8")


def _write_class_report(instance: Instance, matching, path: Path) -> None:
    rows = class_report(instance, matching)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _run_model(name: str, instance: Instance, max_rank: Optional[int] = None,
               seed: int = 0) -> ModelResult:
    key = name.lower()
    if key in MECHANISMS:
        label, mech = MECHANISMS[key]
        m = mech(instance, single_tie_break(instance, seed))
        return ModelResult(label, m, reporting_vector("Opt67", instance))
    vec = _model_vector(name, instance, max_rank)
    t0 = time.perf_counter()
    matching, total = solve_assignment(instance, vec)
    log.info("%s: total utility %d in %.2fs", name, total, time.perf_counter() - t0)
    bad = detect_restricted_infeasibility(matching, instance, vec)
    label = name if max_rank is None else vec.name
    return ModelResult(label, matching, reporting_vector(name, instance), infeasible=bad)


def cmd_solve(args) -> int:
    instance = load_instance(args.classes, args.prefs)
    result = _run_model(args.model, instance, args.max_rank)
    save_matching(result.matching, instance, args.out)
    if args.report:
        _write_table(compare(instance, [result]), Path(args.report))
    if args.class_report:
        _write_class_report(instance, result.matching, Path(args.class_report))
    if result.infeasible:
        vec = _model_vector(args.model, instance, args.max_rank)
        who = penalized_students(result.matching, instance, vec)
        print(f"infeasible: {len(who)} student(s) had to take a forbidden slot",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    prof = profile_of(instance, result.matching)
    print(f"{result.name}: profile {list(prof.counts)} others {prof.others}")
    return EXIT_OK


def cmd_mechanism(args) -> int:
    instance = load_instance(args.classes, args.prefs)
    result = _run_model(args.kind, instance, seed=args.seed)
    save_matching(result.matching, instance, args.out)
    if args.report:
        _write_table(compare(instance, [result]), Path(args.report))
    if args.class_report:
        _write_class_report(instance, result.matching, Path(args.class_report))
    prof = profile_of(instance, result.matching)
    print(f"{result.name}: profile {list(prof.counts)} others {prof.others}")
    return EXIT_OK


def cmd_compare(args) -> int:
    instance = load_instance(args.classes, args.prefs)
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    results = [_run_model(n, instance, seed=args.seed) for n in names]
    table = compare(instance, results)
    _write_table(table, Path(args.out))
    sys.stdout.write(table.to_markdown())
    return EXIT_OK


def cmd_check(args) -> int:
    instance = load_instance(args.classes, args.prefs)
    bad = necessary_condition(instance, args.max_rank)
    for cid, n in bad:
        lower = instance.class_info(cid).lower
        print(f"{cid}: ranked within top {args.max_rank} by {n} student(s), lower {lower}")
    if bad:
        return EXIT_ERROR
    print(f"all active classes meet their lower capacity within the top {args.max_rank}")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        students=args.students, classes=args.classes, k=args.k, lower=args.lower,
        upper_range=(args.upper_min, args.upper_max), skew=args.skew,
        canceled=args.canceled, seed=args.seed,
        groups=GROUP_LABELS if args.groups else None)
    instance = generate_instance(spec)
    classes_path, prefs_path = save_instance(instance, args.out_dir)
    print(f"wrote {classes_path} and {prefs_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = load_instance(args.classes, args.prefs)
    vec = _model_vector(args.model, instance, args.max_rank)
    _, total = solve_assignment(instance, vec)
    best, optimal = oracle_optimum(instance, vec)
    if best != total:
        print(f"MISMATCH: flow {total}, exhaustive {best}", file=sys.stderr)
        return EXIT_ERROR
    print(f"ok: total utility {total} matches exhaustive search "
          f"({len(optimal)} optimal matching(s))")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="classassign", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def files(p, out=True):
        p.add_argument("--classes", required=True, help="classes CSV")
        p.add_argument("--prefs", required=True, help="preferences CSV")
        if out:
            p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="solve one optimization model")
    p.add_argument("--model", required=True)
    p.add_argument("--max-rank", type=int)
    files(p)
    p.add_argument("--report", help="comparison row (.md for markdown, else CSV)")
    p.add_argument("--class-report", help="per-class CSV (group counts when present)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("mechanism", help="run DA or Boston with single tie-breaking")
    p.add_argument("--kind", choices=sorted(MECHANISMS), required=True)
    p.add_argument("--seed", type=int, required=True)
    files(p)
    p.add_argument("--report")
    p.add_argument("--class-report")
    p.set_defaults(func=cmd_mechanism)

    p = sub.add_parser("compare", help="run several models and tabulate them")
    p.add_argument("--models", required=True,
                   help="comma-separated presets; 'da' and 'boston' are allowed too")
    p.add_argument("--seed", type=int, default=0, help="tie-breaking seed for da/boston")
    files(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check", help="popularity diagnostic for a rank cutoff")
    p.add_argument("--max-rank", type=int, required=True)
    files(p, out=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write a synthetic instance")
    p.add_argument("--students", type=int, required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lower", type=int, default=7)
    p.add_argument("--upper-min", type=int, default=15)
    p.add_argument("--upper-max", type=int, default=40)
    p.add_argument("--skew", type=float, default=1.0)
    p.add_argument("--canceled", type=int, default=0)
    p.add_argument("--groups", action="store_true", help="add a faculty group column")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="cross-check a solve against exhaustive search")
    p.add_argument("--model", required=True)
    p.add_argument("--max-rank", type=int)
    files(p, out=False)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (AssignmentError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


cli = main

if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``dereserve {run,audit,compare,manipulate,fuzz}``.

Machine-readable output goes to stdout, human summaries to stderr.
Exit status: 0 clean, 1 property or audit failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .audit import AXIOMS
from .io import dump_run, load_assignment, load_market, run_record
from .market import DomainError, MarketError
from .mechanisms import MECHANISMS
from .oracle import (
    PROPERTIES,
    Comparison,
    FuzzConfig,
    SearchTruncated,
    find_membership_manipulation,
    find_preference_manipulation,
    fuzz,
    pareto_compare,
)

OK, FAILED, INPUT_ERROR = 0, 1, 2


def _list(value: str) -> List[str]:
    return [x.strip() for x in value.split(",") if x.strip()]


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _note(text: str) -> None:
    sys.stderr.write(text + "\n")


def cmd_run(args) -> int:
    market = load_market(args.market)
    run = MECHANISMS[args.mechanism](market)
    sys.stdout.write(dump_run(run, market, trace=args.trace))
    return OK


def cmd_audit(args) -> int:
    market = load_market(args.market)
    assignment, _ = load_assignment(args.assignment, market)
    names = list(AXIOMS) if args.axioms == "all" else _list(args.axioms)
    unknown = [n for n in names if n not in AXIOMS]
    if unknown:
        raise DomainError(f"unknown axioms {unknown}; choose from {', '.join(AXIOMS)}")
    reports = [AXIOMS[n](assignment, market) for n in names]
    _emit([r.to_dict() for r in reports])
    for r in reports:
        _note(r.render())
    return OK if all(r.passed for r in reports) else FAILED


def cmd_compare(args) -> int:
    market = load_market(args.market)
    names = _list(args.mechanisms)
    if len(names) != 2 or any(n not in MECHANISMS for n in names):
        raise DomainError(f"--mechanisms needs two of {', '.join(MECHANISMS)}")
    first, second = (MECHANISMS[n](market) for n in names)
    verdict = pareto_compare(first.outcome, second.outcome, market)
    _emit({"first": run_record(first, market), "second": run_record(second, market), "verdict": verdict.value})
    _note(f"{names[0]} vs {names[1]}: {verdict.value}")
    return OK if verdict in (Comparison.DOMINATES, Comparison.EQUAL) else FAILED


def cmd_manipulate(args) -> int:
    market = load_market(args.market)
    modes = _list(args.modes)
    bad = [m for m in modes if m not in ("preferences", "membership")]
    if bad or not modes:
        raise DomainError("--modes takes preferences and/or membership")
    ids = [args.applicant] if args.applicant else [a.id for a in market.applicants]
    for i in ids:
        market.applicant(i)
    witnesses = []
    for i in ids:
        if "preferences" in modes:
            w = find_preference_manipulation(args.mechanism, market, i)
            if w:
                witnesses.append(w)
        if "membership" in modes:
            a = market.applicant(i)
            if args.applicant or (a.true_category in market.scheme.reserved and a.reported):
                w = find_membership_manipulation(args.mechanism, market, i)
                if w:
                    witnesses.append(w)
    _emit({"mechanism": args.mechanism, "witnesses": [w.to_dict() for w in witnesses]})
    for w in witnesses:
        _note(w.render())
    if not witnesses:
        _note("none")
    return FAILED if witnesses else OK


def cmd_fuzz(args) -> int:
    config = FuzzConfig(
        seed=args.seed,
        markets=args.markets,
        max_applicants=args.max_applicants,
        max_institutions=args.max_institutions,
        max_seats=args.max_seats,
        properties=tuple(_list(args.properties)),
        mechanism=args.mechanism,
    )
    summary = fuzz(config, workers=args.workers)
    paths = []
    if summary.counterexamples:
        os.makedirs(args.out, exist_ok=True)
        for c in summary.counterexamples:
            path = os.path.join(args.out, f"seed{c.seed}-market{c.index}-{c.property}.market")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(c.market)
            paths.append(path)
    _emit(
        {
            "seed": config.seed,
            "markets": config.markets,
            "passed": summary.passed,
            "failed": summary.failed,
            "counterexamples": [
                {"property": c.property, "market_index": c.index, "detail": c.detail, "path": p}
                for c, p in zip(summary.counterexamples, paths)
            ],
        }
    )
    _note(summary.render())
    for p in paths:
        _note(f"counterexample written to {p}")
    return OK if summary.ok else FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dereserve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    mechs = sorted(MECHANISMS)

    p = sub.add_parser("run", help="run a mechanism and print the assignment file")
    p.add_argument("--market", required=True)
    p.add_argument("--mechanism", required=True, choices=mechs)
    p.add_argument("--trace", action="store_true", help="include per-step and per-iteration records")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit", help="check axioms on an assignment file")
    p.add_argument("--market", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--axioms", default="all", help=f"comma list from {', '.join(AXIOMS)}, or all")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("compare", help="Pareto-compare two mechanisms' outcomes")
    p.add_argument("--market", required=True)
    p.add_argument("--mechanisms", required=True, help="two names, comma separated")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("manipulate", help="search for profitable misreports")
    p.add_argument("--market", required=True)
    p.add_argument("--mechanism", required=True, choices=mechs)
    p.add_argument("--applicant")
    p.add_argument("--modes", default="preferences,membership")
    p.set_defaults(func=cmd_manipulate)

    p = sub.add_parser("fuzz", help="check properties on seeded random markets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--markets", type=int, default=1000)
    p.add_argument("--properties", default="pareto-dominance", help=f"comma list from {', '.join(PROPERTIES)}")
    p.add_argument("--max-applicants", type=int, default=5)
    p.add_argument("--max-institutions", type=int, default=3)
    p.add_argument("--max-seats", type=int, default=3)
    p.add_argument("--mechanism", default="da-bt", choices=mechs, help="mechanism for the strategy-proof property")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="fuzz-counterexamples", help="directory for counterexample markets")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        return args.func(args)
    except (MarketError, DomainError, SearchTruncated) as exc:
        _note(f"dereserve {args.command}: error: {exc}")
        return INPUT_ERROR


run_cli = main

if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: single trials, grids, figure presets, and oracles.

Exit codes: 0 on success, 2 for unusable experiment descriptions, 3 when an
oracle check fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import chernoff_check, coverage_check, parity_sweep, threshold_sweep
from .harness import (
    CellCoord,
    ExperimentSpec,
    SpecError,
    emit_csv,
    emit_plot,
    figure_preset,
    format_fraction,
    run_grid,
    trial_detail,
)

EXIT_OK = 0
EXIT_SPEC_ERROR = 2
EXIT_ORACLE_FAILURE = 3

_PRESET_NAMES = ("fig1a", "fig1b", "fig1c", "fig2", "fig3")
_SCHEME_NAMES = ("None", "Optimal", "Approve", "Best1", "Best3")
_RULE_NAMES = ("AV", "RAV", "STV", "Borda", "CC", "KMedian", "Weighted", "Sortition")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frdlab",
        description="Simulation lab for direct, representative, and flexible "
                    "representative democracy on binary issues.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    single = sub.add_parser("single", help="run one trial and print the decisions")
    single.add_argument("--voters", type=int, default=51)
    single.add_argument("--candidates", type=int, default=15)
    single.add_argument("--issues", type=int, default=20)
    single.add_argument("-k", "--committee-size", type=int, default=5)
    single.add_argument("--rule", choices=_RULE_NAMES, default="AV")
    single.add_argument("--scheme", choices=_SCHEME_NAMES, default="None")
    single.add_argument("--alpha", type=float, default=0.0)
    single.add_argument("--trial", type=int, default=0)
    single.add_argument("--seed", type=int, default=42)
    single.add_argument("--sampling", choices=("bernoulli", "exact_count"),
                        default="bernoulli")

    grid = sub.add_parser("grid", help="run a JSON experiment grid and write CSV")
    grid.add_argument("--spec", required=True, type=Path,
                      help="JSON file with ExperimentSpec fields")
    grid.add_argument("--out", type=Path, default=Path("."),
                      help="output directory (default: current)")

    figure = sub.add_parser("figure", help="run a pinned preset; write CSV and SVG")
    figure.add_argument("name", choices=_PRESET_NAMES)
    figure.add_argument("--out", type=Path, default=Path("."))
    figure.add_argument("--seed", type=int, default=42)
    figure.add_argument("--trials", type=int, default=50)

    oracle = sub.add_parser("oracle", help="run one family of self-checks")
    oracle.add_argument("--mode", required=True,
                        choices=("coverage", "thresholds", "chernoff", "parity"))
    oracle.add_argument("--seed", type=int, default=42)
    return parser


def _format_bits(outcome) -> str:
    return "".join(str(int(b)) for b in outcome.decisions)


def _cmd_single(args) -> int:
    coord = CellCoord(
        rule=args.rule, scheme=args.scheme, alpha=args.alpha,
        n_voters=args.voters, n_candidates=args.candidates,
        n_issues=args.issues, k=args.committee_size,
    )
    spec = ExperimentSpec.create(
        n_voters=args.voters, n_candidates=args.candidates, n_issues=args.issues,
        k=args.committee_size, rule=args.rule, scheme=args.scheme, alpha=args.alpha,
        trials=max(1, args.trial + 1), master_seed=args.seed,
        delegator_sampling=args.sampling,
    )
    spec.validate()
    detail = trial_detail(coord, args.trial, args.seed, args.sampling)
    rec = detail.record
    print(f"rule {rec.rule} | scheme {rec.scheme} | alpha {format_fraction(rec.alpha)}"
          f" | trial {rec.trial} | seed {rec.seed}")
    print(f"committee: {', '.join(str(i) for i in detail.committee.members)}")
    print(f"DD : {_format_bits(detail.direct.outcome)}")
    print(f"RD : {_format_bits(detail.representative.outcome)}  "
          f"agreement {format_fraction(rec.agreement_rd)}")
    print(f"FRD: {_format_bits(detail.flexible.outcome)}  "
          f"agreement {format_fraction(rec.agreement_frd)}  "
          f"ties {detail.flexible.tie_count}")
    print(f"coverage {format_fraction(rec.coverage)} | "
          f"full coverage {format_fraction(rec.full_coverage)} | "
          f"majority agreement {format_fraction(rec.majority_agreement)}")
    return EXIT_OK


def _cmd_grid(args) -> int:
    try:
        text = args.spec.read_text(encoding="utf-8")
    except OSError as err:
        print(f"cannot read spec file: {err}", file=sys.stderr)
        return EXIT_SPEC_ERROR
    spec = ExperimentSpec.from_json(text)
    results = run_grid(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = emit_csv(results, args.out / f"{spec.preset}.csv")
    print(f"wrote {csv_path} ({sum(c.trials for c in results)} rows)")
    return EXIT_OK


def _cmd_figure(args) -> int:
    spec = figure_preset(args.name, master_seed=args.seed, trials=args.trials)
    results = run_grid(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = emit_csv(results, args.out / f"{args.name}.csv")
    svg_path = emit_plot(results, args.out / f"{args.name}.svg")
    print(f"wrote {csv_path} ({sum(c.trials for c in results)} rows)")
    print(f"wrote {svg_path}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    rng = np.random.Generator(np.random.PCG64(args.seed))
    failures = 0
    if args.mode == "thresholds":
        violations = threshold_sweep()
        for line in violations[:20]:
            print(f"FAIL thresholds: {line}")
        failures = len(violations)
        if not failures:
            print("PASS thresholds: exact iff-boundaries on the exhaustive sweep")
    elif args.mode == "parity":
        ties = parity_sweep(100_000, rng)
        if ties:
            print(f"FAIL parity: {ties} exact ties in 100000 odd-size instances")
            failures = ties
        else:
            print("PASS parity: no exact ties in 100000 odd-size instances")
    elif args.mode == "chernoff":
        records = chernoff_check(20, 10_000, rng)
        for rec in records:
            status = "PASS" if rec["ok"] else "FAIL"
            if not rec["ok"]:
                failures += 1
            print(f"{status} chernoff: N={rec['n_voters']} k={rec['committee_size']} "
                  f"k1={rec['agreeing_members']} bound={rec['bound']:.4f} "
                  f"empirical={rec['empirical']:.4f}")
    elif args.mode == "coverage":
        records = coverage_check(200, rng)
        bad = [rec for rec in records if not rec["ok"]]
        for rec in bad[:20]:
            print(f"FAIL coverage: m={rec['n_candidates']} r={rec['n_issues']} "
                  f"k={rec['k']} greedy={rec['greedy']} optimum={rec['optimum']}")
        failures = len(bad)
        if not failures:
            print(f"PASS coverage: greedy met the (1 - 1/e) guarantee on "
                  f"{len(records)}/{len(records)} instances")
    return EXIT_ORACLE_FAILURE if failures else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "single":
            return _cmd_single(args)
        if args.command == "grid":
            return _cmd_grid(args)
        if args.command == "figure":
            return _cmd_figure(args)
        return _cmd_oracle(args)
    except SpecError as err:
        print(f"spec error: {err}", file=sys.stderr)
        return EXIT_SPEC_ERROR
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SPEC_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line experiment runner.

Usage::

    gflab lemma1|thm4|approx|grunsky --config params.json --out results/ [--deep] [--seed N]

The config file is a JSON object of experiment parameters (omit it for
the defaults).  Artifacts land in the output directory as results.csv,
report.json and manifest.json.  Exit status: 0 when every assertion of
the selected experiment holds, 1 when the run completes but an assertion
fails, 2 on a diagnostic error (bad arguments, gate violations, numeric
failures).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import GflabError
from .experiments import EXPERIMENTS, ExperimentSpec, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gflab",
        description="weighted-norm, Schwarzian and coefficient-matrix experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", type=Path, default=None, help="JSON parameter file")
        s.add_argument("--out", type=Path, required=True, help="artifact directory")
        s.add_argument(
            "--deep",
            action="store_true",
            help="raise resolutions and tighten tolerances",
        )
        s.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    return parser


def _load_params(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise GflabError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GflabError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GflabError(f"config {path} must hold a JSON object")
    return data


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = ExperimentSpec(
            name=args.experiment,
            output_dir=args.out,
            params=_load_params(args.config),
            seed=args.seed,
            deep=args.deep,
        )
        outcome = run_experiment(spec)
    except GflabError as exc:
        print(f"gflab {args.experiment}: error: {exc}", file=sys.stderr)
        return 2
    print(outcome.summary)
    print(f"artifacts: {outcome.output_dir}")
    return 0 if outcome.passed else 1


if __name__ == "__main__":
    sys.exit(main())

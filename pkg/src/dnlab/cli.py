"""Command-line entry point for the scenario runner.

Exit codes: 0 all assertions passed, 1 at least one assertion failed,
2 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .lab import SCENARIOS, ConfigError, run_scenario, validate_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnlab",
        description="Run semilinear Dirichlet-to-Neumann lab scenarios.")
    parser.add_argument("--list-scenarios", action="store_true",
                        help="print available scenario names and exit")
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("config", type=Path, help="path to the JSON configuration")
    run.add_argument("--grid", type=int, default=None,
                     help="override grid to N x N nodes")
    run.add_argument("--out", type=Path, default=None,
                     help="override output directory")
    run.add_argument("--seed", type=int, default=None, help="override RNG seed")
    run.add_argument("--validate-only", action="store_true",
                     help="validate the configuration and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_scenarios:
        for name in SCENARIOS:
            print(name)
        return 0
    if args.command != "run":
        parser.print_help()
        return 2
    try:
        doc = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.grid is not None:
        doc.setdefault("grid", {})
        doc["grid"]["nx"] = args.grid
        doc["grid"]["ny"] = args.grid
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = str(args.out)
    try:
        cfg = validate_config(doc)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    if args.validate_only:
        print(f"configuration valid: scenario {cfg.scenario}")
        return 0
    try:
        art = run_scenario(cfg)
    except Exception as exc:
        print(f"error: scenario failed: {exc}", file=sys.stderr)
        return 2
    for check in art.checks:
        mark = "PASS" if check.passed else "FAIL"
        print(f"[{mark}] {check.name}: measured {check.measured:.6g} "
              f"{check.comparator} {check.bound:.6g} ({check.provenance})")
    print(f"scenario {art.scenario}: "
          f"{'all checks passed' if art.passed else 'CHECKS FAILED'}; "
          f"artifacts in {art.out_dir}")
    return 0 if art.passed else 1


if __name__ == "__main__":
    sys.exit(main())

"""``spvqe`` command line: scan, steps-sweep, robustness, oracle, validate."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import SpvqeError
from .scan import (
    DEFAULT_STARTS,
    METHODS,
    load_config,
    oracle_table,
    robustness_study,
    run_scan,
    steps_sweep,
    validate_inputs,
)


def _mu(text: str):
    parts = [float(p) for p in text.split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _common(p: argparse.ArgumentParser, run: bool = True):
    p.add_argument("--config", required=True, help="JSON scan configuration")
    if not run:
        return
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--mu-max", type=_mu, help="one value, or comma-separated per constraint")
    p.add_argument("--n-steps", type=int)
    p.add_argument("--shots", type=int, help="0 for exact expectation values")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--repeats", type=int)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spvqe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("scan", help="run one method over every geometry point"))
    sweep = sub.add_parser("steps-sweep", help="SPVQE over several step counts")
    _common(sweep)
    sweep.add_argument("--ns", type=_int_list, default=[1, 2, 5, 10],
                       help="comma-separated step counts")
    robust = sub.add_parser("robustness", help="CVQE vs SPVQE from many random starts")
    _common(robust)
    robust.add_argument("--starts", type=int, default=DEFAULT_STARTS)
    oracle = sub.add_parser("oracle", help="print constrained spectra")
    _common(oracle, run=False)
    oracle.add_argument("--levels", type=int, default=8)
    _common(sub.add_parser("validate", help="lint the config and its FCIDUMP files"), run=False)
    return parser


def _apply_overrides(config, args):
    overrides = {
        "method": args.method, "mu_max": args.mu_max, "n_steps": args.n_steps,
        "shots": args.shots, "seed": args.seed, "repeats": args.repeats,
    }
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})


def _finish(report, out, stem) -> int:
    csv_path, json_path = report.write(out, stem)
    for row in report.summary:
        shown = {k: v for k, v in row.items() if not isinstance(v, list)}
        print(json.dumps(shown, sort_keys=True))
    print(f"wrote {csv_path} and {json_path}")
    for r in report.failed:
        print(f"FAILED {r.label} {r.method} repeat={r.repeat} ns={r.ns}: {r.error}", file=sys.stderr)
    return 1 if report.failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "validate":
            issues = validate_inputs(config)
            for issue in issues:
                print(issue)
            if not issues:
                print(f"ok: {len(config.points)} point(s)")
            return 1 if issues else 0
        if args.command == "oracle":
            for row in oracle_table(config, args.levels):
                print(json.dumps(row, sort_keys=True))
            return 0
        config = _apply_overrides(config, args)
        if args.command == "scan":
            return _finish(run_scan(config, jobs=args.jobs), args.out, "scan")
        if args.command == "steps-sweep":
            return _finish(steps_sweep(config, args.ns, jobs=args.jobs), args.out, "steps_sweep")
        return _finish(robustness_study(config, args.starts, jobs=args.jobs), args.out, "robustness")
    except (SpvqeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

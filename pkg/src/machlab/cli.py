"""Command-line surface: run, sweep, norms, check, report.

Exit codes: 0 success, 1 usage error, 2 validation/config failure,
3 numerical failure (NaN or a failing check suite).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="machlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="integrate a single run")
    p_run.add_argument("--config", type=Path, required=True)
    p_run.add_argument("--eps", type=float, default=None)
    p_run.add_argument("--out", type=Path, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=1)

    p_sweep = sub.add_parser("sweep", help="run an eps sweep with slope fits")
    p_sweep.add_argument("--config", type=Path, required=True)
    p_sweep.add_argument("--out", type=Path, required=True)
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.add_argument("--seed", type=int, default=None)

    p_norms = sub.add_parser("norms", help="offline norm calculator on a checkpoint")
    p_norms.add_argument("checkpoint", type=Path)
    p_norms.add_argument("--out", type=Path, default=None)

    p_check = sub.add_parser("check", help="run the built-in property suites")
    p_check.add_argument("--seed", type=int, default=0)

    p_report = sub.add_parser("report", help="aggregate a sweep directory into JSON")
    p_report.add_argument("--out", type=Path, required=True)
    return parser


def _cmd_run(args) -> int:
    from .config import ConfigError, load_config
    from .runner import run

    try:
        kind, config = load_config(args.config)
        if kind == "sweep":
            config = config.run
        if args.eps is not None:
            config = replace(config, eps=args.eps)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report = run(config, out_dir=args.out)
    print(f"status={report.status} t_end={report.t_end:.6g}")
    for key in sorted(report.aggregates):
        print(f"  {key} = {report.aggregates[key]:.10g}")
    if report.status == "numerical_failure":
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .config import ConfigError, load_config
    from .harness import sweep

    try:
        kind, config = load_config(args.config)
        if kind != "sweep":
            raise ConfigError("config has no [sweep] table")
        if args.threads is not None:
            config = replace(config, threads=args.threads)
        if args.seed is not None:
            config = replace(config, run=replace(config.run, seed=args.seed))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    summary = sweep(config, args.out)
    print(f"compared eps: {summary.eps_compared}")
    for fit in summary.fits:
        print(
            f"  {fit['metric']}: slope={fit['slope']:.4f} intercept={fit['intercept']:.4f} "
            f"r2={fit['r2']:.4f}"
        )
    for entry in summary.assertions:
        print(f"  [{'PASS' if entry['passed'] else 'FAIL'}] {entry['name']}")
    statuses = {e["status"] for e in summary.per_eps}
    if "numerical_failure" in statuses:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_norms(args) -> int:
    from .checkpoint import CheckpointError, read_checkpoint
    from .cli_norms import norm_rows

    if not args.checkpoint.exists():
        print(f"checkpoint not found: {args.checkpoint}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        fields, time, eps = read_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        print(f"bad checkpoint: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    rows = norm_rows(fields, time)
    lines = ["time,norm_name,s,p,r,psi_id,value"]
    for row in rows:
        lines.append(
            "%s,%s,%s,%s,%s,%s,%s"
            % (
                "%.17g" % row["time"],
                row["norm_name"],
                row["s"],
                row["p"],
                row["r"],
                row["psi_id"],
                "%.17g" % row["value"],
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_check(args) -> int:
    from .checks import run_all

    results = run_all(seed=args.seed)
    all_ok = True
    for res in results:
        flag = "PASS" if res.passed else "FAIL"
        print(f"[{flag}] {res.name}: {res.detail}")
        all_ok &= res.passed
    return EXIT_OK if all_ok else EXIT_NUMERICAL


def _cmd_report(args) -> int:
    from .harness import SweepSummary
    from .report import RunReport

    summary_path = args.out / "summary.json"
    if not summary_path.exists():
        print(f"no summary.json under {args.out}", file=sys.stderr)
        return EXIT_VALIDATION
    summary = SweepSummary.read(summary_path)
    payload = {
        "eps_compared": summary.eps_compared,
        "fits": summary.fits,
        "assertions": summary.assertions,
        "runs": [],
    }
    for i, eps in enumerate(summary.eps_list):
        run_dir = args.out / f"eps_{i:02d}"
        if (run_dir / "run.json").exists():
            rep = RunReport.read(run_dir)
            recomputed = rep.recompute_aggregates()
            payload["runs"].append(
                {
                    "eps": eps,
                    "status": rep.status,
                    "aggregates": rep.aggregates,
                    "recomputed": recomputed,
                }
            )
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "norms": _cmd_norms,
        "check": _cmd_check,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

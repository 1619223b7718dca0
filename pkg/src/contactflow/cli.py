"""Command-line entry point: ``contactflow run|sweep|analyze|plot``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import RunConfig, SweepConfig, echo, parse_config
from .errors import ContactFlowError
from .harness import ALL_CHECKS, analyze, execute_run, sweep
from .plots import emit_plots


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contactflow",
                                description="Allen-Cahn flow with contact-angle boundary conditions.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate one configuration")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (default: the config's 'output')")
    r.add_argument("--resume", help="checkpoint to continue from")
    r.add_argument("--until", type=float, help="stop early at this time (leaves a resumable checkpoint)")
    r.add_argument("--check", action="append", choices=ALL_CHECKS + ["all"],
                   help="analyse the finished run; repeatable")

    s = sub.add_parser("sweep", help="run and analyse an epsilon sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int)
    s.add_argument("--check", action="append", choices=ALL_CHECKS + ["all"])

    a = sub.add_parser("analyze", help="check a finished run directory")
    a.add_argument("--run", required=True)
    a.add_argument("--check", action="append", choices=ALL_CHECKS + ["all"])
    a.add_argument("--out")

    g = sub.add_parser("plot", help="write SVG plots for a run or sweep directory")
    g.add_argument("--run", required=True)
    g.add_argument("--out")
    return p


def _report(summary: dict) -> None:
    for name, res in summary["checks"].items():
        status = "PASS" if res["passed"] else "FAIL"
        print(f"{status} {name}: worst residual {res.get('worst_residual')}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            if not isinstance(cfg, RunConfig):
                print("error: 'run' needs a single-run config; use 'sweep' for epsilon lists", file=sys.stderr)
                return 2
            out = args.out or cfg["output"]
            if out is None:
                print("error: no output directory (--out or 'output' in the config)", file=sys.stderr)
                return 2
            print(echo(cfg))
            info = execute_run(cfg, out, resume=args.resume, until=args.until)
            print(json.dumps(info, sort_keys=True))
            if args.check and info["complete"]:
                summary = analyze(out, args.check)
                _report(summary)
                return 0 if summary["passed"] else 1
            return 0
        if args.command == "sweep":
            cfg = parse_config(args.config)
            if not isinstance(cfg, SweepConfig):
                print("error: 'sweep' needs a config with an 'epsilons' list", file=sys.stderr)
                return 2
            summary = sweep(cfg, args.out, jobs=args.jobs, checks=args.check or ["all"])
            print(json.dumps(summary, sort_keys=True, indent=2))
            return 0 if all(summary["runs_passed"]) else 1
        if args.command == "analyze":
            summary = analyze(args.run, args.check or ["all"], args.out)
            _report(summary)
            return 0 if summary["passed"] else 1
        if args.command == "plot":
            for p in emit_plots(args.run, args.out):
                print(p)
            return 0
    except (ContactFlowError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())

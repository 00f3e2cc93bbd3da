"""Command-line entry point: ``run``, ``check-gains`` and ``summarize``.

Exit codes: 0 on success, 2 for configuration or input errors, 3 when the
integration diverges.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .model import IntegrationDiverged
from .scenario import ConfigInvalid, load_config
from .sim import EmptyLog, RunLog, gain_report, run_scenario, summarize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

log = logging.getLogger("geoadapt")


def _cmd_run(args) -> int:
    config = load_config(args.config)
    changes = {}
    if args.no_adaptive:
        changes["adaptive"] = False
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.duration is not None:
        changes["duration"] = args.duration
    if changes:
        try:
            config = replace(config, **changes)
        except (ConfigInvalid, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from exc

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        runlog, metrics = run_scenario(config)
    except IntegrationDiverged as exc:
        partial = getattr(exc, "runlog", None)
        if partial is not None:
            partial.to_csv(out / "log.csv")
        print(f"integration diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    runlog.to_csv(out / "log.csv")
    summary = {"summary": metrics.to_dict(), "header": runlog.header}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(metrics.to_dict(), sort_keys=True))
    return EXIT_OK


def _cmd_check_gains(args) -> int:
    config = load_config(args.config)
    report = gain_report(config)
    print(report.to_json(indent=2))
    return EXIT_OK


def _cmd_summarize(args) -> int:
    try:
        runlog = RunLog.from_csv(args.log)
        metrics = summarize(runlog)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot summarize {args.log}: {exc}") from exc
    print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geoadapt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario config")
    run.add_argument("config")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--no-adaptive", action="store_true", help="disable both adaptive laws")
    run.add_argument("--dt", type=float, help="override the integration step")
    run.add_argument("--duration", type=float, help="override the run length")
    run.set_defaults(func=_cmd_run)

    chk = sub.add_parser("check-gains", help="evaluate the gain conditions for a config")
    chk.add_argument("config")
    chk.set_defaults(func=_cmd_check_gains)

    sm = sub.add_parser("summarize", help="recompute summary metrics from a CSV log")
    sm.add_argument("log")
    sm.set_defaults(func=_cmd_summarize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigInvalid, EmptyLog) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

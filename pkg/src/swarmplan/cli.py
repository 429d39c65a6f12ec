"""Command-line front end: generate, run, sweep, summarize, replay.

Exit codes: 0 on success, 1 when any sweep row recorded an error, 2 on
invalid input (bad scenario, template, or spec files).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .engine import run as run_scenario
from .scenario import (InvalidScenarioError, InvalidTemplateError, Scenario,
                       generate)
from .sweep import (CSV_COLUMNS, SweepSpec, rows_to_csv, run_sweep, summarize,
                    write_files)


def _cmd_generate(args: argparse.Namespace) -> int:
    template = json.loads(Path(args.template).read_text())
    if args.law:
        template["law"] = args.law
    scenario = generate(template, args.seed)
    text = scenario.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = Scenario.load(args.scenario)
    metrics, events = run_scenario(scenario)
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {k: v for k, v in vars(metrics).items()}
    doc["per_task_comm"] = {str(k): v for k, v in metrics.per_task_comm.items()}
    (out_dir / "metrics.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.trace:
        with open(out_dir / "trace.jsonl", "w") as fh:
            for event in events:
                fh.write(event.to_json() + "\n")
    print(f"completed={metrics.tasks_completed} timed_out={metrics.tasks_timed_out} "
          f"ticks={metrics.ticks_elapsed} conflicts={metrics.conflict_frequency}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec.from_json(Path(args.spec).read_text())
    if args.trials:
        spec.trials = args.trials
    if args.law:
        spec.laws = [args.law]
    if args.seed is not None:
        spec.base_seed = args.seed
    rows, task_rows = run_sweep(spec)
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "rows.csv").write_text(rows_to_csv(rows, CSV_COLUMNS))
    if task_rows:
        from .sweep import PER_TASK_COLUMNS
        (out_dir / "per_task_rows.csv").write_text(
            rows_to_csv(task_rows, PER_TASK_COLUMNS))
    failed = sum(1 for r in rows if r.get("error"))
    print(f"rows={len(rows)} failed={failed} -> {out_dir / 'rows.csv'}")
    return 1 if failed else 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    with open(args.rows) as fh:
        rows = list(csv.DictReader(fh))
    task_rows = None
    if args.per_task and Path(args.per_task).exists():
        with open(args.per_task) as fh:
            task_rows = list(csv.DictReader(fh))
    files = summarize(rows, task_rows)
    out_dir = Path(args.out) if args.out else Path(".")
    write_files(files, out_dir)
    print(f"wrote {', '.join(sorted(files))} to {out_dir}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    with open(args.trace) as fh:
        for line in fh:
            event = json.loads(line)
            subjects = ",".join(str(s) for s in event["subjects"])
            detail = f"  {event['detail']}" if event.get("detail") else ""
            print(f"[{event['tick']:>5}] {event['kind']:<18} {subjects}{detail}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarmplan",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a concrete scenario from a template")
    p.add_argument("--template", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--law", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a batch of trials to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--law", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("summarize", help="aggregate sweep rows and emit plot data")
    p.add_argument("--rows", required=True)
    p.add_argument("--per-task", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("replay", help="pretty-print a trace file")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=_cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidScenarioError, InvalidTemplateError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

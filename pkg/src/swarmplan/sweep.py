"""Batch trial execution, CSV emission, and aggregate summaries.

A sweep crosses priority laws, team scales, and task-arrival styles over a
number of seeded trials, runs each concrete scenario, and emits one CSV
row per (variation, trial). Seeds are shared across laws so every law sees
the same initial batteries and placements. Output is byte-deterministic:
row order follows the sorted variation key and floats are serialized with
``repr``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .engine import run
from .scenario import InvalidTemplateError, generate

CSV_COLUMNS = [
    "law", "scale", "style", "trial", "seed",
    "conflict_frequency", "energy_moving", "energy_idle", "energy_comm",
    "energy_comm_negotiation", "total_distance",
    "residual_max", "residual_min", "residual_mean",
    "ticks", "tasks_completed", "tasks_timed_out", "error",
]

PER_TASK_COLUMNS = ["law", "scale", "style", "trial", "seed", "task", "comm"]

#: Team scale presets: name -> (robot count, task count).
SCALES = {
    "R5+T1": (5, 1),
    "R10+T2": (10, 2),
    "R15+T3": (15, 3),
    "R20+T3": (20, 3),
    "R20+T4": (20, 4),
}

#: Task arrival styles: how many tasks appear at each stage.
STYLES = {
    "static": None,      # all tasks at tick 0
    "1+1+1": (1, 1, 1),
    "2+1": (2, 1),
    "1+2": (1, 2),
}


@dataclass
class SweepSpec:
    template: dict
    laws: list[str]
    scales: list[str] = field(default_factory=lambda: ["R20+T3"])
    styles: list[str] = field(default_factory=lambda: ["static"])
    trials: int = 1
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise InvalidTemplateError("trials must be >= 1")
        for s in self.scales:
            if s not in SCALES:
                raise InvalidTemplateError(f"unknown scale {s!r}")
        for s in self.styles:
            if s not in STYLES:
                raise InvalidTemplateError(f"unknown style {s!r}")

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        try:
            doc = json.loads(text)
            return cls(template=doc["template"], laws=list(doc["laws"]),
                       scales=list(doc.get("scales", ["R20+T3"])),
                       styles=list(doc.get("styles", ["static"])),
                       trials=int(doc.get("trials", 1)),
                       base_seed=int(doc.get("base_seed", 0)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InvalidTemplateError(f"bad sweep spec: {exc}") from exc


def scale_template(template: dict, scale: str, style: str) -> dict:
    """Concretize a base template for one scale and arrival style.

    Task centers sit on a ring around the world center (first task due
    North, clockwise); required counts default to 4/5 of the team split
    evenly. Dynamic styles stagger arrival ticks by ``stage_gap``.
    """
    n_robots, n_tasks = SCALES[scale]
    world = float(template.get("world_size", 30.0))
    gap = int(template.get("stage_gap", 60))
    duration = int(template.get("task_duration", 5))
    timeout = int(template.get("task_timeout", 400))
    required = int(template.get("required_per_task",
                                max(1, (4 * n_robots) // (5 * n_tasks))))

    stages = STYLES[style]
    if stages is None:
        arrival_of = [0] * n_tasks
    else:
        if sum(stages) != n_tasks:
            raise InvalidTemplateError(
                f"style {style} describes {sum(stages)} tasks, scale has {n_tasks}")
        arrival_of = []
        for stage, count in enumerate(stages):
            arrival_of.extend([stage * gap] * count)

    cx = cy = world / 2.0
    ring = 0.3 * world
    tasks = []
    for k in range(n_tasks):
        theta = math.pi / 2.0 - 2.0 * math.pi * k / max(n_tasks, 1)
        tasks.append({
            "id": k + 1,
            "x": cx + ring * math.cos(theta),
            "y": cy + ring * math.sin(theta),
            "required": required,
            "duration": duration,
            "timeout": timeout,
            "arrival_tick": arrival_of[k],
        })

    out = dict(template)
    out["world_size"] = world
    out["n_robots"] = n_robots
    out["tasks"] = tasks
    return out


def run_sweep(spec: SweepSpec) -> tuple[list[dict], list[dict]]:
    """Run every (law, scale, style, trial) cell; never abort mid-sweep.

    Returns (metric rows, per-task communication rows). A failing run
    yields a row with its error message and empty metric fields.
    """
    rows: list[dict] = []
    task_rows: list[dict] = []
    for law in spec.laws:
        for scale in spec.scales:
            for style in spec.styles:
                for trial in range(spec.trials):
                    seed = spec.base_seed + trial
                    key = {"law": law, "scale": scale, "style": style,
                           "trial": trial, "seed": seed}
                    try:
                        template = scale_template(spec.template, scale, style)
                        template["law"] = law
                        scenario = generate(template, seed)
                        metrics, _ = run(scenario)
                    except Exception as exc:  # recorded per row, sweep continues
                        row = {c: "" for c in CSV_COLUMNS}
                        row.update(key)
                        row["error"] = f"{type(exc).__name__}: {exc}"
                        rows.append(row)
                        continue
                    row = dict(key)
                    row.update({
                        "conflict_frequency": metrics.conflict_frequency,
                        "energy_moving": repr(metrics.energy_moving),
                        "energy_idle": repr(metrics.energy_idle),
                        "energy_comm": repr(metrics.energy_comm),
                        "energy_comm_negotiation": repr(metrics.energy_comm_negotiation),
                        "total_distance": repr(metrics.total_distance),
                        "residual_max": repr(metrics.residual_max),
                        "residual_min": repr(metrics.residual_min),
                        "residual_mean": repr(metrics.residual_mean),
                        "ticks": metrics.ticks_elapsed,
                        "tasks_completed": metrics.tasks_completed,
                        "tasks_timed_out": metrics.tasks_timed_out,
                        "error": "",
                    })
                    rows.append(row)
                    for task_id, comm in metrics.per_task_comm.items():
                        task_rows.append({**key, "task": task_id, "comm": repr(comm)})
    return rows, task_rows


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in columns})
    return buf.getvalue()


_AGGREGATE_FIELDS = [
    "conflict_frequency", "energy_moving", "energy_idle", "energy_comm",
    "energy_comm_negotiation", "total_distance",
    "residual_max", "residual_min", "residual_mean",
]

#: Figure-family plot files and the row fields each one carries.
PLOT_FAMILIES = {
    "conflicts": ["conflict_frequency"],
    "energy_split": ["energy_moving", "energy_idle", "energy_comm",
                     "energy_comm_negotiation"],
    "distance": ["total_distance"],
    "residual_battery": ["residual_max", "residual_min", "residual_mean"],
}


def summarize(rows: list[dict], task_rows: list[dict] | None = None) -> dict[str, str]:
    """Aggregate rows per (law, scale, style) and build plot-data files.

    The spread estimator is the sample standard deviation (ddof=1; zero
    for a single row). Returns a mapping of file name to CSV text:
    ``summary.csv`` plus one file per figure family.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row.get("error"):
            continue
        groups.setdefault((row["law"], row["scale"], row["style"]), []).append(row)

    summary_rows = []
    for key in sorted(groups):
        law, scale, style = key
        agg: dict[str, object] = {"law": law, "scale": scale, "style": style,
                                  "n_trials": len(groups[key])}
        for name in _AGGREGATE_FIELDS:
            values = [float(r[name]) for r in groups[key]]
            agg[f"{name}_mean"] = repr(statistics.fmean(values))
            agg[f"{name}_sd"] = repr(statistics.stdev(values) if len(values) > 1 else 0.0)
        summary_rows.append(agg)

    columns = ["law", "scale", "style", "n_trials"]
    for name in _AGGREGATE_FIELDS:
        columns += [f"{name}_mean", f"{name}_sd"]
    files = {"summary.csv": rows_to_csv(summary_rows, columns)}

    for family, fields in PLOT_FAMILIES.items():
        fam_cols = ["law", "scale", "style"]
        for name in fields:
            fam_cols += [f"{name}_mean", f"{name}_sd"]
        files[f"{family}.csv"] = rows_to_csv(summary_rows, fam_cols)

    if task_rows:
        files["per_task_comm.csv"] = rows_to_csv(task_rows, PER_TASK_COLUMNS)
    return files


def write_files(files: dict[str, str], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        (out / name).write_text(files[name])

import csv
import io

import pytest

from swarmplan.scenario import InvalidTemplateError
from swarmplan.sweep import (CSV_COLUMNS, PER_TASK_COLUMNS, SCALES, STYLES,
                             SweepSpec, rows_to_csv, run_sweep, scale_template,
                             summarize, write_files)
from helpers import TEMPLATE


def spec(**overrides):
    fields = dict(template=dict(TEMPLATE), laws=["t_low_e"], scales=["R5+T1"],
                  styles=["static"], trials=1, base_seed=0)
    fields.update(overrides)
    return SweepSpec(**fields)


class TestSweepSpec:
    def test_known_scales_and_styles(self):
        assert SCALES["R5+T1"] == (5, 1)
        assert SCALES["R20+T4"] == (20, 4)
        assert STYLES["static"] is None
        assert STYLES["1+1+1"] == (1, 1, 1)

    def test_rejects_unknown_scale(self):
        with pytest.raises(InvalidTemplateError):
            spec(scales=["R99+T9"])

    def test_rejects_bad_trials(self):
        with pytest.raises(InvalidTemplateError):
            spec(trials=0)

    def test_from_json(self):
        doc = ('{"template": {"world_size": 24.0}, "laws": ["low_e"], '
               '"scales": ["R10+T2"], "trials": 3, "base_seed": 7}')
        s = SweepSpec.from_json(doc)
        assert s.laws == ["low_e"]
        assert s.trials == 3
        assert s.base_seed == 7

    def test_from_json_rejects_garbage(self):
        with pytest.raises(InvalidTemplateError):
            SweepSpec.from_json("{}")


class TestScaleTemplate:
    def test_static_defaults(self):
        t = scale_template(dict(TEMPLATE), "R20+T3", "static")
        assert t["n_robots"] == 20
        assert len(t["tasks"]) == 3
        # 4/5 of the team split across tasks: max(1, 80 // 15)
        assert all(task["required"] == 5 for task in t["tasks"])
        assert all(task["arrival_tick"] == 0 for task in t["tasks"])

    def test_first_task_due_north(self):
        t = scale_template(dict(TEMPLATE), "R15+T3", "static")
        first = t["tasks"][0]
        assert first["x"] == pytest.approx(12.0)
        assert first["y"] == pytest.approx(12.0 + 0.3 * 24.0)

    def test_dynamic_arrival_stagger(self):
        t = scale_template(dict(TEMPLATE), "R15+T3", "1+1+1")
        assert [task["arrival_tick"] for task in t["tasks"]] == [0, 60, 120]
        t = scale_template(dict(TEMPLATE), "R15+T3", "2+1")
        assert [task["arrival_tick"] for task in t["tasks"]] == [0, 0, 60]

    def test_style_task_count_mismatch(self):
        with pytest.raises(InvalidTemplateError):
            scale_template(dict(TEMPLATE), "R5+T1", "1+1+1")


class TestRunSweep:
    def test_row_count(self):
        rows, _ = run_sweep(spec(trials=3))
        assert len(rows) == 3
        assert [r["seed"] for r in rows] == [0, 1, 2]
        assert all(r["error"] == "" for r in rows)

    def test_error_row_keeps_sweep_alive(self):
        bad = spec(template={**TEMPLATE, "required_per_task": 50},
                   scales=["R5+T1", "R5+T1"])
        rows, _ = run_sweep(bad)
        assert len(rows) == 2
        assert all("InsufficientRobots" in r["error"] or "InvalidScenario"
                   in r["error"] for r in rows)

    def test_per_task_rows(self):
        rows, task_rows = run_sweep(spec(scales=["R10+T2"]))
        tasks_seen = {r["task"] for r in task_rows}
        assert tasks_seen == {1, 2}

    def test_determinism(self):
        a, ta = run_sweep(spec(trials=2))
        b, tb = run_sweep(spec(trials=2))
        assert rows_to_csv(a, CSV_COLUMNS) == rows_to_csv(b, CSV_COLUMNS)
        assert rows_to_csv(ta, PER_TASK_COLUMNS) == rows_to_csv(tb, PER_TASK_COLUMNS)


class TestCsvAndSummaries:
    def test_column_schema(self):
        rows, _ = run_sweep(spec())
        text = rows_to_csv(rows, CSV_COLUMNS)
        header = text.splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert len(parsed) == 1

    def test_summarize_single_row(self):
        rows, _ = run_sweep(spec())
        files = summarize(rows)
        summary = list(csv.DictReader(io.StringIO(files["summary.csv"])))
        assert len(summary) == 1
        assert summary[0]["n_trials"] == "1"
        assert float(summary[0]["conflict_frequency_sd"]) == 0.0
        assert float(summary[0]["conflict_frequency_mean"]) == float(
            rows[0]["conflict_frequency"])

    def test_summarize_two_values_sample_sd(self):
        base = {c: "" for c in CSV_COLUMNS}
        rows = []
        for trial, value in enumerate((1.0, 3.0)):
            row = dict(base, law="low_e", scale="R5+T1", style="static",
                       trial=trial, seed=trial, error="")
            for name in ("conflict_frequency", "energy_moving", "energy_idle",
                         "energy_comm", "energy_comm_negotiation",
                         "total_distance", "residual_max", "residual_min",
                         "residual_mean"):
                row[name] = repr(value)
            rows.append(row)
        files = summarize(rows)
        summary = list(csv.DictReader(io.StringIO(files["summary.csv"])))[0]
        assert float(summary["conflict_frequency_mean"]) == pytest.approx(2.0)
        assert float(summary["conflict_frequency_sd"]) == pytest.approx(
            1.4142135623730951)

    def test_plot_family_files(self):
        rows, task_rows = run_sweep(spec())
        files = summarize(rows, task_rows)
        assert set(files) == {"summary.csv", "conflicts.csv",
                              "energy_split.csv", "distance.csv",
                              "residual_battery.csv", "per_task_comm.csv"}

    def test_summarize_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_write_files(self, tmp_path):
        write_files({"a.csv": "x\n", "b.csv": "y\n"}, tmp_path / "out")
        assert (tmp_path / "out" / "a.csv").read_text() == "x\n"
        assert (tmp_path / "out" / "b.csv").read_text() == "y\n"

"""Scenario records, JSON schema, and deterministic scenario generation.

A scenario fully determines a run: robot placement and batteries, the task
schedule, the active priority law, communication mode, energy model, and
geometry parameters. Generation from a template samples batteries from a
clamped Gaussian and positions uniformly (with a minimum-separation
rejection loop), all driven by the seed so generation is reproducible.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .cata import CataWeights
from .comms import COMPLETE
from .priority import PriorityLaw
from .world import EnergyModel, Position, Task


class InvalidScenarioError(Exception):
    """Scenario failed validation; message lists the offending fields."""


class InvalidTemplateError(Exception):
    """Generator template failed validation."""


@dataclass(frozen=True)
class RobotSpec:
    id: int
    x: float
    y: float
    battery: float


@dataclass
class Scenario:
    world_size: float
    robots: list[RobotSpec]
    tasks: list[Task]
    law: PriorityLaw = PriorityLaw.T_LOW_E
    task_priority_order: list[int] | None = None
    comm_range: float | str = COMPLETE
    energy: EnergyModel = field(default_factory=EnergyModel)
    step_length: float = 1.0
    safety_radius: float = 0.5
    formation_radius: float = 5.0
    seed: int = 0
    max_ticks: int = 10_000
    cata: CataWeights = field(default_factory=CataWeights)
    conflict_negotiation: bool = True

    def validate(self) -> None:
        problems = []
        ids = [r.id for r in self.robots]
        if len(set(ids)) != len(ids):
            problems.append("robots: duplicate ids")
        tids = [t.id for t in self.tasks]
        if len(set(tids)) != len(tids):
            problems.append("tasks: duplicate ids")
        for r in self.robots:
            if not (0.0 <= r.x <= self.world_size and 0.0 <= r.y <= self.world_size):
                problems.append(f"robot {r.id}: position outside world bounds")
            if not (0.0 <= r.battery <= 100.0):
                problems.append(f"robot {r.id}: battery outside [0, 100]")
        for t in self.tasks:
            if t.required > len(self.robots):
                problems.append(f"task {t.id}: requires more robots than exist")
        arrivals = [t.arrival_tick for t in self.tasks]
        if arrivals != sorted(arrivals):
            problems.append("tasks: arrival ticks must be non-decreasing")
        if self.task_priority_order is not None and \
                sorted(self.task_priority_order) != sorted(tids):
            problems.append("task_priority_order: not a permutation of task ids")
        if self.comm_range != COMPLETE and not (
                isinstance(self.comm_range, (int, float)) and self.comm_range > 0):
            problems.append("comm_range: must be positive or 'complete'")
        if self.step_length <= 0 or self.safety_radius <= 0 or self.formation_radius <= 0:
            problems.append("geometry: step_length/safety_radius/formation_radius must be positive")
        if self.max_ticks < 1:
            problems.append("max_ticks: must be >= 1")
        if problems:
            raise InvalidScenarioError("; ".join(problems))

    def to_json(self) -> str:
        doc = {
            "world_size": self.world_size,
            "robots": [{"id": r.id, "x": r.x, "y": r.y, "battery": r.battery}
                       for r in self.robots],
            "tasks": [{"id": t.id, "x": t.center.x, "y": t.center.y,
                       "required": t.required, "duration": t.duration,
                       "timeout": t.timeout, "arrival_tick": t.arrival_tick}
                      for t in self.tasks],
            "law": self.law.value,
            "task_priority_order": self.task_priority_order,
            "comm_range": self.comm_range,
            "energy": {"move_cost": self.energy.move_cost,
                       "comm_cost": self.energy.comm_cost,
                       "idle_cost": self.energy.idle_cost},
            "step_length": self.step_length,
            "safety_radius": self.safety_radius,
            "formation_radius": self.formation_radius,
            "seed": self.seed,
            "max_ticks": self.max_ticks,
            "cata": {"base": self.cata.base, "w_d": self.cata.w_d,
                     "w_c": self.cata.w_c},
            "conflict_negotiation": self.conflict_negotiation,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidScenarioError(f"not valid JSON: {exc}") from exc
        try:
            scenario = cls(
                world_size=float(doc["world_size"]),
                robots=[RobotSpec(id=int(r["id"]), x=float(r["x"]),
                                  y=float(r["y"]), battery=float(r["battery"]))
                        for r in doc["robots"]],
                tasks=[Task(id=int(t["id"]),
                            center=Position(float(t["x"]), float(t["y"])),
                            required=int(t["required"]),
                            duration=int(t["duration"]),
                            timeout=int(t["timeout"]),
                            arrival_tick=int(t.get("arrival_tick", 0)))
                       for t in doc["tasks"]],
                law=PriorityLaw(doc.get("law", "t_low_e")),
                task_priority_order=doc.get("task_priority_order"),
                comm_range=(doc.get("comm_range", COMPLETE)
                            if doc.get("comm_range", COMPLETE) == COMPLETE
                            else float(doc["comm_range"])),
                energy=EnergyModel(**doc.get("energy", {})),
                step_length=float(doc.get("step_length", 1.0)),
                safety_radius=float(doc.get("safety_radius", 0.5)),
                formation_radius=float(doc.get("formation_radius", 5.0)),
                seed=int(doc.get("seed", 0)),
                max_ticks=int(doc.get("max_ticks", 10_000)),
                cata=CataWeights(**doc.get("cata", {})),
                conflict_negotiation=bool(doc.get("conflict_negotiation", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScenarioError(f"bad scenario field: {exc}") from exc
        scenario.validate()
        return scenario

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_json(Path(path).read_text())


def generate(template: dict, seed: int) -> Scenario:
    """Build a concrete scenario from a template, deterministically.

    Template fields: ``world_size``, ``n_robots``, ``battery_mean``,
    ``battery_sd`` (clamped Gaussian, [50, 100]), ``tasks`` (as in the
    scenario schema), plus any scenario field to pass through. Robot
    positions are sampled uniformly unless ``positions`` lists them
    explicitly; sampling rejects placements closer than twice the safety
    radius so the starting configuration already satisfies separation.
    """
    try:
        world = float(template["world_size"])
        n_robots = int(template["n_robots"])
        mean = float(template.get("battery_mean", 90.0))
        sd = float(template.get("battery_sd", 10.0))
        task_docs = template["tasks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTemplateError(f"bad template field: {exc}") from exc
    if n_robots < 1:
        raise InvalidTemplateError("n_robots must be >= 1")

    rng = random.Random(seed)
    batteries = [min(100.0, max(50.0, rng.gauss(mean, sd))) for _ in range(n_robots)]

    safety_radius = float(template.get("safety_radius", 0.5))
    if "positions" in template:
        positions = [(float(x), float(y)) for x, y in template["positions"]]
        if len(positions) != n_robots:
            raise InvalidTemplateError("positions length != n_robots")
    else:
        positions = _sample_positions(rng, n_robots, world, 2.0 * safety_radius)

    robots = [RobotSpec(id=i, x=positions[i][0], y=positions[i][1],
                        battery=batteries[i]) for i in range(n_robots)]
    tasks = [Task(id=int(t["id"]), center=Position(float(t["x"]), float(t["y"])),
                  required=int(t["required"]), duration=int(t["duration"]),
                  timeout=int(t["timeout"]), arrival_tick=int(t.get("arrival_tick", 0)))
             for t in task_docs]

    scenario = Scenario(
        world_size=world,
        robots=robots,
        tasks=tasks,
        law=PriorityLaw(template.get("law", "t_low_e")),
        task_priority_order=template.get("task_priority_order"),
        comm_range=(template.get("comm_range", COMPLETE)
                    if template.get("comm_range", COMPLETE) == COMPLETE
                    else float(template["comm_range"])),
        energy=EnergyModel(**template.get("energy", {})),
        step_length=float(template.get("step_length", 1.0)),
        safety_radius=safety_radius,
        formation_radius=float(template.get("formation_radius", 5.0)),
        seed=seed,
        max_ticks=int(template.get("max_ticks", 10_000)),
        cata=CataWeights(**template.get("cata", {})),
        conflict_negotiation=bool(template.get("conflict_negotiation", True)),
    )
    scenario.validate()
    return scenario


def _sample_positions(rng: random.Random, n: int, world: float,
                      min_gap: float) -> list[tuple[float, float]]:
    positions: list[tuple[float, float]] = []
    attempts = 0
    while len(positions) < n:
        attempts += 1
        if attempts > 10_000 * n:
            raise InvalidTemplateError("could not place robots with required separation")
        x, y = rng.uniform(0.0, world), rng.uniform(0.0, world)
        if all(math.hypot(x - px, y - py) >= min_gap for px, py in positions):
            positions.append((x, y))
    return positions

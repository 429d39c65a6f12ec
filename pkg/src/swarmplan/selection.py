"""Grouping robots to tasks by cutting a priority-ordered sequence.

Robots are first ordered by the active priority law, tasks by priority
rank. The ordered robot sequence is then cut into contiguous blocks, one
per task, sized exactly by each task's required count; a dynamic program
places the cut points (surplus robots may be skipped between blocks) to
minimize the total estimated moving energy. An exhaustive oracle over
unrestricted groupings measures the contiguity gap in tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .priority import PriorityLaw, compile_law, sort_queue
from .world import EnergyModel, RobotState, Task, euclidean


class InsufficientRobotsError(Exception):
    """Fewer alive robots than the sum of the tasks' required counts."""


@dataclass(frozen=True)
class SelectionPlan:
    """Mapping of every robot to its task, ``None`` marking surplus."""

    assignment: Mapping[int, int | None]
    proposer: int

    def group(self, task_id: int) -> list[int]:
        return sorted(r for r, t in self.assignment.items() if t == task_id)


def estimate_cost(
    robot: RobotState,
    task: Task,
    model: EnergyModel,
    step_length: float = 1.0,
) -> float:
    """Estimated moving energy for the robot to reach the task center."""
    steps = math.ceil(euclidean(robot.pos, task.center) / step_length)
    return model.move_cost * steps


def select(
    robots: Sequence[RobotState],
    tasks: Sequence[Task],
    law: PriorityLaw,
    model: EnergyModel,
    context: Mapping[int, Mapping[str, float]],
    step_length: float = 1.0,
    task_order: Sequence[int] | None = None,
    proposer: int = -1,
) -> SelectionPlan:
    """Partition ``robots`` over ``tasks`` by the law-ordered linear cut.

    ``context`` supplies the per-robot sort keys for the law. ``task_order``
    overrides the default priority ranking (ascending task id). Raises
    :class:`InsufficientRobotsError` when the required counts cannot be met.
    """
    if not tasks:
        raise ValueError("no tasks to select for")
    alive = [r for r in robots if r.alive]
    need = sum(t.required for t in tasks)
    if need > len(alive):
        raise InsufficientRobotsError(f"need {need} robots, have {len(alive)} alive")

    ranked_tasks = _rank_tasks(tasks, task_order)
    ordered_ids = sort_queue([r.id for r in alive], context, compile_law(law))
    by_id = {r.id: r for r in alive}
    ordered = [by_id[i] for i in ordered_ids]

    cost = [[estimate_cost(r, t, model, step_length) for t in ranked_tasks]
            for r in ordered]
    blocks = _min_cost_cut(cost, [t.required for t in ranked_tasks])

    assignment: dict[int, int | None] = {r.id: None for r in robots}
    for j, block in enumerate(blocks):
        for i in block:
            assignment[ordered[i].id] = ranked_tasks[j].id
    return SelectionPlan(assignment=assignment, proposer=proposer)


def _rank_tasks(tasks: Sequence[Task], task_order: Sequence[int] | None) -> list[Task]:
    if task_order is None:
        return sorted(tasks, key=lambda t: t.id)
    rank = {tid: k for k, tid in enumerate(task_order)}
    return sorted(tasks, key=lambda t: rank[t.id])


def _min_cost_cut(cost: list[list[float]], sizes: list[int]) -> list[range]:
    """Choose contiguous, in-order blocks of the given sizes minimizing cost.

    ``cost[i][j]`` is robot i's cost toward task j. Robots between blocks
    are skipped (left unassigned). Returns one index range per task.
    """
    m, k = len(cost), len(sizes)
    inf = float("inf")
    # f[i][j]: min cost using the first i robots with the first j blocks placed.
    f = [[inf] * (k + 1) for _ in range(m + 1)]
    choice = [[False] * (k + 1) for _ in range(m + 1)]  # block j ends at robot i
    for i in range(m + 1):
        f[i][0] = 0.0
    for j in range(1, k + 1):
        s = sizes[j - 1]
        for i in range(m + 1):
            if i >= 1 and f[i - 1][j] < f[i][j]:
                f[i][j] = f[i - 1][j]
            if i >= s and f[i - s][j - 1] < inf:
                c = f[i - s][j - 1] + sum(cost[x][j - 1] for x in range(i - s, i))
                if c < f[i][j]:
                    f[i][j] = c
                    choice[i][j] = True
    blocks: list[range] = []
    i, j = m, k
    while j > 0:
        if choice[i][j]:
            blocks.append(range(i - sizes[j - 1], i))
            i -= sizes[j - 1]
            j -= 1
        else:
            i -= 1
    blocks.reverse()
    return blocks


def selection_oracle(
    robots: Sequence[RobotState],
    tasks: Sequence[Task],
    model: EnergyModel,
    step_length: float = 1.0,
) -> tuple[dict[int, int | None], float]:
    """Exhaustive minimum-cost grouping, contiguity not required.

    Desk-scale only (<= 10 robots, <= 3 tasks); used as the independent
    reference that bounds the planner's cost from below.
    """
    alive = [r for r in robots if r.alive]
    if len(alive) > 10 or len(tasks) > 3:
        raise ValueError("oracle limited to 10 robots / 3 tasks")
    need = sum(t.required for t in tasks)
    if need > len(alive):
        raise InsufficientRobotsError(f"need {need} robots, have {len(alive)} alive")

    ids = [r.id for r in alive]
    by_id = {r.id: r for r in alive}
    ordered_tasks = sorted(tasks, key=lambda t: t.id)
    best_cost = float("inf")
    best: dict[int, int | None] = {}

    def recurse(remaining: list[int], idx: int, acc: float,
                partial: dict[int, int | None]) -> None:
        nonlocal best_cost, best
        if acc >= best_cost:
            return
        if idx == len(ordered_tasks):
            if acc < best_cost:
                best_cost = acc
                best = dict(partial)
                for i in remaining:
                    best[i] = None
            return
        task = ordered_tasks[idx]
        for combo in itertools.combinations(remaining, task.required):
            extra = sum(estimate_cost(by_id[i], task, model, step_length)
                        for i in combo)
            for i in combo:
                partial[i] = task.id
            rest = [i for i in remaining if i not in combo]
            recurse(rest, idx + 1, acc + extra, partial)
            for i in combo:
                del partial[i]

    recurse(ids, 0, 0.0, {})
    return best, best_cost


def plan_cost(
    plan: SelectionPlan,
    robots: Sequence[RobotState],
    tasks: Sequence[Task],
    model: EnergyModel,
    step_length: float = 1.0,
) -> float:
    """Total estimated moving energy of a selection plan."""
    by_robot = {r.id: r for r in robots}
    by_task = {t.id: t for t in tasks}
    return sum(
        estimate_cost(by_robot[r], by_task[t], model, step_length)
        for r, t in plan.assignment.items() if t is not None
    )

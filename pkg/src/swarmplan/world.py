"""Core domain records: positions, robots, tasks, and the energy ledger.

Everything downstream (gossip, planning, the tick loop) works in terms of
these value types. Energy accounting is centralized in :class:`EnergyLedger`
so that the conservation invariant (initial battery - current battery ==
ledger sum, per robot) can be checked exactly after any run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class Position:
    """A point on the continuous 2-D plane, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")


def euclidean(a: Position, b: Position) -> float:
    """Straight-line distance between two points, in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def polygon_vertices(center: Position, n: int, radius: float) -> list[Position]:
    """Vertices of a regular n-gon around ``center``.

    Vertex 0 sits due North of the center; subsequent vertices follow
    clockwise. Requires ``n >= 1`` and ``radius > 0``.
    """
    if n < 1:
        raise ValueError("polygon needs at least one vertex")
    if radius <= 0:
        raise ValueError("polygon radius must be positive")
    out = []
    for k in range(n):
        theta = math.pi / 2.0 - 2.0 * math.pi * k / n
        out.append(Position(center.x + radius * math.cos(theta),
                            center.y + radius * math.sin(theta)))
    return out


@dataclass
class RobotState:
    """Per-robot mutable state for one simulation run.

    ``group`` is the id of the task the robot is committed to (None while
    unassigned), ``slot`` the polygon vertex index agreed in the formation
    phase, and ``goal`` the concrete vertex position it is routing toward.
    """

    id: int
    pos: Position
    battery: float
    group: int | None = None
    slot: int | None = None
    goal: Position | None = None
    path: list[Position] = field(default_factory=list)

    @property
    def alive(self) -> bool:
        return self.battery > 0.0


@dataclass(frozen=True)
class Task:
    """A task to be served by ``required`` robots holding formation.

    The task id doubles as its default priority rank (lower id = higher
    priority) unless the scenario supplies an explicit priority order.
    ``duration`` is the number of consecutive ticks the full formation must
    hold at the vertices; ``timeout`` is the abandonment deadline measured
    from ``arrival_tick``.
    """

    id: int
    center: Position
    required: int
    duration: int
    timeout: int
    arrival_tick: int = 0

    def __post_init__(self) -> None:
        if self.required < 1:
            raise ValueError(f"task {self.id}: required must be >= 1")
        if self.duration > self.timeout:
            raise ValueError(f"task {self.id}: duration exceeds timeout")
        if self.arrival_tick < 0:
            raise ValueError(f"task {self.id}: negative arrival tick")


@dataclass(frozen=True)
class EnergyModel:
    """Battery cost of each action kind, in percent-points.

    Defaults: 0.1 per moving step, 0.01 per communication round, 0.04 per
    stationary tick.
    """

    move_cost: float = 0.1
    comm_cost: float = 0.01
    idle_cost: float = 0.04

    def __post_init__(self) -> None:
        if min(self.move_cost, self.comm_cost, self.idle_cost) < 0:
            raise ValueError("energy costs must be non-negative")


class ChargeKind(Enum):
    MOVE = "move"
    IDLE = "idle"
    COMM_ROUND = "comm_round"


class EnergyLedger:
    """Per-robot accumulators of energy spent, split by cause.

    Communication energy is split between plain knowledge gossip and
    negotiation traffic (plan exchange and conflict resolution), since the
    two are reported separately. A per-task communication accumulator
    records negotiation spend attributable to a specific task.
    """

    def __init__(self) -> None:
        self.initial: dict[int, float] = {}
        self.moving: dict[int, float] = {}
        self.idle: dict[int, float] = {}
        self.comm_gossip: dict[int, float] = {}
        self.comm_negotiation: dict[int, float] = {}
        self.per_task_comm: dict[int, float] = {}
        self.dropped: list[tuple[int, ChargeKind]] = []

    def register(self, robot: RobotState) -> None:
        self.initial[robot.id] = robot.battery
        for acc in (self.moving, self.idle, self.comm_gossip, self.comm_negotiation):
            acc[robot.id] = 0.0

    def charge(
        self,
        robot: RobotState,
        kind: ChargeKind,
        model: EnergyModel,
        *,
        negotiation: bool = False,
        task: int | None = None,
    ) -> RobotState:
        """Deduct the cost of one action from ``robot`` and record it.

        Charging a dead robot is a no-op recorded in ``dropped``. The
        battery clamps at zero; only the actually-deducted amount enters
        the accumulators, so conservation holds exactly.
        """
        if not robot.alive:
            self.dropped.append((robot.id, kind))
            return robot
        cost = {
            ChargeKind.MOVE: model.move_cost,
            ChargeKind.IDLE: model.idle_cost,
            ChargeKind.COMM_ROUND: model.comm_cost,
        }[kind]
        spent = min(cost, robot.battery)
        robot.battery -= spent
        if kind is ChargeKind.MOVE:
            self.moving[robot.id] += spent
        elif kind is ChargeKind.IDLE:
            self.idle[robot.id] += spent
        elif negotiation:
            self.comm_negotiation[robot.id] += spent
            if task is not None:
                self.per_task_comm[task] = self.per_task_comm.get(task, 0.0) + spent
        else:
            self.comm_gossip[robot.id] += spent
        return robot

    def spent(self, robot_id: int) -> float:
        return (self.moving[robot_id] + self.idle[robot_id]
                + self.comm_gossip[robot_id] + self.comm_negotiation[robot_id])

    def conservation_error(self, robot: RobotState) -> float:
        """Absolute gap between battery drop and recorded spend."""
        return abs((self.initial[robot.id] - robot.battery) - self.spent(robot.id))

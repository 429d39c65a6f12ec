"""Per-tick motion: straight-line steps, conflict detection, clustering.

The world is obstacle-free, so a robot's path is the straight segment to
its goal, advanced ``step_length`` per tick. Two robots conflict when
their intended motion segments for the tick pass within twice the safety
radius. Conflicting pairs are merged into clusters with union-find; each
cluster is resolved by letting only its highest-priority member move.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .world import Position, RobotState, euclidean


class MotionAction(Enum):
    MOVE_STEP = "move"
    STOP = "stop"


@dataclass(frozen=True)
class ConflictQueue:
    """One cluster of mutually conflicting robots at a given tick."""

    members: frozenset[int]
    tick: int = 0

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError("conflict cluster needs at least two members")


def next_step(robot: RobotState, goal: Position, step_length: float) -> Position:
    """Advance ``step_length`` straight toward the goal, clamping at it."""
    d = euclidean(robot.pos, goal)
    if d <= step_length:
        return goal
    f = step_length / d
    return Position(robot.pos.x + f * (goal.x - robot.pos.x),
                    robot.pos.y + f * (goal.y - robot.pos.y))


def _segment_distance(p1: Position, p2: Position,
                      q1: Position, q2: Position) -> float:
    """Minimum distance between segments p1-p2 and q1-q2."""
    def sub(a, b):
        return (a.x - b.x, a.y - b.y)

    def cross(u, v):
        return u[0] * v[1] - u[1] * v[0]

    d1, d2 = sub(p2, p1), sub(q2, q1)
    r = sub(q1, p1)
    denom = cross(d1, d2)
    if denom != 0.0:
        t = cross(r, d2) / denom
        u = cross(r, d1) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return 0.0  # proper intersection
    return min(
        _point_segment_distance(p1, q1, q2),
        _point_segment_distance(p2, q1, q2),
        _point_segment_distance(q1, p1, p2),
        _point_segment_distance(q2, p1, p2),
    )


def _point_segment_distance(p: Position, a: Position, b: Position) -> float:
    ax, ay = b.x - a.x, b.y - a.y
    length_sq = ax * ax + ay * ay
    if length_sq == 0.0:
        return euclidean(p, a)
    t = ((p.x - a.x) * ax + (p.y - a.y) * ay) / length_sq
    t = max(0.0, min(1.0, t))
    return euclidean(p, Position(a.x + t * ax, a.y + t * ay))


def detect_conflicts(
    current: Mapping[int, Position],
    proposed: Mapping[int, Position],
    safety_radius: float,
) -> set[tuple[int, int]]:
    """Pairs whose proposed positions or motion segments come too close.

    A pair (i, j) is flagged when the proposed endpoints are closer than
    2 * safety_radius, or the segments current->proposed pass within that
    distance (covers head-on swaps whose endpoints look safe). Stationary
    robots participate with proposed == current.
    """
    limit = 2.0 * safety_radius
    ids = sorted(proposed)
    pairs: set[tuple[int, int]] = set()
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            i, j = ids[a], ids[b]
            if euclidean(proposed[i], proposed[j]) < limit or _segment_distance(
                    current[i], proposed[i], current[j], proposed[j]) < limit:
                pairs.add((i, j))
    return pairs


class UnionFind:
    """Disjoint sets over robot ids with path compression."""

    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        if x not in self.parent:
            self.parent[x] = x
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # deterministic: smaller root wins
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


def cluster_conflicts(pairs: Iterable[tuple[int, int]],
                      tick: int = 0) -> list[ConflictQueue]:
    """Connected components of the conflict relation, one cluster each."""
    uf = UnionFind()
    for i, j in pairs:
        uf.union(i, j)
    groups: dict[int, set[int]] = {}
    for i, j in sorted(pairs):
        groups.setdefault(uf.find(i), set()).update((i, j))
    return [ConflictQueue(members=frozenset(groups[root]), tick=tick)
            for root in sorted(groups)]


def resolve_cluster(cluster: ConflictQueue,
                    order: Sequence[int]) -> dict[int, MotionAction]:
    """Only the highest-priority member moves this tick; the rest stop."""
    if set(order) != set(cluster.members):
        raise ValueError("order must cover exactly the cluster members")
    return {rid: (MotionAction.MOVE_STEP if rid == order[0] else MotionAction.STOP)
            for rid in order}

"""Connectivity graph and synchronous gossip to information equilibrium.

Robots exchange knowledge with their neighbors in synchronous rounds until
every group member holds the datagram of every other member. The round
count is deterministic and equals the eccentricity of the group subgraph
(diameter for a whole-graph exchange).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .world import RobotState, euclidean

COMPLETE = "complete"


class DisconnectedGraphError(Exception):
    """The communication graph does not connect all alive robots."""


class GossipStalledError(Exception):
    """Gossip exceeded the diameter bound without reaching equilibrium."""


@dataclass(frozen=True)
class CommGraph:
    """Symmetric adjacency over robot ids, no self-loops."""

    adjacency: Mapping[int, frozenset[int]]

    def neighbors(self, robot_id: int) -> frozenset[int]:
        return self.adjacency[robot_id]

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(self.adjacency)


@dataclass
class KnowledgeSet:
    """One robot's local knowledge: a set of datagrams, own included."""

    owner: int
    items: set[Hashable] = field(default_factory=set)


def _connected(adjacency: Mapping[int, frozenset[int]], ids: Iterable[int]) -> bool:
    ids = set(ids)
    if not ids:
        return True
    seen = set()
    stack = [next(iter(sorted(ids)))]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        stack.extend(adjacency[i] & ids)
    return seen == ids


def build_graph(robots: Sequence[RobotState], comm_range: float | str) -> CommGraph:
    """Build the adjacency over alive robots.

    An edge joins two robots within ``comm_range`` meters, or every pair in
    ``COMPLETE`` mode. Raises :class:`DisconnectedGraphError` when the graph
    does not connect all alive robots, since gossip could never terminate.
    """
    if not robots:
        raise ValueError("need at least one robot")
    alive = [r for r in robots if r.alive]
    adjacency: dict[int, frozenset[int]] = {}
    for r in alive:
        if comm_range == COMPLETE:
            near = {o.id for o in alive if o.id != r.id}
        else:
            near = {o.id for o in alive
                    if o.id != r.id and euclidean(r.pos, o.pos) <= comm_range}
        adjacency[r.id] = frozenset(near)
    if not _connected(adjacency, adjacency.keys()):
        raise DisconnectedGraphError(
            f"comm graph disconnected over {sorted(adjacency)} at range {comm_range}")
    return CommGraph(adjacency)


def gossip(
    payloads: Mapping[int, Hashable],
    graph: CommGraph,
    group: set[int] | frozenset[int],
) -> tuple[dict[int, KnowledgeSet], int]:
    """Synchronous neighbor-union gossip until equilibrium within ``group``.

    Every member starts with its own datagram ``(member_id, payloads[id])``;
    each round all members simultaneously union the previous-round sets of
    their neighbors inside the group. Returns the equilibrium knowledge and
    the number of rounds executed (0 for a singleton, 1 on a complete graph).

    Raises :class:`GossipStalledError` after ``|group|`` rounds, which can
    only happen if the group subgraph is disconnected.
    """
    members = sorted(group)
    n = len(members)
    sets: dict[int, set[Hashable]] = {i: {(i, payloads[i])} for i in members}
    rounds = 0
    while any(len(sets[i]) != n for i in members):
        if rounds >= n:
            raise GossipStalledError(f"group {members} not connected, gossip stalled")
        prev = {i: set(sets[i]) for i in members}
        for i in members:
            for j in graph.neighbors(i):
                if j in group:
                    sets[i] |= prev[j]
        rounds += 1
    return {i: KnowledgeSet(owner=i, items=sets[i]) for i in members}, rounds

"""Distributed plan negotiation: propose, gossip, compare, escalate.

Every group member computes a plan from its own knowledge, the proposals
are spread to equilibrium, and each member checks whether all proposals
are identical under a canonical serialization. On disagreement the sort
criterion is escalated one level and knowledge gleaned from the received
proposals is merged in, after which deterministic planners must converge
(two iterations at most in practice, asserted throughout the tests).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, is_dataclass, asdict
from enum import Enum
from typing import Callable, Hashable, Mapping

from .comms import CommGraph, gossip
from .priority import ExhaustedCriteriaError, NeedsOrderQueue


class Phase(Enum):
    SELECTION = "selection"
    FORMATION = "formation"
    ROUTING = "routing"


class PhaseMismatchError(Exception):
    """Proposals from different phases were compared (engine bug)."""


class AgreementOutcome(Enum):
    END = "end"
    CONFLICT = "conflict"


@dataclass(frozen=True)
class Proposal:
    phase: Phase
    proposer: int
    payload: object
    criterion_depth: int = 0


def canonical(payload: object) -> str:
    """Serialize a payload so byte equality means plan equality.

    Keys are sorted, floats fixed to nine decimals, dataclasses and enums
    reduced to plain JSON values; the proposer field is excluded so that
    identical plans from different robots compare equal.
    """
    return json.dumps(_plain(payload), sort_keys=True, separators=(",", ":"))


def _plain(obj: object) -> object:
    if is_dataclass(obj) and not isinstance(obj, type):
        d = asdict(obj)
        d.pop("proposer", None)
        return _plain(d)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, float):
        return format(obj, ".9f")
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    return obj


def agreement(proposals: list[Proposal]) -> AgreementOutcome:
    """END when every payload serializes identically, CONFLICT otherwise."""
    if not proposals:
        raise ValueError("no proposals to compare")
    if len({p.phase for p in proposals}) > 1:
        raise PhaseMismatchError(f"mixed phases: {[p.phase for p in proposals]}")
    first = canonical(proposals[0].payload)
    if all(canonical(p.payload) == first for p in proposals[1:]):
        return AgreementOutcome.END
    return AgreementOutcome.CONFLICT


@dataclass
class NegotiationResult:
    payload: object
    iterations: int
    comm_rounds: int  # gossip rounds summed over all exchanges


Planner = Callable[[int, frozenset[Hashable], int], object]


def negotiate(
    phase: Phase,
    group: set[int] | frozenset[int],
    graph: CommGraph,
    order: NeedsOrderQueue,
    planner: Planner,
    knowledge: Mapping[int, frozenset[Hashable]],
) -> NegotiationResult:
    """Run proposal/gossip/agreement until the group holds one plan.

    ``planner(member, knowledge, depth)`` must be deterministic in its
    arguments. Proposals carry the proposer's knowledge items, so a member
    that planned from stale knowledge absorbs the difference after the
    first exchange and the loop converges. Raises
    :class:`ExhaustedCriteriaError` if conflicts outlast the criterion
    queue, which is impossible once knowledge is shared.
    """
    members = sorted(group)
    know: dict[int, frozenset[Hashable]] = {i: frozenset(knowledge[i]) for i in members}
    depth = 0
    iterations = 0
    comm_rounds = 0
    while True:
        if depth >= len(order):
            raise ExhaustedCriteriaError(f"negotiation stuck in phase {phase}")
        iterations += 1
        proposals = {
            i: Proposal(phase=phase, proposer=i,
                        payload=planner(i, know[i], depth),
                        criterion_depth=depth)
            for i in members
        }
        payloads = {i: (canonical(proposals[i].payload), know[i]) for i in members}
        equilibrium, rounds = gossip(payloads, graph, frozenset(members))
        comm_rounds += rounds
        # every member now sees the same multiset of proposals; the check is
        # identical at each, so evaluate it once
        items = sorted(equilibrium[members[0]].items, key=lambda item: item[0])
        received = [proposals[origin] for origin, _ in items]
        if agreement(received) is AgreementOutcome.END:
            return NegotiationResult(payload=proposals[members[0]].payload,
                                     iterations=iterations,
                                     comm_rounds=comm_rounds)
        merged = frozenset().union(*(k for _, (_, k) in items))
        know = {i: know[i] | merged for i in members}
        depth += 1

"""Priority laws compiled into deterministic lexicographic sort keys.

A law turns per-robot key data (battery, task rank, utility) into a total
order over robot ids. Safety is not a sort key: plans that would breach
the separation distance are vetoed before prioritization ever runs (see
the routing resolution in the engine). A robot below the low-battery
threshold withdraws from task selection entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Mapping

#: Battery percentage below which a robot withdraws from selection.
LOW_BATTERY_WITHDRAWAL = 5.0


class NeedLevel(IntEnum):
    """Prioritization levels, lowest gates the rest."""

    SAFETY = 1
    BASIC = 2
    CAPABILITY = 3
    TEAM = 4
    SELF_UPGRADE = 5


class PriorityLaw(Enum):
    """Named sort-key recipes; values match scenario files and CSV output."""

    HIGH_E = "high_e"
    LOW_E = "low_e"
    T_HIGH_E = "t_high_e"
    T_LOW_E = "t_low_e"
    CATA_U = "cata_u"


@dataclass(frozen=True)
class Criterion:
    """One sort key: context field name plus direction."""

    key: str
    descending: bool = False


#: An ordered sequence of criteria; the id tie-break is always last.
NeedsOrderQueue = tuple[Criterion, ...]


class ExhaustedCriteriaError(Exception):
    """Escalation ran past the last criterion of the order queue."""


_ID = Criterion("id")


def compile_law(law: PriorityLaw) -> NeedsOrderQueue:
    """Compile a law into its criterion sequence, ending in the id tie-break."""
    table = {
        PriorityLaw.HIGH_E: (Criterion("battery", descending=True), _ID),
        PriorityLaw.LOW_E: (Criterion("battery"), _ID),
        PriorityLaw.T_HIGH_E: (Criterion("task_rank"),
                               Criterion("battery", descending=True), _ID),
        PriorityLaw.T_LOW_E: (Criterion("task_rank"), Criterion("battery"), _ID),
        PriorityLaw.CATA_U: (Criterion("utility", descending=True),
                             Criterion("battery"), _ID),
    }
    return table[law]


def sort_queue(
    candidates: Iterable[int],
    context: Mapping[int, Mapping[str, float]],
    order: NeedsOrderQueue,
    depth: int | None = None,
) -> list[int]:
    """Order ``candidates`` by criteria ``order[0..depth]``, then by id.

    The trailing id tie-break guarantees a strict total order whatever the
    depth. ``depth`` defaults to the full queue. Raises
    :class:`ExhaustedCriteriaError` when ``depth >= len(order)``.
    """
    if depth is None:
        depth = len(order) - 1
    if depth >= len(order):
        raise ExhaustedCriteriaError(f"depth {depth} >= queue length {len(order)}")
    active = order[: depth + 1]

    def key(robot_id: int) -> tuple:
        parts = []
        for crit in active:
            if crit.key == "id":
                v = float(robot_id)
            else:
                v = float(context[robot_id][crit.key])
            parts.append(-v if crit.descending else v)
        parts.append(robot_id)
        return tuple(parts)

    return sorted(candidates, key=key)

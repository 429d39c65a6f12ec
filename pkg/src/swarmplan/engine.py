"""Deterministic tick loop driving perception, gossip, planning, motion.

Each tick runs a fixed phase order: task arrivals (revealed to the nearest
robot only), gossip to equilibrium, selection for free robots, formation
for newly grouped robots, routing with conflict clustering and resolution,
energy charging, and completion/timeout checks. Runs are pure functions of
the scenario: identical inputs give byte-identical metrics and traces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from . import cata as cata_mod
from .comms import COMPLETE, CommGraph, build_graph, gossip
from .formation import DistanceMatrix, formation_assign
from .negotiation import Phase, negotiate
from .priority import (LOW_BATTERY_WITHDRAWAL, PriorityLaw, compile_law,
                       sort_queue)
from .routing import cluster_conflicts, detect_conflicts, next_step
from .scenario import Scenario
from .selection import InsufficientRobotsError, SelectionPlan, select
from .world import (ChargeKind, EnergyLedger, Position, RobotState, Task,
                    euclidean, polygon_vertices)

_ARRIVAL_TOLERANCE = 0.1
_UNRANKED = 1_000_000  # task-rank sentinel for robots without a task
# ticks without progress toward a goal before a robot escalates its
# conflict-avoidance (full-circle detours, winner preference)
_STALL_ESCAPE = 12
_DETOUR_ANGLES = (30, 60, 90, 120, 150)
_ESCAPE_ANGLES = (30, 60, 90, 120, 150, 180, 210, 240, 270, 300, 330)
# per conflict cluster, each member shares the priority queue (one gossip
# round over the cluster) and then exchanges proposals once per agreement
# iteration (at most two with asymmetric knowledge)
_CLUSTER_COMM_ROUNDS = 3


class RobotPhase(Enum):
    IDLE = "idle"
    SELECTING = "selecting"
    FORMING = "forming"
    ROUTING = "routing"
    AT_SLOT = "at_slot"
    DEAD = "dead"


class EventKind(Enum):
    MOVE = "move"
    STOP = "stop"
    GOSSIP = "gossip"
    NEGOTIATE = "negotiate"
    AGREE = "agree"
    CONFLICT_DETECTED = "conflict_detected"
    TASK_ARRIVED = "task_arrived"
    TASK_COMPLETED = "task_completed"
    TASK_TIMED_OUT = "task_timed_out"
    ROBOT_DEAD = "robot_dead"
    SLOT_SWAP = "slot_swap"


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    kind: EventKind
    subjects: tuple[int, ...]
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps({"tick": self.tick, "kind": self.kind.value,
                           "subjects": list(self.subjects),
                           "detail": self.detail}, sort_keys=True)


@dataclass
class RunMetrics:
    conflict_frequency: int
    energy_moving: float
    energy_idle: float
    energy_comm: float
    energy_comm_negotiation: float
    total_distance: float
    per_task_comm: dict[int, float]
    residual_max: float
    residual_min: float
    residual_mean: float
    ticks_elapsed: int
    tasks_completed: int
    tasks_timed_out: int
    max_negotiation_iterations: int = 0


class _TaskStatus(Enum):
    PENDING = "pending"
    ACTIVE = "active"
    COMPLETED = "completed"
    TIMED_OUT = "timed_out"


class Engine:
    """Owns all mutable state for one run; strictly single-threaded."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.tick_no = 0
        self.robots: dict[int, RobotState] = {
            r.id: RobotState(id=r.id, pos=Position(r.x, r.y), battery=r.battery)
            for r in scenario.robots
        }
        self.tasks: dict[int, Task] = {t.id: t for t in scenario.tasks}
        self.status: dict[int, _TaskStatus] = {t.id: _TaskStatus.PENDING
                                               for t in scenario.tasks}
        self.hold: dict[int, int] = {t.id: 0 for t in scenario.tasks}
        self.vertices: dict[int, list[Position]] = {
            t.id: polygon_vertices(t.center, t.required, scenario.formation_radius)
            for t in scenario.tasks
        }
        self.known_tasks: dict[int, frozenset[int]] = {
            rid: frozenset() for rid in self.robots
        }
        self.phase: dict[int, RobotPhase] = {rid: RobotPhase.IDLE for rid in self.robots}
        self.ledger = EnergyLedger()
        for r in self.robots.values():
            self.ledger.register(r)
        self.events: list[TraceEvent] = []
        self._stall: dict[int, int] = {rid: 0 for rid in self.robots}
        self._goal_mark: dict[int, tuple[Position, float] | None] = {
            rid: None for rid in self.robots}
        self.conflict_frequency = 0
        self.total_distance = 0.0
        self.max_negotiation_iterations = 0
        self._rank = self._task_ranks()

    # ---------------------------------------------------------------- helpers

    def _task_ranks(self) -> dict[int, int]:
        order = self.scenario.task_priority_order
        if order is None:
            order = sorted(self.tasks)
        return {tid: k for k, tid in enumerate(order)}

    def _alive(self) -> list[RobotState]:
        return [r for r in self.robots.values() if r.alive]

    def _emit(self, kind: EventKind, subjects: tuple[int, ...], detail: str = "") -> None:
        self.events.append(TraceEvent(self.tick_no, kind, subjects, detail))

    def _context(self) -> dict[int, dict[str, float]]:
        """Per-robot sort-key data for the active law."""
        ctx: dict[int, dict[str, float]] = {}
        for r in self._alive():
            rank = self._rank.get(r.group, _UNRANKED) if r.group is not None else _UNRANKED
            util = 0.0
            if r.group is not None:
                task = self.tasks[r.group]
                util = (self.scenario.cata.base
                        - self.scenario.cata.w_d * euclidean(r.pos, task.center))
            ctx[r.id] = {"battery": r.battery, "task_rank": float(rank),
                         "utility": util}
        return ctx

    def _members(self, task_id: int) -> list[int]:
        return sorted(r.id for r in self.robots.values()
                      if r.alive and r.group == task_id)

    def _graph(self) -> CommGraph:
        return build_graph(self._alive(), self.scenario.comm_range)

    def _charge_comm(self, robot_ids: list[int], rounds: int, *,
                     negotiation: bool, task_of: dict[int, int | None] | None = None) -> None:
        for rid in sorted(robot_ids):
            robot = self.robots[rid]
            task = None
            if task_of is not None:
                task = task_of.get(rid)
            for _ in range(rounds):
                self.ledger.charge(robot, ChargeKind.COMM_ROUND, self.scenario.energy,
                                   negotiation=negotiation, task=task)

    # ------------------------------------------------------------------ tick

    def tick(self) -> None:
        self._phase_arrivals()
        graph = self._phase_gossip()
        if graph is not None:
            self._phase_selection(graph)
            self._phase_formation(graph)
        elif len(self._alive()) == 1:
            # a lone robot still plans for the tasks it knows
            self._phase_selection(None)
            self._phase_formation(None)
        moved = self._phase_routing()
        self._phase_charge(moved)
        self._phase_tasks()
        self.tick_no += 1

    # phase 1: new tasks reach the nearest alive robot only
    def _phase_arrivals(self) -> None:
        alive = self._alive()
        for tid in sorted(self.tasks):
            task = self.tasks[tid]
            if self.status[tid] is _TaskStatus.PENDING and task.arrival_tick <= self.tick_no:
                self.status[tid] = _TaskStatus.ACTIVE
                if alive:
                    nearest = min(alive, key=lambda r: (euclidean(r.pos, task.center), r.id))
                    self.known_tasks[nearest.id] |= {tid}
                    self._emit(EventKind.TASK_ARRIVED, (tid,),
                               f"revealed_to={nearest.id}")
                    self._preempt()

    def _preempt(self) -> None:
        """New work arrived: everyone not already holding a slot re-selects."""
        for r in self._alive():
            if self.phase[r.id] is not RobotPhase.AT_SLOT and r.group is not None:
                r.group = None
                r.slot = None
                r.goal = None
                self.phase[r.id] = RobotPhase.SELECTING

    # phase 2: gossip all robot state to equilibrium over the full graph
    def _phase_gossip(self) -> CommGraph | None:
        alive = self._alive()
        if len(alive) < 2:
            return None
        graph = self._graph()
        payloads = {r.id: tuple(sorted(self.known_tasks[r.id])) for r in alive}
        ids = frozenset(r.id for r in alive)
        equilibrium, rounds = gossip(payloads, graph, ids)
        union: frozenset[int] = frozenset()
        for _, known in equilibrium[min(ids)].items:
            union |= frozenset(known)
        for r in alive:
            self.known_tasks[r.id] = union
        if rounds:
            self._charge_comm([r.id for r in alive], rounds, negotiation=False)
            self._emit(EventKind.GOSSIP, tuple(sorted(ids)), f"rounds={rounds}")
        return graph

    # phase 3: free robots negotiate a selection plan
    def _phase_selection(self, graph: CommGraph | None) -> None:
        free = [r for r in self._alive()
                if r.group is None and r.battery >= LOW_BATTERY_WITHDRAWAL]
        if not free:
            return
        open_need = self._open_requirements()
        chosen = self._feasible_tasks(open_need, len(free))
        if not chosen:
            return

        context = self._context()
        law = self.scenario.law
        free_ids = sorted(r.id for r in free)
        scenario = self.scenario
        engine = self

        def planner(member: int, knowledge: frozenset, depth: int) -> SelectionPlan:
            known = [t for t in chosen if t.id in knowledge]
            if not known:
                return SelectionPlan(assignment={rid: None for rid in free_ids},
                                     proposer=member)
            robots = [engine.robots[rid] for rid in free_ids]
            if law is PriorityLaw.CATA_U:
                plan = cata_mod.cata_select(robots, known, context,
                                            weights=scenario.cata,
                                            safety_radius=scenario.safety_radius,
                                            proposer=member)
            else:
                plan = select(robots, known, law, scenario.energy, context,
                              step_length=scenario.step_length,
                              task_order=scenario.task_priority_order,
                              proposer=member)
            return plan

        members = frozenset(r.id for r in self._alive())
        knowledge = {rid: frozenset(self.known_tasks[rid]) for rid in members}
        if graph is None or len(members) == 1:
            only = min(members)
            plan = planner(only, knowledge[only], 0)
            iterations = 1
        else:
            result = negotiate(Phase.SELECTION, members, graph, compile_law(law),
                               planner, knowledge)
            plan = result.payload
            iterations = result.iterations
            task_of = {rid: plan.assignment.get(rid) for rid in members}
            self._charge_comm(sorted(members), result.comm_rounds,
                              negotiation=True, task_of=task_of)
            self._emit(EventKind.NEGOTIATE, tuple(sorted(members)),
                       f"phase=selection iterations={result.iterations}")
        self.max_negotiation_iterations = max(self.max_negotiation_iterations,
                                              iterations)

        assigned = []
        for rid in free_ids:
            tid = plan.assignment.get(rid)
            if tid is not None:
                robot = self.robots[rid]
                robot.group = tid
                self.phase[rid] = RobotPhase.FORMING
                assigned.append(rid)
            else:
                self.phase[rid] = RobotPhase.IDLE
        if assigned:
            self._emit(EventKind.AGREE, tuple(assigned), "phase=selection")

    def _open_requirements(self) -> dict[int, int]:
        open_need: dict[int, int] = {}
        for tid in sorted(self.tasks):
            if self.status[tid] is _TaskStatus.ACTIVE:
                missing = self.tasks[tid].required - len(self._members(tid))
                if missing > 0:
                    open_need[tid] = missing
        return open_need

    def _feasible_tasks(self, open_need: dict[int, int], budget: int) -> list[Task]:
        """Open tasks in priority order that fit the free-robot budget."""
        chosen: list[Task] = []
        for tid in sorted(open_need, key=lambda t: (self._rank.get(t, _UNRANKED), t)):
            if open_need[tid] <= budget:
                base = self.tasks[tid]
                chosen.append(Task(id=base.id, center=base.center,
                                   required=open_need[tid], duration=base.duration,
                                   timeout=base.timeout,
                                   arrival_tick=base.arrival_tick))
                budget -= open_need[tid]
        return chosen

    # phase 4: grouped robots without a slot negotiate vertex assignments
    def _phase_formation(self, graph: CommGraph | None) -> None:
        context = self._context()
        order = compile_law(self.scenario.law)
        for tid in sorted(self.tasks):
            if self.status[tid] is not _TaskStatus.ACTIVE:
                continue
            members = self._members(tid)
            if len(members) != self.tasks[tid].required:
                continue
            free = [rid for rid in members if self.robots[rid].slot is None]
            if not free:
                continue
            taken = {self.robots[rid].slot for rid in members} - {None}
            open_vertices = [v for v in range(self.tasks[tid].required)
                             if v not in taken]
            verts = self.vertices[tid]
            matrix = DistanceMatrix.build([self.robots[rid] for rid in free],
                                          [verts[v] for v in open_vertices])
            queue = sort_queue(free, context, order)
            engine = self

            def planner(member: int, knowledge: frozenset, depth: int):
                return formation_assign(queue, matrix, task=tid, proposer=member)

            if graph is None or len(free) == 1:
                plan = planner(free[0], frozenset(), 0)
                iterations = 1
            else:
                knowledge = {rid: frozenset(engine.known_tasks[rid]) for rid in free}
                result = negotiate(Phase.FORMATION, frozenset(free), graph, order,
                                   planner, knowledge)
                plan = result.payload
                iterations = result.iterations
                self._charge_comm(free, result.comm_rounds, negotiation=True,
                                  task_of={rid: tid for rid in free})
                self._emit(EventKind.NEGOTIATE, tuple(free),
                           f"phase=formation task={tid} iterations={result.iterations}")
            self.max_negotiation_iterations = max(self.max_negotiation_iterations,
                                                  iterations)
            for rid, col in plan.slot_of.items():
                vertex = open_vertices[col]
                robot = self.robots[rid]
                robot.slot = vertex
                robot.goal = verts[vertex]
                robot.path = [verts[vertex]]
                self.phase[rid] = RobotPhase.ROUTING
            self._emit(EventKind.AGREE, tuple(free), f"phase=formation task={tid}")
        self._rebalance_slots()

    def _rebalance_slots(self) -> None:
        """Swap vertex assignments between groupmates when it shortens both
        journeys combined.

        The greedy assignment can leave robot A parked next to B's vertex
        while its own vertex lies behind B; the two then block each other
        indefinitely. Distance-reducing 2-opt swaps strictly shrink total
        remaining travel, so the rebalance terminates and cannot oscillate.

        This is formation-stage conflict avoidance and belongs to the
        needs-hierarchy laws; the utility-matrix baseline considers
        conflicts only while routing, so it keeps whatever vertex
        assignment the greedy pass produced.
        """
        if self.scenario.law is PriorityLaw.CATA_U:
            return
        for tid in sorted(self.tasks):
            if self.status[tid] is not _TaskStatus.ACTIVE:
                continue
            verts = self.vertices[tid]
            en_route = [rid for rid in self._members(tid)
                        if self.robots[rid].slot is not None
                        and self.phase[rid] is not RobotPhase.AT_SLOT]
            improved = True
            while improved:
                improved = False
                for i, a in enumerate(en_route):
                    for b in en_route[i + 1:]:
                        ra, rb = self.robots[a], self.robots[b]
                        now = (euclidean(ra.pos, verts[ra.slot])
                               + euclidean(rb.pos, verts[rb.slot]))
                        swapped = (euclidean(ra.pos, verts[rb.slot])
                                   + euclidean(rb.pos, verts[ra.slot]))
                        if swapped < now - 1e-9:
                            ra.slot, rb.slot = rb.slot, ra.slot
                            ra.goal, ra.path = verts[ra.slot], [verts[ra.slot]]
                            rb.goal, rb.path = verts[rb.slot], [verts[rb.slot]]
                            self._emit(EventKind.SLOT_SWAP, (a, b), f"task={tid}")
                            improved = True

    # phase 5: routing with conflict clustering and safe execution
    def _phase_routing(self) -> dict[int, Position]:
        """Decide final positions for this tick; returns executed targets."""
        alive = self._alive()
        current = {r.id: r.pos for r in alive}
        intents: dict[int, Position] = {}
        wants_move: set[int] = set()
        for r in alive:
            if r.goal is not None and euclidean(r.pos, r.goal) > 0.0:
                intents[r.id] = next_step(r, r.goal, self.scenario.step_length)
                wants_move.add(r.id)
        for r in alive:
            if r.id in wants_move:
                continue
            yield_step = self._yield_step(r, intents, wants_move)
            if yield_step is not None:
                intents[r.id] = yield_step
                wants_move.add(r.id)
            else:
                intents[r.id] = r.pos

        context = self._context()
        order = compile_law(self.scenario.law)

        if not self.scenario.conflict_negotiation:
            return intents

        if len(alive) >= 2:
            pairs = detect_conflicts(current, intents, self.scenario.safety_radius)
            clusters = cluster_conflicts(pairs, tick=self.tick_no)
            for cluster in clusters:
                self.conflict_frequency += 1
                members = sorted(cluster.members)
                self._emit(EventKind.CONFLICT_DETECTED, tuple(members))
                queue = sort_queue(members, context, order)
                # the cluster's single mover is its highest-priority member
                # that wants to move and is not boxed in by the members that
                # will hold place; stationary members never move
                moving = [rid for rid in queue if rid in wants_move]
                winner = None
                limit = 2.0 * self.scenario.safety_radius + 1e-6

                def _blocked(rid: int) -> bool:
                    return any(other != rid and
                               euclidean(intents[rid], current[other]) < limit
                               for other in members)

                def _pinned(rid: int) -> bool:
                    # a mover whose goal is held by a stopped cluster-mate can
                    # only orbit it; someone who can finish should move instead
                    goal = self.robots[rid].goal
                    return goal is not None and any(
                        other != rid and euclidean(goal, current[other]) < limit
                        for other in members)

                def _can_step(rid: int) -> bool:
                    # a winner who can neither step directly nor detour just
                    # freezes the whole cluster for the tick
                    robot = self.robots[rid]
                    candidates = [intents[rid]]
                    toward = (robot.goal if robot.goal is not None
                              else intents[rid])
                    for degrees in self._detour_angles(rid):
                        cand = self._rotated_step(robot, math.radians(degrees),
                                                  toward)
                        if cand is not None:
                            candidates.append(cand)
                    return any(
                        all(euclidean(cand, current[other]) >= limit
                            for other in current if other != rid)
                        for cand in candidates)

                # a tightly packed stalled cluster cannot advance one robot
                # at a time: nobody can step until neighbors make room. Relax
                # to all-movers; separation enforcement still guarantees the
                # executed positions keep the safety distance
                if moving and max(self._stall.get(rid, 0)
                                  for rid in moving) >= _STALL_ESCAPE:
                    task_of = {rid: self.robots[rid].group for rid in members}
                    self._charge_comm(members, _CLUSTER_COMM_ROUNDS,
                                      negotiation=True, task_of=task_of)
                    continue

                for rid in moving:
                    if not _blocked(rid) and not _pinned(rid):
                        winner = rid
                        break
                if winner is None:
                    # blocked movers may still escape through a detour
                    # rotation, so prefer any unpinned mover with an
                    # executable step over an orbiter or a frozen robot
                    winner = next((rid for rid in moving
                                   if not _pinned(rid) and _can_step(rid)),
                                  None)
                if winner is None:
                    winner = next((rid for rid in moving if _can_step(rid)),
                                  None)
                if winner is None and moving:
                    winner = moving[0]
                for rid in moving:
                    if rid != winner:
                        intents[rid] = current[rid]
                        wants_move.discard(rid)
                        self._emit(EventKind.STOP, (rid,), "conflict")
                task_of = {rid: self.robots[rid].group for rid in members}
                self._charge_comm(members, _CLUSTER_COMM_ROUNDS,
                                  negotiation=True, task_of=task_of)

        return self._enforce_separation(current, intents, wants_move, context, order)

    def _enforce_separation(self, current, intents, wants_move, context, order):
        """Finalize targets so executed positions keep the safety distance.

        Movers are processed in priority order; a mover whose endpoint
        would crowd another robot tries rotated step directions and falls
        back to staying put. Staying is always safe because last tick's
        positions already satisfied separation.
        """
        # enforce slightly above the detection threshold so robots never
        # settle inside the band that would re-trigger detection forever
        limit = 2.0 * self.scenario.safety_radius + 1e-6
        movers = sort_queue(sorted(wants_move), context, order) if wants_move else []
        final = dict(intents)
        pending = set(movers)
        for rid in movers:
            pending.discard(rid)
            robot = self.robots[rid]

            def safe(p: Position) -> bool:
                for other in final:
                    if other == rid:
                        continue
                    ref = current[other] if other in pending else final[other]
                    if euclidean(p, ref) < limit:
                        return False
                return True

            if safe(final[rid]):
                continue
            placed = False
            # one-sided (counterclockwise) detours: symmetric avoidance can
            # oscillate forever between two head-on robots
            toward = robot.goal if robot.goal is not None else intents[rid]
            safe_candidates = []
            for degrees in self._detour_angles(rid):
                candidate = self._rotated_step(robot, math.radians(degrees),
                                               toward)
                if candidate is not None and safe(candidate):
                    safe_candidates.append(candidate)
                    if self._stall.get(rid, 0) < _STALL_ESCAPE:
                        break
            if safe_candidates:
                if self._stall.get(rid, 0) >= _STALL_ESCAPE and robot.goal is not None:
                    # a stalled robot stops circulating and takes whichever
                    # safe detour regains the most ground toward its goal
                    final[rid] = min(safe_candidates,
                                     key=lambda p: euclidean(p, robot.goal))
                else:
                    final[rid] = safe_candidates[0]
                placed = True
            if not placed:
                final[rid] = current[rid]
                self._emit(EventKind.STOP, (rid,), "separation")
        return final

    def _yield_step(self, robot: RobotState,
                    intents: dict[int, Position],
                    movers: set[int]) -> Position | None:
        """Goal-less robots step out of the way instead of standing firm.

        A parked robot yields when it sits on an active formation vertex or
        in the path of an approaching mover. Without this, surplus robots
        form static walls that starve routing progress forever.
        """
        if robot.group is not None:
            return None
        clearance = 2.0 * self.scenario.safety_radius + 0.2
        threat = None
        threat_d = clearance
        for tid in sorted(self.tasks):
            if self.status[tid] is not _TaskStatus.ACTIVE:
                continue
            for vertex in self.vertices[tid]:
                d = euclidean(robot.pos, vertex)
                if d < threat_d:
                    threat, threat_d = vertex, d
        if threat is None:
            band = 2.0 * self.scenario.safety_radius + 2.0 * self.scenario.step_length
            for rid in sorted(movers):
                mover = self.robots[rid]
                d = euclidean(robot.pos, mover.pos)
                if d >= band:
                    continue
                # only yield to movers actually closing in
                approach = (euclidean(intents[rid], robot.pos) < d)
                if approach and (threat is None or d < threat_d):
                    threat, threat_d = mover.pos, d
        if threat is None:
            return None
        dx, dy = robot.pos.x - threat.x, robot.pos.y - threat.y
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            dx, dy, norm = 1.0, 0.0, 1.0
        ux, uy = dx / norm, dy / norm
        step = self.scenario.step_length
        world = self.scenario.world_size
        limit = 2.0 * self.scenario.safety_radius + 1e-6

        def endpoint(angle: float) -> Position:
            cos_a, sin_a = math.cos(angle), math.sin(angle)
            rx, ry = ux * cos_a - uy * sin_a, ux * sin_a + uy * cos_a
            return Position(min(world, max(0.0, robot.pos.x + step * rx)),
                            min(world, max(0.0, robot.pos.y + step * ry)))

        # yielding straight away from the threat can run into another robot
        # or onto a formation vertex someone still needs; try rotated escapes
        # and take the first one with clear ground
        active_vertices = [v for tid in sorted(self.tasks)
                           if self.status[tid] is _TaskStatus.ACTIVE
                           for v in self.vertices[tid]]

        def robot_gap(p: Position) -> float:
            return min((euclidean(p, other.pos)
                        for other in self.robots.values()
                        if other.id != robot.id and other.alive),
                       default=math.inf)

        def clear(p: Position) -> bool:
            if robot_gap(p) < limit:
                return False
            return all(euclidean(p, v) >= clearance for v in active_vertices)

        candidates = [endpoint(math.radians(deg))
                      for deg in (0, 45, -45, 90, -90, 135, -135)]
        candidates = [c for c in candidates
                      if euclidean(c, robot.pos) > 1e-9]
        for candidate in candidates:
            if clear(candidate):
                return candidate
        # nothing fully clears the vertex zone in one step (it may hug a
        # world boundary); keep escaping via the step with the most room
        safe_vs_robots = [c for c in candidates if robot_gap(c) >= limit]
        if safe_vs_robots:
            return max(safe_vs_robots, key=robot_gap)
        if candidates:
            return candidates[0]
        return None

    def _rotated_step(self, robot: RobotState, angle: float,
                      toward: Position | None = None) -> Position | None:
        toward = toward if toward is not None else robot.goal
        if toward is None:
            return None
        dx, dy = toward.x - robot.pos.x, toward.y - robot.pos.y
        d = math.hypot(dx, dy)
        if d == 0.0:
            return None
        step = min(self.scenario.step_length, d)
        cos_a, sin_a = math.cos(angle), math.sin(angle)
        ux, uy = dx / d, dy / d
        rx, ry = ux * cos_a - uy * sin_a, ux * sin_a + uy * cos_a
        world = self.scenario.world_size
        candidate = Position(min(world, max(0.0, robot.pos.x + step * rx)),
                             min(world, max(0.0, robot.pos.y + step * ry)))
        # boundary clamping can collapse a rotation into standing still;
        # such a candidate wastes the robot's turn without being safe ground
        if euclidean(candidate, robot.pos) <= 1e-9:
            return None
        return candidate

    # phase 6: execute motion and charge energy
    def _phase_charge(self, final: dict[int, Position]) -> None:
        for rid in sorted(final):
            robot = self.robots[rid]
            target = final[rid]
            moved = euclidean(robot.pos, target)
            if moved > 0.0:
                robot.pos = target
                self.total_distance += moved
                self.ledger.charge(robot, ChargeKind.MOVE, self.scenario.energy)
                self._emit(EventKind.MOVE, (rid,),
                           f"to=({target.x:.3f},{target.y:.3f})")
            else:
                self.ledger.charge(robot, ChargeKind.IDLE, self.scenario.energy)
            if robot.goal is not None and robot.pos == robot.goal:
                self.phase[rid] = RobotPhase.AT_SLOT
            self._update_stall(robot)
            if not robot.alive and self.phase[rid] is not RobotPhase.DEAD:
                self.phase[rid] = RobotPhase.DEAD
                robot.group = None
                robot.slot = None
                robot.goal = None
                self._emit(EventKind.ROBOT_DEAD, (rid,))

    def _update_stall(self, robot: RobotState) -> None:
        """Track ticks without progress so livelocked robots can escalate."""
        rid = robot.id
        if robot.goal is None or not robot.alive:
            self._stall[rid] = 0
            self._goal_mark[rid] = None
            return
        gd = euclidean(robot.pos, robot.goal)
        mark = self._goal_mark[rid]
        if mark is None or mark[0] != robot.goal or gd < mark[1] - 1e-9:
            self._goal_mark[rid] = (robot.goal, gd)
            self._stall[rid] = 0
        else:
            self._stall[rid] += 1

    def _detour_angles(self, rid: int) -> tuple[int, ...]:
        # one-sided detours by default (symmetric avoidance oscillates);
        # a stalled robot may search the whole circle to break a livelock
        if self._stall.get(rid, 0) >= _STALL_ESCAPE:
            return _ESCAPE_ANGLES
        return _DETOUR_ANGLES

    # phase 7: completion and timeout checks
    def _phase_tasks(self) -> None:
        for tid in sorted(self.tasks):
            if self.status[tid] is not _TaskStatus.ACTIVE:
                continue
            task = self.tasks[tid]
            members = self._members(tid)
            in_place = (
                len(members) == task.required
                and all(self.robots[rid].slot is not None
                        and euclidean(self.robots[rid].pos,
                                      self.vertices[tid][self.robots[rid].slot])
                        <= _ARRIVAL_TOLERANCE
                        for rid in members)
            )
            if in_place:
                self.hold[tid] += 1
            else:
                self.hold[tid] = 0
            if self.hold[tid] >= task.duration:
                self.status[tid] = _TaskStatus.COMPLETED
                self._emit(EventKind.TASK_COMPLETED, tuple(members))
                self._release(members)
                continue
            if self.tick_no - task.arrival_tick + 1 >= task.timeout:
                self.status[tid] = _TaskStatus.TIMED_OUT
                self._emit(EventKind.TASK_TIMED_OUT, tuple(members), f"task={tid}")
                self._release(members)

    def _release(self, members: list[int]) -> None:
        for rid in members:
            robot = self.robots[rid]
            robot.group = None
            robot.slot = None
            robot.goal = None
            robot.path = []
            if robot.alive:
                self.phase[rid] = RobotPhase.IDLE

    # ------------------------------------------------------------------- run

    def finished(self) -> bool:
        if not any(r.alive for r in self.robots.values()):
            return True
        if self.tasks and all(s in (_TaskStatus.COMPLETED, _TaskStatus.TIMED_OUT)
                              for s in self.status.values()):
            return True
        return False

    def metrics(self) -> RunMetrics:
        batteries = [r.battery for r in self.robots.values()]
        gossip_total = sum(self.ledger.comm_gossip.values())
        nego_total = sum(self.ledger.comm_negotiation.values())
        return RunMetrics(
            conflict_frequency=self.conflict_frequency,
            energy_moving=sum(self.ledger.moving.values()),
            energy_idle=sum(self.ledger.idle.values()),
            energy_comm=gossip_total + nego_total,
            energy_comm_negotiation=nego_total,
            total_distance=self.total_distance,
            per_task_comm=dict(sorted(self.ledger.per_task_comm.items())),
            residual_max=max(batteries),
            residual_min=min(batteries),
            residual_mean=sum(batteries) / len(batteries),
            ticks_elapsed=self.tick_no,
            tasks_completed=sum(1 for s in self.status.values()
                                if s is _TaskStatus.COMPLETED),
            tasks_timed_out=sum(1 for s in self.status.values()
                                if s is _TaskStatus.TIMED_OUT),
            max_negotiation_iterations=self.max_negotiation_iterations,
        )


def run(scenario: Scenario) -> tuple[RunMetrics, list[TraceEvent]]:
    """Execute a scenario to completion; deterministic in the scenario."""
    engine = Engine(scenario)
    while engine.tick_no < scenario.max_ticks and not engine.finished():
        engine.tick()
    return engine.metrics(), engine.events

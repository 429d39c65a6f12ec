"""Deterministic multi-robot cooperation simulator.

Robots share knowledge through synchronous gossip, plan task selection,
polygon formations and straight-line routes under configurable priority
laws, and resolve plan conflicts through distributed negotiation. The
engine's tick loop is a pure function of the scenario, so runs, sweeps and
traces are exactly reproducible.
"""

from .world import (Position, RobotState, Task, EnergyModel, EnergyLedger,
                    ChargeKind, euclidean, polygon_vertices)
from .comms import COMPLETE, CommGraph, KnowledgeSet, build_graph, gossip
from .priority import (NeedLevel, PriorityLaw, Criterion, NeedsOrderQueue,
                       compile_law, sort_queue, ExhaustedCriteriaError,
                       LOW_BATTERY_WITHDRAWAL)
from .selection import (SelectionPlan, estimate_cost, select, selection_oracle,
                        InsufficientRobotsError)
from .formation import (DistanceMatrix, FormationPlan, formation_assign,
                        hungarian_oracle)
from .routing import (MotionAction, ConflictQueue, next_step, detect_conflicts,
                      cluster_conflicts, resolve_cluster, UnionFind)
from .negotiation import (Phase, Proposal, AgreementOutcome, agreement,
                          negotiate, NegotiationResult)
from .cata import CataWeights, collision_penalty, utility, cata_select
from .scenario import Scenario, RobotSpec, generate, InvalidScenarioError
from .engine import Engine, RunMetrics, TraceEvent, RobotPhase, run
from .sweep import SweepSpec, run_sweep, summarize, CSV_COLUMNS

__all__ = [name for name in dir() if not name.startswith("_")]

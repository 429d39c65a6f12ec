"""A first run: five robots, one task, and a readable trace.

Builds a small scenario by hand, runs it to completion, and walks through
what happened: which robots grouped, how the formation polygon was filled,
and where the energy went. Run with:

    python3 demos/01_single_run.py
"""

from swarmplan import Scenario, RobotSpec, Task, Position, run
from swarmplan.engine import EventKind

scenario = Scenario(
    world_size=24.0,
    robots=[
        RobotSpec(id=1, x=3.0, y=3.0, battery=95.0),
        RobotSpec(id=2, x=20.0, y=4.0, battery=80.0),
        RobotSpec(id=3, x=5.0, y=20.0, battery=70.0),
        RobotSpec(id=4, x=18.0, y=19.0, battery=88.0),
        RobotSpec(id=5, x=12.0, y=2.0, battery=60.0),
    ],
    tasks=[Task(id=1, center=Position(12.0, 14.0), required=4,
                duration=5, timeout=400)],
    safety_radius=1.0,
    formation_radius=4.0,
)

metrics, events = run(scenario)

print("=== run summary ===")
print(f"ticks: {metrics.ticks_elapsed}   tasks completed: {metrics.tasks_completed}")
print(f"total distance: {metrics.total_distance:.1f} m   "
      f"conflicts resolved: {metrics.conflict_frequency}")
print(f"energy: moving {metrics.energy_moving:.2f}  idle {metrics.energy_idle:.2f}  "
      f"comm {metrics.energy_comm:.2f} "
      f"(of which negotiation {metrics.energy_comm_negotiation:.2f})")
print(f"residual battery: max {metrics.residual_max:.1f}  "
      f"mean {metrics.residual_mean:.1f}  min {metrics.residual_min:.1f}")

print("\n=== key events ===")
interesting = {EventKind.TASK_ARRIVED, EventKind.AGREE,
               EventKind.CONFLICT_DETECTED, EventKind.TASK_COMPLETED}
for event in events:
    if event.kind in interesting:
        subjects = ",".join(str(s) for s in event.subjects)
        print(f"[tick {event.tick:>3}] {event.kind.value:<18} "
              f"robots {subjects}  {event.detail}")

"""Closed-loop execution of a task plan: approach, grasp, carry, release."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import CollisionAbort, StartInCollision
from ..geometry import Pose2
from ..task_planner.scenario import Scenario
from ..task_planner.search import TaskPlan
from ..trajectory.approach import object_pose_from_robot
from ..trajectory.collision import OccupancyMap, Phase, collision_check, collisions_along, update_map
from ..trajectory.planner import plan_se2
from .noise import NoiseModel, NoiseStream
from .tracker import DIVERGENCE_LIMIT, TrackerConfig, track_trajectory

SUCCESS_POS_TOL = 0.3  # m
SUCCESS_ANG_TOL = math.pi / 4
TILT_LIMIT = 0.8  # rad
DEFAULT_DWELL = 3.0  # s, per grasp and per release

METRICS_HEADER = (
    "scenario",
    "method",
    "seed",
    "completion_time_s",
    "total_distance_m",
    "collisions",
    "max_err_m",
    "mean_err_m",
    "successes",
)


@dataclass(frozen=True)
class ObjectOutcome:
    object_id: str
    position_error: float
    heading_error: float
    success: bool


def is_success(position_error: float, heading_error: float) -> bool:
    return position_error < SUCCESS_POS_TOL and abs(heading_error) < SUCCESS_ANG_TOL


@dataclass
class EpisodeResult:
    per_object: list[ObjectOutcome] = field(default_factory=list)
    completion_time: float = 0.0
    total_distance: float = 0.0
    collision_events: int = 0
    max_tracking_error: float = 0.0
    mean_tracking_error: float = 0.0
    tracking_time: float = 0.0
    dwell_time: float = 0.0
    tasks_completed: int = 0
    replans: int = 0
    object_poses: dict[str, Pose2] = field(default_factory=dict)
    robot_pose: Pose2 | None = None
    legs: list = field(default_factory=list, repr=False)  # (object id, phase, (K, 6) executed samples)

    @property
    def successes(self) -> int:
        return sum(o.success for o in self.per_object)

    @property
    def success(self) -> bool:
        return bool(self.per_object) and all(o.success for o in self.per_object) and self.collision_events == 0

    def metrics_row(self, scenario: str, method: str, seed: int) -> dict:
        return {
            "scenario": scenario,
            "method": method,
            "seed": seed,
            "completion_time_s": f"{self.completion_time:.3f}",
            "total_distance_m": f"{self.total_distance:.3f}",
            "collisions": self.collision_events,
            "max_err_m": f"{self.max_tracking_error:.4f}",
            "mean_err_m": f"{self.mean_tracking_error:.4f}",
            "successes": self.successes,
        }


def check_termination(roll: float, pitch: float, gripper_contact: bool) -> bool:
    """True when the carried object tilts past 0.8 rad or the gripper loses contact."""
    return abs(roll) > TILT_LIMIT or abs(pitch) > TILT_LIMIT or not gripper_contact


class _Collided(Exception):
    def __init__(self, t, pose):
        super().__init__()
        self.t = t
        self.pose = pose


def run_episode(
    scenario: Scenario,
    plan: TaskPlan,
    tracker: TrackerConfig = TrackerConfig(),
    noise: NoiseModel = NoiseModel(),
    dwell: float = DEFAULT_DWELL,
    check_collisions: bool = True,
    replan: bool = False,
    planner=plan_se2,
) -> EpisodeResult:
    """Execute ``plan`` task by task, starting from the scenario's robot start.

    The robot tracks each planned leg from wherever it actually is. While carrying,
    the object pose is the robot pose composed with the inverse grasp offset; on
    release it stays where it is. Every control step is checked against the live map
    (objects at their current poses, no extra clearance). A collision raises
    CollisionAbort carrying the partial result; Divergence propagates unchanged.

    Planned legs come from cost matrices built on the initial configuration, so a
    leg may cross an object delivered earlier. With ``replan`` such a leg (checked
    against the live map with the scenario clearance) is re-planned by ``planner``
    from the robot's actual pose to the leg's end pose; ``res.replans`` counts them.
    Without it the leg is executed as planned and the collision gate fires.
    """
    if not plan.tasks:
        raise ValueError("plan carries no trajectories to execute")
    if len(plan.order) != scenario.n:
        raise ValueError(f"plan covers {len(plan.order)} objects, scenario has {scenario.n}")
    stream = NoiseStream(noise)
    offset = scenario.grasp_offset()
    live = scenario.base_map().with_margin(0.0)
    poses = {o.id: o.initial_pose for o in scenario.objects}
    robot = scenario.robot_start
    res = EpisodeResult(robot_pose=robot)
    err_sum, err_count = 0.0, 0

    for k, (j, (pre, post)) in enumerate(zip(plan.order, plan.tasks)):
        oid = scenario.objects[j].id
        for phase, traj in ((Phase.PRE_GRASP, pre), (Phase.POST_GRASP, post)):
            model = scenario.robot_model() if phase is Phase.PRE_GRASP else scenario.carry_model(j)
            if replan:
                traj = _replanned(traj, robot, model, update_map(live.with_margin(scenario.clearance_margin), oid, phase), scenario, planner, res)
            occ = _near_path(update_map(live, oid, phase), traj, robot, model.bounding_radius() + DIVERGENCE_LIMIT)

            def hook(t, x, y, th, occ=occ, model=model):
                p = Pose2(x, y, th)
                if check_collisions and collision_check(p, model, occ):
                    raise _Collided(t, p)

            try:
                tr = track_trajectory(traj, robot, tracker, stream, scenario.limits, step_hook=hook)
            except _Collided as c:
                res.collision_events += 1
                res.tracking_time += c.t
                res.completion_time = res.tracking_time + res.dwell_time
                res.robot_pose = c.pose
                if phase is Phase.POST_GRASP:
                    poses[oid] = object_pose_from_robot(c.pose, offset)
                res.object_poses = dict(poses)
                _finish(res, scenario, plan, poses, err_sum, err_count)
                raise CollisionAbort(f"collision in task {k} ({phase.value}) at t={c.t:.2f} s", result=res) from None
            res.legs.append((oid, phase.value, tr.path))
            robot = tr.final_pose
            res.tracking_time += tr.completion_time
            res.total_distance += tr.distance
            res.max_tracking_error = max(res.max_tracking_error, tr.max_error)
            err_sum += float(tr.errors.sum())
            err_count += len(tr.errors)
            res.dwell_time += dwell
            if phase is Phase.POST_GRASP:
                poses[oid] = object_pose_from_robot(robot, offset)
                live = live.with_object_pose(oid, poses[oid].x, poses[oid].y)
        res.tasks_completed = k + 1

    res.completion_time = res.tracking_time + res.dwell_time
    res.robot_pose = robot
    res.object_poses = dict(poses)
    _finish(res, scenario, plan, poses, err_sum, err_count)
    return res


def _replanned(traj, robot: Pose2, model, occ: OccupancyMap, scenario, planner, res) -> object:
    if len(traj) <= 1 or not collisions_along(traj.data[:, 1:4], model, occ).any():
        return traj
    res.replans += 1
    try:
        return planner(robot, traj.end, model, occ, scenario.limits)
    except StartInCollision:
        # tracking noise can leave the robot inside the planning clearance
        return planner(robot, traj.end, model, occ.with_margin(0.0), scenario.limits)


def _near_path(occ: OccupancyMap, traj, robot: Pose2, reach: float) -> OccupancyMap:
    """Drop obstacles that no pose within ``reach`` of the leg's bounding box can touch.

    Tracking aborts beyond 1 m of cross-track error, so the robot never leaves that box
    inflated by the divergence limit plus its own extent.
    """
    xy = traj.xy
    xmin = min(float(xy[:, 0].min()), robot.x) - reach
    xmax = max(float(xy[:, 0].max()), robot.x) + reach
    ymin = min(float(xy[:, 1].min()), robot.y) - reach
    ymax = max(float(xy[:, 1].max()), robot.y) + reach

    def near(c):
        dx = max(xmin - c.x, 0.0, c.x - xmax)
        dy = max(ymin - c.y, 0.0, c.y - ymax)
        return math.hypot(dx, dy) <= c.radius + occ.clearance_margin

    statics = tuple(c for c in occ.static_obstacles if near(c))
    objs = {k: e for k, e in occ.objects.items() if near(e.circle)}
    return OccupancyMap(occ.bounds, statics, objs, occ.clearance_margin)


def _finish(res, scenario, plan, poses, err_sum, err_count) -> None:
    res.mean_tracking_error = err_sum / err_count if err_count else 0.0
    res.per_object = []
    for i, o in enumerate(scenario.objects):
        target = scenario.targets[plan.assignment[i]]
        p = poses[o.id]
        d = p.distance(target)
        h = abs(p.heading_error(target))
        res.per_object.append(ObjectOutcome(o.id, d, h, is_success(d, h)))


def write_metrics(rows, path: str | Path | None = None) -> str:
    """Comma-separated metrics with the fixed header; written to ``path`` when given."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=METRICS_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text

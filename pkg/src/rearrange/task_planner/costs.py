"""Travel / manipulation duration matrices, memoizing the planned trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import GoalInCollision, NoPathFound, PlanningInfeasible, StartInCollision
from ..geometry import MotionLimits, Pose2
from ..trajectory.collision import CollisionModel, OccupancyMap, Phase
from ..trajectory.planner import DEFAULT_SETTINGS, PlannerSettings, plan_se2
from ..trajectory.trajectory import Trajectory
from .scenario import Scenario

PlannerFn = Callable[[Pose2, Pose2, CollisionModel, OccupancyMap, MotionLimits], Trajectory]
PLANNING_FAILURES = (NoPathFound, GoalInCollision, StartInCollision)


@dataclass(frozen=True)
class CostMatrices:
    """``travel[p, j]``: departure p (0 = start, l + 1 = release at target l) to the
    pre-grasp pose of object j. ``manipulate[j, l]``: object j from its grasp pose to
    target l. Seconds; +inf where no trajectory exists.

    ``departures`` (N+1, 2) and ``pregrasps`` (N, 2) hold the positions used for the
    straight-line travel fallback; ``v_max`` scales it. Both are optional for
    matrix-only instances.
    """

    travel: np.ndarray
    manipulate: np.ndarray
    travel_paths: dict = field(default_factory=dict, repr=False, compare=False)
    manipulate_paths: dict = field(default_factory=dict, repr=False, compare=False)
    departures: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    pregrasps: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    v_max: float = 1.0

    def __post_init__(self):
        a = np.array(self.travel, dtype=float)
        b = np.array(self.manipulate, dtype=float)
        n = b.shape[0]
        if b.shape != (n, n) or a.shape != (n + 1, n):
            raise ValueError(f"expected travel (N+1, N) and manipulate (N, N), got {a.shape} and {b.shape}")
        if np.any(a[np.isfinite(a)] < 0) or np.any(b[np.isfinite(b)] < 0) or np.isnan(a).any() or np.isnan(b).any():
            raise ValueError("cost entries must be >= 0 or +inf")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "travel", a)
        object.__setattr__(self, "manipulate", b)

    @property
    def n(self) -> int:
        return self.manipulate.shape[0]

    def has_paths(self) -> bool:
        return bool(self.travel_paths) or bool(self.manipulate_paths)

    def fallback_travel(self, p: int, j: int) -> float:
        """Straight-line time lower bound from departure p to object j's pre-grasp pose."""
        if self.departures is None or self.pregrasps is None:
            return math.inf
        d = self.departures[p] - self.pregrasps[j]
        return float(math.hypot(d[0], d[1]) / self.v_max)

    def check_completable(self) -> None:
        a, b = self.travel, self.manipulate
        fin_a, fin_b = np.isfinite(a), np.isfinite(b)
        for j in range(self.n):
            if not fin_a[:, j].any():
                raise PlanningInfeasible(f"object {j} cannot be reached from anywhere")
            if not fin_b[j].any():
                raise PlanningInfeasible(f"object {j} cannot be delivered to any target")
            if not fin_b[:, j].any():
                raise PlanningInfeasible(f"target {j} cannot be reached by any object")
        if not fin_a[0].any():
            raise PlanningInfeasible("no object is reachable from the start")


def build_cost_matrices(
    scenario: Scenario,
    planner: PlannerFn | None = None,
    settings: PlannerSettings = DEFAULT_SETTINGS,
    check: bool = True,
) -> CostMatrices:
    """Plan every travel and manipulation leg on the initial-configuration maps.

    Travel legs see all objects as obstacles; a manipulation leg frees the carried
    object and keeps the others as obstacles. Failed plans become +inf.
    """
    if planner is None:

        def planner(start, goal, model, occ, limits):
            return plan_se2(start, goal, model, occ, limits, settings)

    n = scenario.n
    lim = scenario.limits
    a = np.full((n + 1, n), math.inf)
    b = np.full((n, n), math.inf)
    travel_paths, manip_paths = {}, {}
    travel_map = scenario.phase_map(None, Phase.PRE_GRASP)
    robot = scenario.robot_model()
    for p in range(n + 1):
        start = scenario.departure_pose(p)
        for j in range(n):
            try:
                tr = planner(start, scenario.pre_grasp(j), robot, travel_map, lim)
            except PLANNING_FAILURES:
                continue
            a[p, j] = tr.duration
            travel_paths[(p, j)] = tr
    for j in range(n):
        carry_map = scenario.phase_map(j, Phase.POST_GRASP)
        model = scenario.carry_model(j)
        for l in range(n):
            try:
                tr = planner(scenario.pre_grasp(j), scenario.release_pose(l), model, carry_map, lim)
            except PLANNING_FAILURES:
                continue
            b[j, l] = tr.duration
            manip_paths[(j, l)] = tr
    deps = np.array([[scenario.departure_pose(p).x, scenario.departure_pose(p).y] for p in range(n + 1)])
    pgs = np.array([[scenario.pre_grasp(j).x, scenario.pre_grasp(j).y] for j in range(n)])
    costs = CostMatrices(a, b, travel_paths, manip_paths, deps, pgs, lim.v_max)
    if check:
        costs.check_completable()
    return costs

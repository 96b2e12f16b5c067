"""Shared builders for tests."""
from __future__ import annotations

import math

import numpy as np

from rearrange.errors import PlanningInfeasible
from rearrange.geometry import Bounds, Circle, Pose2
from rearrange.task_planner import CostMatrices, ObjectSpec, Scenario, build_cost_matrices, greedy_plan
from rearrange.trajectory import CollisionModel, OccupancyMap, collision_check, integrate_unicycle, plan_direct

GRASP = Pose2(-1.2, 0.0, 0.0)


def _spread_points(rng, k, lo, hi, min_gap, avoid=()):
    pts = []
    while len(pts) < k:
        p = rng.uniform(lo, hi, size=2)
        if all(math.dist(p, q) >= min_gap for q in list(pts) + list(avoid)):
            pts.append(p)
    return pts


def random_scenario(seed: int, n: int, size: float = 20.0, obstacles: int = 0) -> Scenario:
    rng = np.random.default_rng(seed)
    start = np.array([size / 2, size / 2])
    obs = []
    for c in _spread_points(rng, obstacles, 3.0, size - 3.0, 3.0, avoid=[start]):
        obs.append(Circle(float(c[0]), float(c[1]), float(rng.uniform(0.3, 0.8))))
    pts = _spread_points(rng, 2 * n, 2.0, size - 2.0, 2.6, avoid=[start] + [(o.x, o.y) for o in obs])
    headings = rng.choice([0.0, math.pi / 2, math.pi, -math.pi / 2], size=2 * n)
    objects = [
        ObjectSpec(f"obj{i}", "chair", Pose2(float(pts[i][0]), float(pts[i][1]), float(headings[i])), 0.25, GRASP)
        for i in range(n)
    ]
    targets = [Pose2(float(pts[n + j][0]), float(pts[n + j][1]), float(headings[n + j])) for j in range(n)]
    return Scenario(
        Pose2(float(start[0]), float(start[1]), 0.0), objects, targets, obs, Bounds(0, 0, size, size), seed=seed
    ).validate()


def direct_costs(scenario: Scenario) -> CostMatrices:
    return build_cost_matrices(scenario, planner=plan_direct)


def random_instance(seed: int, n: int) -> tuple[Scenario, CostMatrices]:
    """A random open-world scenario on which greedy (and hence every method) completes."""
    k = 0
    while True:
        sc = random_scenario(seed * 1000 + k, n)
        try:
            costs = direct_costs(sc)
            greedy_plan(sc, costs)
            return sc, costs
        except PlanningInfeasible:
            k += 1


def random_matrices(rng: np.random.Generator, n: int, hi: int = 20, inf_frac: float = 0.0) -> CostMatrices:
    """Integer-valued matrices (exact arithmetic) with optional +inf entries."""
    a = rng.integers(1, hi, size=(n + 1, n)).astype(float)
    b = rng.integers(1, hi, size=(n, n)).astype(float)
    if inf_frac:
        a[rng.random(a.shape) < inf_frac] = math.inf
        b[rng.random(b.shape) < inf_frac] = math.inf
    return CostMatrices(a, b)


def dense_poses(traj, spacing: float = 0.05) -> list[Pose2]:
    """Re-integrate every sample interval at <= ``spacing`` m (and rad) per step."""
    d = traj.data
    out = [traj.start]
    for k in range(len(d) - 1):
        dt = d[k + 1, 0] - d[k, 0]
        v, w = d[k, 4], d[k, 5]
        n = max(1, math.ceil(max(abs(v), abs(w)) * dt / spacing))
        p = Pose2(d[k, 1], d[k, 2], d[k, 3])
        for _ in range(n):
            p = integrate_unicycle(p, v, w, dt / n)
            out.append(p)
    return out


def cluttered_query(seed: int, size: float = 14.0, n_obstacles: int = 8):
    """Random circle world plus a collision-free start/goal pair for the default robot."""
    rng = np.random.default_rng(seed)
    model = CollisionModel.robot_only()
    bounds = Bounds(0.0, 0.0, size, size)
    obs = tuple(
        Circle(float(x), float(y), float(r))
        for x, y, r in zip(rng.uniform(2, size - 2, n_obstacles), rng.uniform(2, size - 2, n_obstacles), rng.uniform(0.3, 0.9, n_obstacles))
    )
    occ = OccupancyMap(bounds, obs, {}, 0.05)

    def free_pose():
        while True:
            p = Pose2(*rng.uniform(1.2, size - 1.2, 2), rng.uniform(-math.pi, math.pi))
            if not collision_check(p, model, occ):
                return p

    start = free_pose()
    goal = free_pose()
    while goal.distance(start) < 3.0:
        goal = free_pose()
    return start, goal, model, occ

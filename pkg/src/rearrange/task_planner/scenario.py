"""World description: robot start, objects, target locations and static obstacles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from ..errors import InvalidScenario
from ..geometry import Bounds, Circle, MotionLimits, Pose2
from ..trajectory.approach import pre_grasp_pose
from ..trajectory.collision import (
    DEFAULT_CLEARANCE,
    DEFAULT_ROBOT_CIRCLES,
    CollisionModel,
    ObjectEntry,
    OccupancyMap,
    Phase,
    collision_check,
    update_map,
)

OFFSET_TOL = 1e-9


class Category(str, Enum):
    BIN = "bin"
    CHAIR = "chair"
    TABLE = "table"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    category: Category
    initial_pose: Pose2
    collision_radius: float
    grasp_offset: Pose2
    mass: float = 10.0
    friction: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "category", Category(self.category))
        if not self.collision_radius > 0:
            raise InvalidScenario(f"object {self.id!r}: collision_radius must be > 0")
        if not 0 < self.friction <= 1:
            raise InvalidScenario(f"object {self.id!r}: friction must lie in (0, 1]")
        if not self.mass > 0:
            raise InvalidScenario(f"object {self.id!r}: mass must be > 0")

    def circle_at(self, pose: Pose2) -> Circle:
        return Circle(pose.x, pose.y, self.collision_radius)


@dataclass(frozen=True)
class RobotState:
    config: Pose2
    holding: str | None = None


@dataclass(frozen=True)
class Scenario:
    """``objects[i]`` is object i and ``targets[j]`` is target location j (0-based)."""

    robot_start: Pose2
    objects: tuple[ObjectSpec, ...]
    targets: tuple[Pose2, ...]
    static_obstacles: tuple[Circle, ...] = ()
    world_bounds: Bounds = field(default_factory=lambda: Bounds(0.0, 0.0, 20.0, 20.0))
    limits: MotionLimits = field(default_factory=MotionLimits)
    footprint: tuple[tuple[float, float, float], ...] = DEFAULT_ROBOT_CIRCLES
    clearance_margin: float = DEFAULT_CLEARANCE
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "static_obstacles", tuple(self.static_obstacles))
        object.__setattr__(self, "footprint", tuple(tuple(float(v) for v in c) for c in self.footprint))

    @property
    def n(self) -> int:
        return len(self.objects)

    def object_index(self, object_id: str) -> int:
        for i, o in enumerate(self.objects):
            if o.id == object_id:
                return i
        raise KeyError(object_id)

    def robot_model(self) -> CollisionModel:
        return CollisionModel.robot_only(self.footprint)

    def carry_model(self, i: int) -> CollisionModel:
        o = self.objects[i]
        return self.robot_model().with_object(o.grasp_offset, o.collision_radius)

    def grasp_offset(self) -> Pose2:
        return self.objects[0].grasp_offset

    def pre_grasp(self, i: int) -> Pose2:
        o = self.objects[i]
        return pre_grasp_pose(o.initial_pose, o.grasp_offset)

    def release_pose(self, j: int) -> Pose2:
        """Robot pose when an object is released at target ``j`` (shared grasp offset)."""
        return pre_grasp_pose(self.targets[j], self.grasp_offset())

    def departure_pose(self, p: int) -> Pose2:
        """Row ``p`` of the travel matrix: 0 is the start, ``l + 1`` the release at target ``l``."""
        return self.robot_start if p == 0 else self.release_pose(p - 1)

    def base_map(self) -> OccupancyMap:
        """Every object at its initial pose, all as obstacles."""
        objs = {o.id: ObjectEntry(o.circle_at(o.initial_pose)) for o in self.objects}
        return OccupancyMap(self.world_bounds, self.static_obstacles, objs, self.clearance_margin)

    def phase_map(self, active: int | None, phase: Phase | str) -> OccupancyMap:
        oid = None if active is None else self.objects[active].id
        return update_map(self.base_map(), oid, phase)

    def validate(self) -> Scenario:
        """Check structural and geometric invariants; returns ``self`` for chaining."""
        n = len(self.objects)
        if n < 1:
            raise InvalidScenario("scenario needs at least one object")
        if len(self.targets) != n:
            raise InvalidScenario(f"{n} objects but {len(self.targets)} targets")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != n:
            raise InvalidScenario(f"duplicate object ids in {ids}")
        g0 = self.objects[0].grasp_offset
        for o in self.objects[1:]:
            g = o.grasp_offset
            if abs(g.x - g0.x) > OFFSET_TOL or abs(g.y - g0.y) > OFFSET_TOL or abs(g.theta - g0.theta) > OFFSET_TOL:
                raise InvalidScenario(f"object {o.id!r}: all objects must share one grasp offset")
        b = self.world_bounds
        empty = OccupancyMap(b, self.static_obstacles, {}, 0.0)
        if collision_check(self.robot_start, self.robot_model(), empty):
            raise InvalidScenario("robot start is out of bounds or inside a static obstacle")
        for o in self.objects:
            _check_disc(o.initial_pose, o.collision_radius, b, self.static_obstacles, f"object {o.id!r} initial pose")
        for j, t in enumerate(self.targets):
            r = max(o.collision_radius for o in self.objects)
            _check_disc(t, r, b, self.static_obstacles, f"target {j}")
        return self


def _check_disc(pose: Pose2, radius: float, b: Bounds, obstacles, what: str) -> None:
    if not b.contains(pose.x, pose.y, radius):
        raise InvalidScenario(f"{what} lies outside the world bounds")
    for c in obstacles:
        if math.hypot(pose.x - c.x, pose.y - c.y) < radius + c.radius:
            raise InvalidScenario(f"{what} overlaps a static obstacle")

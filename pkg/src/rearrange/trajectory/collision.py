"""Circle footprints, circle obstacle maps with per-object status, and collision tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

import numpy as np

from ..errors import UnknownObject
from ..geometry import Bounds, Circle, Pose2

DEFAULT_ROBOT_CIRCLES = ((0.35, 0.0, 0.45), (0.0, 0.0, 0.45), (-0.35, 0.0, 0.45))
DEFAULT_CLEARANCE = 0.05


class FootprintMode(str, Enum):
    ROBOT_ONLY = "robot_only"
    ROBOT_WITH_OBJECT = "robot_with_object"


class ObjectStatus(str, Enum):
    OBSTACLE = "obstacle"
    FREE = "free"


class Phase(str, Enum):
    PRE_GRASP = "pre_grasp"
    POST_GRASP = "post_grasp"


@dataclass(frozen=True)
class CollisionModel:
    """Body-frame circles ``(dx, dy, radius)``."""

    circles: tuple[tuple[float, float, float], ...]
    mode: FootprintMode = FootprintMode.ROBOT_ONLY

    def __post_init__(self):
        circles = tuple(tuple(float(v) for v in c) for c in self.circles)
        object.__setattr__(self, "circles", circles)
        object.__setattr__(self, "mode", FootprintMode(self.mode))
        expected = 3 if self.mode is FootprintMode.ROBOT_ONLY else 4
        if len(circles) != expected:
            raise ValueError(f"{self.mode.value} footprint needs exactly {expected} circles, got {len(circles)}")
        if any(c[2] <= 0 for c in circles):
            raise ValueError("footprint radii must be positive")

    @classmethod
    def robot_only(cls, circles=DEFAULT_ROBOT_CIRCLES) -> CollisionModel:
        return cls(tuple(circles), FootprintMode.ROBOT_ONLY)

    def with_object(self, grasp_offset: Pose2, object_radius: float) -> CollisionModel:
        """Add a circle at the grasped object's center.

        The object sits at ``robot * grasp_offset^-1``, so its center in the robot
        frame is the translation of the inverse offset.
        """
        if self.mode is not FootprintMode.ROBOT_ONLY:
            raise ValueError("footprint already carries an object")
        rel = grasp_offset.inverse()
        return CollisionModel(self.circles + ((rel.x, rel.y, object_radius),), FootprintMode.ROBOT_WITH_OBJECT)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.circles, dtype=float)

    def center_inflation(self) -> float:
        """Largest radius around the body origin that some circle is guaranteed to cover."""
        return max(0.0, max(r - math.hypot(dx, dy) for dx, dy, r in self.circles))

    def bounding_radius(self) -> float:
        return max(math.hypot(dx, dy) + r for dx, dy, r in self.circles)


@dataclass(frozen=True)
class ObjectEntry:
    circle: Circle
    status: ObjectStatus = ObjectStatus.OBSTACLE


@dataclass(frozen=True)
class OccupancyMap:
    """Immutable obstacle snapshot; ``update_map`` and friends return new maps."""

    bounds: Bounds
    static_obstacles: tuple[Circle, ...] = ()
    objects: Mapping[str, ObjectEntry] = field(default_factory=dict)
    clearance_margin: float = DEFAULT_CLEARANCE

    def __post_init__(self):
        object.__setattr__(self, "static_obstacles", tuple(self.static_obstacles))
        object.__setattr__(self, "objects", dict(self.objects))
        free = [k for k, e in self.objects.items() if e.status is ObjectStatus.FREE]
        if len(free) > 1:
            raise ValueError(f"at most one object may be free, got {free}")
        circles = [(c.x, c.y, c.radius) for c in self.static_obstacles]
        for oid in sorted(self.objects):
            e = self.objects[oid]
            if e.status is ObjectStatus.OBSTACLE:
                circles.append((e.circle.x, e.circle.y, e.circle.radius))
        arr = np.array(circles, dtype=float).reshape(-1, 3)
        arr.setflags(write=False)
        object.__setattr__(self, "_active", arr)
        object.__setattr__(self, "_active_list", circles)

    def __hash__(self):
        return hash(self.key())

    def key(self) -> tuple:
        return (
            self.bounds,
            self.static_obstacles,
            tuple(sorted((k, e.circle, e.status.value) for k, e in self.objects.items())),
            self.clearance_margin,
        )

    def free_objects(self) -> list[str]:
        return [k for k, e in self.objects.items() if e.status is ObjectStatus.FREE]

    def active_circles(self) -> np.ndarray:
        """(M, 3) array of circles that currently block motion."""
        return self._active

    def with_object_pose(self, object_id: str, x: float, y: float) -> OccupancyMap:
        if object_id not in self.objects:
            raise UnknownObject(f"unknown object {object_id!r}")
        objs = dict(self.objects)
        e = objs[object_id]
        objs[object_id] = ObjectEntry(Circle(x, y, e.circle.radius), e.status)
        return replace(self, objects=objs)

    def with_margin(self, margin: float) -> OccupancyMap:
        return replace(self, clearance_margin=margin)


def update_map(occ: OccupancyMap, active_object: str | None, phase: Phase | str) -> OccupancyMap:
    """Apply the object-status rule for a manipulation phase.

    pre_grasp: every object is an obstacle. post_grasp: the active object becomes
    free space and all others stay obstacles.
    """
    phase = Phase(phase)
    if active_object is not None and active_object not in occ.objects:
        raise UnknownObject(f"unknown object {active_object!r}")
    objs = {}
    for oid, e in occ.objects.items():
        free = phase is Phase.POST_GRASP and oid == active_object
        objs[oid] = ObjectEntry(e.circle, ObjectStatus.FREE if free else ObjectStatus.OBSTACLE)
    return replace(occ, objects=objs)


def footprint_centers(poses: np.ndarray, model: CollisionModel) -> np.ndarray:
    """World centers of every footprint circle: (M, C, 2) for poses of shape (M, 3)."""
    poses = np.atleast_2d(poses)
    fp = model.array
    c = np.cos(poses[:, 2])[:, None]
    s = np.sin(poses[:, 2])[:, None]
    wx = poses[:, 0:1] + c * fp[None, :, 0] - s * fp[None, :, 1]
    wy = poses[:, 1:2] + s * fp[None, :, 0] + c * fp[None, :, 1]
    return np.stack([wx, wy], axis=-1)


def collisions_along(poses: np.ndarray, model: CollisionModel, occ: OccupancyMap, margin: float | None = None) -> np.ndarray:
    """Boolean collision flag per pose for an (M, 3) array of poses."""
    margin = occ.clearance_margin if margin is None else margin
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    centers = footprint_centers(poses, model)  # M, C, 2
    radii = model.array[:, 2]
    b = occ.bounds
    cx, cy = centers[..., 0], centers[..., 1]
    # touching the boundary counts as leaving it
    out = (cx - radii <= b.xmin) | (cx + radii >= b.xmax) | (cy - radii <= b.ymin) | (cy + radii >= b.ymax)
    hit = out.any(axis=1)
    obs = occ.active_circles()
    if len(obs):
        dx = cx[..., None] - obs[None, None, :, 0]
        dy = cy[..., None] - obs[None, None, :, 1]
        limit = radii[None, :, None] + obs[None, None, :, 2] + margin
        # distance == r1 + r2 (+ margin) counts as collision
        hit |= (dx * dx + dy * dy <= limit * limit).any(axis=(1, 2))
    return hit


def collision_check(pose: Pose2, model: CollisionModel, occ: OccupancyMap) -> bool:
    """True when any footprint circle at ``pose`` touches an active obstacle or leaves the bounds."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    b = occ.bounds
    m = occ.clearance_margin
    obs = occ._active_list
    for dx, dy, r in model.circles:
        wx = pose.x + c * dx - s * dy
        wy = pose.y + s * dx + c * dy
        if wx - r <= b.xmin or wx + r >= b.xmax or wy - r <= b.ymin or wy + r >= b.ymax:
            return True
        for ox, oy, orad in obs:
            lim = r + orad + m
            if (wx - ox) ** 2 + (wy - oy) ** 2 <= lim * lim:
                return True
    return False

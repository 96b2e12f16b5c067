"""Planar poses, circles and motion limits shared by every module."""
from __future__ import annotations

import math
from dataclasses import dataclass


def wrap_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def angle_diff(a: float, b: float) -> float:
    """Shortest signed angular distance a - b, in (-pi, pi]."""
    return wrap_angle(a - b)


@dataclass(frozen=True)
class Pose2:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def compose(self, other: Pose2) -> Pose2:
        """``self * other``: express ``other`` (given in self's frame) in the parent frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> Pose2:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)

    def transform_point(self, px: float, py: float) -> tuple[float, float]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return self.x + c * px - s * py, self.y + s * px + c * py

    def distance(self, other: Pose2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def heading_error(self, other: Pose2) -> float:
        return abs(angle_diff(self.theta, other.theta))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class Circle:
    x: float
    y: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned rectangle in meters."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("bounds must have positive extent")

    def contains(self, x: float, y: float, pad: float = 0.0) -> bool:
        return (self.xmin + pad <= x <= self.xmax - pad) and (self.ymin + pad <= y <= self.ymax - pad)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


@dataclass(frozen=True)
class MotionLimits:
    """Velocity limits plus the acceleration limits used by the trapezoidal profiler."""

    v_max: float = 0.5
    omega_max: float = 0.5
    a_max: float = 1.0
    alpha_max: float = 2.0

    def __post_init__(self):
        for name in ("v_max", "omega_max", "a_max", "alpha_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

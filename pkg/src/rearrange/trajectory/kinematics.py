"""Exact constant-twist integration of the differential-drive model."""
from __future__ import annotations

import math

from ..geometry import Pose2, wrap_angle

STRAIGHT_EPS = 1e-9


def integrate_raw(x: float, y: float, theta: float, v: float, omega: float, dt: float):
    """Tuple version of :func:`integrate_unicycle` (theta is left unwrapped)."""
    if abs(omega) < STRAIGHT_EPS:
        return x + v * dt * math.cos(theta), y + v * dt * math.sin(theta), theta + omega * dt
    th1 = theta + omega * dt
    r = v / omega
    return x + r * (math.sin(th1) - math.sin(theta)), y - r * (math.cos(th1) - math.cos(theta)), th1


def integrate_unicycle(pose: Pose2, v_x: float, omega_z: float, dt: float) -> Pose2:
    """Advance ``pose`` for ``dt`` seconds under a constant twist (v_x, omega_z).

    Straight-line advance when |omega_z| < 1e-9, circular arc otherwise.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    x, y, th = integrate_raw(pose.x, pose.y, pose.theta, v_x, omega_z, dt)
    return Pose2(x, y, wrap_angle(th))

"""Closed-loop pose-feedback tracking of a time-parameterized reference."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import Divergence
from ..geometry import MotionLimits, Pose2, wrap_angle
from ..trajectory.kinematics import integrate_unicycle
from ..trajectory.trajectory import Trajectory
from .noise import NoiseModel, NoiseStream

DIVERGENCE_LIMIT = 1.0  # m of cross-track error


@dataclass(frozen=True)
class TrackerConfig:
    """Gains of v = v_r cos(e_th) + k_x e_x, w = w_r + k_y v_r e_y + k_th sin(e_th)."""

    gains: tuple[float, float, float] = (1.0, 4.0, 2.0)
    lookahead: float = 0.0  # m; reference time is advanced by lookahead / v_max
    control_rate: float = 50.0  # Hz
    settle_time: float = 5.0  # s allowed after the reference ends
    settle_pos_tol: float = 0.05
    settle_ang_tol: float = 0.05

    def __post_init__(self):
        if any(g <= 0 for g in self.gains):
            raise ValueError("gains must be positive")
        if self.control_rate <= 0:
            raise ValueError("control_rate must be positive")


@dataclass
class TrackingResult:
    path: np.ndarray  # (K, 6): t x y theta v omega, the twist actually applied after each pose
    max_error: float
    mean_error: float
    completion_time: float
    distance: float
    errors: np.ndarray = field(repr=False)

    @property
    def final_pose(self) -> Pose2:
        r = self.path[-1]
        return Pose2(r[1], r[2], r[3])


class PathProjector:
    """Distance from a point to a sampled reference path, searched near a time hint.

    Only segments within ``window`` samples of the hint or of the previous match are
    considered, so a self-crossing path is matched on the branch being tracked.
    """

    def __init__(self, traj: Trajectory, window: int = 6):
        self.p = traj.data[:, 1:3].tolist()
        self.idx = 0
        self.window = window

    def distance(self, x: float, y: float, hint: int | None = None) -> float:
        p = self.p
        if len(p) == 1:
            return math.hypot(x - p[0][0], y - p[0][1])
        center = self.idx if hint is None else hint
        lo = max(0, min(center, self.idx) - self.window)
        hi = min(len(p) - 1, max(center, self.idx) + self.window)
        best, best_k = math.inf, lo
        for k in range(lo, hi):
            ax, ay = p[k]
            bx, by = p[k + 1]
            sx, sy = bx - ax, by - ay
            rx, ry = x - ax, y - ay
            l2 = sx * sx + sy * sy
            u = 0.0 if l2 == 0.0 else min(1.0, max(0.0, (rx * sx + ry * sy) / l2))
            d = math.hypot(rx - u * sx, ry - u * sy)
            if d < best:
                best, best_k = d, k
        self.idx = best_k
        return best


def kanayama_command(pose, ref, gains) -> tuple[float, float]:
    """Tracking law in the robot frame; ``ref`` is ``(x, y, theta, v, omega)``."""
    x, y, th = pose
    xr, yr, thr, vr, wr = ref
    c, s = math.cos(th), math.sin(th)
    ex = c * (xr - x) + s * (yr - y)
    ey = -s * (xr - x) + c * (yr - y)
    eth = wrap_angle(thr - th)
    kx, ky, kth = gains
    v = vr * math.cos(eth) + kx * ex
    w = wr + ky * vr * ey + kth * math.sin(eth)
    return v, w


def track_trajectory(
    traj: Trajectory,
    start: Pose2,
    tracker: TrackerConfig,
    noise: NoiseModel | NoiseStream,
    limits: MotionLimits,
    step_hook: Callable[[float, float, float, float], None] | None = None,
) -> TrackingResult:
    """Follow ``traj`` from ``start``: saturate, perturb, integrate at ``control_rate``.

    Cross-track error is the distance to the reference polyline. The run ends once
    the reference has finished and the robot has settled on its final pose (or the
    settle time runs out). ``step_hook(t, x, y, theta)`` sees every executed pose and
    may raise to abort. Raises Divergence when cross-track error exceeds 1 m.
    """
    stream = noise if isinstance(noise, NoiseStream) else NoiseStream(noise)
    x, y, th = start.x, start.y, start.theta
    if len(traj) <= 1 or traj.duration <= 0:
        path = np.array([[0.0, x, y, th, 0.0, 0.0]])
        return TrackingResult(path, 0.0, 0.0, 0.0, 0.0, np.zeros(0))

    dt = 1.0 / tracker.control_rate
    t0 = traj.data[0, 0]
    dur = traj.duration
    end = traj.end
    lead = tracker.lookahead / limits.v_max if tracker.lookahead > 0 else 0.0
    proj = PathProjector(traj)
    times = traj.data[:, 0]
    rows = [[0.0, x, y, th, 0.0, 0.0]]
    errors = []
    dist = 0.0
    t = 0.0
    k = 0
    t_max = dur + tracker.settle_time
    while True:
        if t >= dur - 1e-12:
            if math.hypot(x - end.x, y - end.y) <= tracker.settle_pos_tol and abs(wrap_angle(th - end.theta)) <= tracker.settle_ang_tol:
                break
            if t >= t_max - 1e-12:
                break
        ref = traj.pose_at(t0 + min(t + lead, dur))
        if t >= dur:
            ref = (ref[0], ref[1], ref[2], 0.0, 0.0)
        v, w = kanayama_command((x, y, th), ref, tracker.gains)
        v = max(-limits.v_max, min(limits.v_max, v))
        w = max(-limits.omega_max, min(limits.omega_max, w))
        v_act, _, w_act = stream((v, 0.0, w))  # lateral component is not actuated by the plant
        rows[-1][4:] = (v_act, w_act)
        nxt = integrate_unicycle(Pose2(x, y, th), v_act, w_act, dt)
        dist += math.hypot(nxt.x - x, nxt.y - y)
        x, y, th = nxt.x, nxt.y, nxt.theta
        k += 1
        t = k * dt
        hint = int(np.searchsorted(times, t0 + min(t, dur))) - 1
        e = proj.distance(x, y, max(0, hint))
        errors.append(e)
        rows.append([t, x, y, th, 0.0, 0.0])
        if step_hook is not None:
            step_hook(t, x, y, th)
        if e > DIVERGENCE_LIMIT:
            raise Divergence(f"cross-track error {e:.3f} m at t={t:.2f} s")
    err = np.array(errors)
    return TrackingResult(np.array(rows), float(err.max()) if len(err) else 0.0, float(err.mean()) if len(err) else 0.0, t, dist, err)

"""Time-parameterized SE(2) trajectories, trapezoidal profiling and the text dump format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from ..geometry import MotionLimits, Pose2, wrap_angle
from .kinematics import integrate_raw

DUMP_HEADER = "# trajectory v1"

# geometric sample spacing used by the profiler
DS_MAX = 0.05  # m
DTHETA_MAX = 0.05  # rad


class Sample(NamedTuple):
    t: float
    pose: Pose2
    v: float
    omega: float


@dataclass(frozen=True)
class Trajectory:
    """Samples stored as an (K, 6) array of ``t x y theta v omega``.

    ``v``/``omega`` of sample k is the constant twist applied until sample k+1;
    the last sample carries the terminal twist (zero for planner output).
    """

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2 or d.shape[1] != 6 or d.shape[0] < 1:
            raise ValueError("trajectory data must be a non-empty (K, 6) array")
        if d.shape[0] > 1 and not np.all(np.diff(d[:, 0]) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def stationary(cls, pose: Pose2) -> Trajectory:
        return cls(np.array([[0.0, pose.x, pose.y, pose.theta, 0.0, 0.0]]))

    @property
    def duration(self) -> float:
        return float(self.data[-1, 0] - self.data[0, 0])

    @property
    def times(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def xy(self) -> np.ndarray:
        return self.data[:, 1:3]

    def __len__(self) -> int:
        return self.data.shape[0]

    def __iter__(self) -> Iterator[Sample]:
        for row in self.data:
            yield Sample(row[0], Pose2(row[1], row[2], row[3]), row[4], row[5])

    @property
    def samples(self) -> list[Sample]:
        return list(self)

    @property
    def start(self) -> Pose2:
        r = self.data[0]
        return Pose2(r[1], r[2], r[3])

    @property
    def end(self) -> Pose2:
        r = self.data[-1]
        return Pose2(r[1], r[2], r[3])

    def path_length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.data[:, 1]), np.diff(self.data[:, 2]))))

    def pose_at(self, t: float) -> tuple[float, float, float, float, float]:
        """Exact reference ``(x, y, theta, v, omega)`` at time ``t`` by integrating from the preceding sample."""
        d = self.data
        if t <= d[0, 0]:
            r = d[0]
            return r[1], r[2], r[3], r[4], r[5]
        if t >= d[-1, 0]:
            r = d[-1]
            return r[1], r[2], r[3], 0.0, 0.0
        k = int(np.searchsorted(d[:, 0], t, side="right")) - 1
        r = d[k]
        tau = t - r[0]
        if tau <= 0.0:
            return r[1], r[2], r[3], r[4], r[5]
        x, y, th = integrate_raw(r[1], r[2], r[3], r[4], r[5], tau)
        return x, y, wrap_angle(th), r[4], r[5]

    def truncate(self, index: int) -> Trajectory:
        """Keep samples ``0..index`` and zero the terminal twist."""
        d = np.array(self.data[: index + 1])
        d[-1, 4:] = 0.0
        return Trajectory(d)

    def shifted(self, t0: float) -> Trajectory:
        d = np.array(self.data)
        d[:, 0] += t0 - d[0, 0]
        return Trajectory(d)


def max_integration_residual(traj: Trajectory) -> tuple[float, float]:
    """Largest (position, heading) mismatch between stored poses and re-integrated controls."""
    d = traj.data
    pos_err = 0.0
    ang_err = 0.0
    for k in range(len(d) - 1):
        x, y, th = integrate_raw(d[k, 1], d[k, 2], d[k, 3], d[k, 4], d[k, 5], d[k + 1, 0] - d[k, 0])
        pos_err = max(pos_err, math.hypot(x - d[k + 1, 1], y - d[k + 1, 2]))
        ang_err = max(ang_err, abs(wrap_angle(th - d[k + 1, 3])))
    return pos_err, ang_err


# --- geometric segments and profiling ---------------------------------------


class Segment(NamedTuple):
    """Constant-curvature geometric piece.

    kind ``"move"``: signed arc length ``amount`` (m, negative = backward) with curvature
    ``kappa`` = dtheta/ds along the signed length (rad/m); kind ``"turn"``: in-place rotation by ``amount`` rad.
    """

    kind: str
    amount: float
    kappa: float = 0.0


def segments_duration_estimate(segments: Sequence[Segment], limits: MotionLimits) -> float:
    """Cruise-speed time of a segment list plus a stop/start penalty per motion run."""
    t = 0.0
    runs = 0
    prev = None
    for seg in segments:
        if seg.kind == "turn":
            t += abs(seg.amount) / limits.omega_max
            key = ("turn", math.copysign(1.0, seg.amount))
        else:
            cap = _speed_cap(seg, limits)
            t += abs(seg.amount) / cap
            key = ("move", math.copysign(1.0, seg.amount))
        if key != prev:
            runs += 1
            prev = key
    return t + runs * 0.5 * max(limits.v_max / limits.a_max, limits.omega_max / limits.alpha_max)


def _speed_cap(seg: Segment, limits: MotionLimits) -> float:
    if seg.kappa == 0.0:
        return limits.v_max
    return min(limits.v_max, limits.omega_max / abs(seg.kappa))


def _profile_run(steps: list[float], caps: list[float], accel: float) -> list[float]:
    """Per-step constant speeds for a run that starts and ends at rest.

    Speeds are capped per step and satisfy ``v_{k+1}^2 <= v_k^2 + 2 a ds`` in both
    directions; the first/last step is limited by accelerating over half its own length.
    """
    n = len(steps)
    v = list(caps)
    v[0] = min(v[0], math.sqrt(accel * steps[0]))
    for k in range(1, n):
        v[k] = min(v[k], math.sqrt(v[k - 1] ** 2 + accel * (steps[k - 1] + steps[k])))
    v[-1] = min(v[-1], math.sqrt(accel * steps[-1]))
    for k in range(n - 2, -1, -1):
        v[k] = min(v[k], math.sqrt(v[k + 1] ** 2 + accel * (steps[k] + steps[k + 1])))
    return v


def profile_segments(start: Pose2, segments: Sequence[Segment], limits: MotionLimits) -> Trajectory:
    """Time-parameterize a geometric path with trapezoidal velocity profiles.

    Consecutive moves in the same direction form a run traversed without stopping;
    turns and direction reversals start and end at rest. Poses are produced by exact
    integration of the assigned twists, so the result is kinematically consistent.
    """
    # split into runs of (sign, list of (seg, n_steps, step_len))
    runs: list[tuple[str, float, list[tuple[Segment, int, float]]]] = []
    for seg in segments:
        if abs(seg.amount) < 1e-12:
            continue
        sign = math.copysign(1.0, seg.amount)
        limit = DTHETA_MAX if seg.kind == "turn" else DS_MAX
        n = max(1, math.ceil(abs(seg.amount) / limit - 1e-9))
        piece = (seg, n, abs(seg.amount) / n)
        if runs and runs[-1][0] == seg.kind == "move" and runs[-1][1] == sign:
            runs[-1][2].append(piece)
        else:
            runs.append((seg.kind, sign, [piece]))

    rows = []
    t = 0.0
    x, y, th = start.x, start.y, start.theta
    for kind, sign, pieces in runs:
        steps, caps, twists = [], [], []
        for seg, n, ds in pieces:
            if kind == "turn":
                cap = limits.omega_max
            else:
                cap = _speed_cap(seg, limits)
            for _ in range(n):
                steps.append(ds)
                caps.append(cap)
                twists.append(seg)
        accel = limits.alpha_max if kind == "turn" else limits.a_max
        speeds = _profile_run(steps, caps, accel)
        for ds, spd, seg in zip(steps, speeds, twists):
            dt = ds / spd
            if kind == "turn":
                v, w = 0.0, sign * spd
            else:
                v = sign * spd
                w = seg.kappa * v
            rows.append((t, x, y, wrap_angle(th), v, w))
            x, y, th = integrate_raw(x, y, th, v, w, dt)
            t += dt
    rows.append((t, x, y, wrap_angle(th), 0.0, 0.0))
    return Trajectory(np.array(rows, dtype=float))


def segments_endpoint(start: Pose2, segments: Sequence[Segment]) -> Pose2:
    x, y, th = start.x, start.y, start.theta
    for seg in segments:
        if seg.kind == "turn":
            th += seg.amount
        elif seg.amount:
            sign = math.copysign(1.0, seg.amount)
            x, y, th = integrate_raw(x, y, th, sign, seg.kappa * sign, abs(seg.amount))
    return Pose2(x, y, th)


def sample_segments(start: Pose2, segments: Sequence[Segment], ds: float = 0.025, dtheta: float = 0.025) -> np.ndarray:
    """Dense (M, 3) pose samples along a geometric path, endpoints included."""
    chunks = [np.array([[start.x, start.y, start.theta]])]
    x, y, th = start.x, start.y, start.theta
    for seg in segments:
        if abs(seg.amount) < 1e-12:
            continue
        if seg.kind == "turn":
            n = max(1, math.ceil(abs(seg.amount) / dtheta))
            a = th + seg.amount * np.arange(1, n + 1) / n
            pts = np.column_stack([np.full(n, x), np.full(n, y), a])
        else:
            n = max(1, math.ceil(abs(seg.amount) / ds))
            s = seg.amount * np.arange(1, n + 1) / n  # signed arc length
            if abs(seg.kappa) < 1e-12:
                pts = np.column_stack([x + s * math.cos(th), y + s * math.sin(th), np.full(n, th)])
            else:
                a = th + seg.kappa * s
                r = 1.0 / seg.kappa
                pts = np.column_stack([x + r * (np.sin(a) - math.sin(th)), y - r * (np.cos(a) - math.cos(th)), a])
        chunks.append(pts)
        x, y, th = pts[-1]
    return np.concatenate(chunks)


# --- text dump ----------------------------------------------------------------


def dump_trajectory(traj: Trajectory, path: str | Path | None = None) -> str:
    lines = [DUMP_HEADER]
    for row in traj.data:
        lines.append(" ".join(f"{v:.6f}" for v in row))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_trajectory(source: str | Path) -> Trajectory:
    """Read a dump file (path) or dump text."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and not source.startswith("#")):
        text = Path(source).read_text()
    lines = [ln for ln in str(text).splitlines() if ln.strip()]
    if not lines or lines[0].strip() != DUMP_HEADER:
        raise ValueError(f"missing header {DUMP_HEADER!r}")
    rows = [[float(v) for v in ln.split()] for ln in lines[1:]]
    if any(len(r) != 6 for r in rows):
        raise ValueError("each trajectory line needs 6 fields: t x y theta v omega")
    return Trajectory(np.array(rows, dtype=float))

"""Reward terms for object-velocity tracking with a legged manipulator, plus samplers.

Each function returns the weighted contribution of its terms. ``total_reward``
also returns a per-row breakdown keyed by term name.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import UnknownCategory

TERMS = (
    "lin_vel_tracking",
    "ang_vel_tracking",
    "distance_keeping",
    "yaw_alignment",
    "contact",
    "joint_torque",
    "joint_acc",
    "ee_wrench",
    "action_rate",
    "lin_vel_z",
    "ang_vel_xy",
    "orientation",
    "default_joint",
)


@dataclass(frozen=True)
class RewardConfig:
    """Term weights and shape parameters.

    ``d_th`` (end-effector-to-base safe distance) has no published value; 0.55 m is
    a placeholder between body extent and arm reach. Override it for other robots.
    """

    lin_vel_tracking: float = 5.0
    ang_vel_tracking: float = 5.0
    distance_keeping: float = -10.0
    yaw_alignment: float = 5.0
    contact: float = -5.0
    joint_torque: float = -2.5e-5
    joint_acc: float = -2.5e-7
    ee_wrench: float = 1.0e-3
    action_rate: float = -2.0e-3
    lin_vel_z: float = -2.0
    ang_vel_xy: float = -0.05
    orientation: float = -10.0
    default_joint: float = -1.0
    tracking_sharpness: float = 4.0
    d_th: float = 0.55
    steepness: float = 200.0
    contact_threshold: float = 1.0  # N

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> RewardConfig:
        doc = json.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown reward config keys: {sorted(extra)}")
        return cls(**{k: float(v) for k, v in doc.items()})

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> RewardConfig:
        return cls.from_json(Path(path).read_text())


def _arr(v, n: int | None = None) -> np.ndarray:
    a = np.asarray(v, dtype=float).ravel()
    if n is not None and a.shape != (n,):
        raise ValueError(f"expected {n} components, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError("reward inputs must be finite")
    return a


@dataclass(frozen=True)
class RewardInput:
    v_cmd: Sequence[float] = (0.0, 0.0)
    v_actual: Sequence[float] = (0.0, 0.0)
    omega_cmd: float = 0.0
    omega_actual: float = 0.0
    psi_object: float = 0.0
    psi_robot: float = 0.0
    d_x: float = 1.0
    contact_forces: Sequence[Sequence[float]] = ()
    joint_torques: Sequence[float] = (0.0,) * 6
    joint_accels: Sequence[float] = (0.0,) * 6
    ee_wrench: Sequence[float] = (0.0,) * 6
    action: Sequence[float] = (0.0,) * 9
    action_prev: Sequence[float] = (0.0,) * 9
    action_prev2: Sequence[float] = (0.0,) * 9
    v_z: float = 0.0
    omega_xy: Sequence[float] = (0.0, 0.0)
    gravity_xy: Sequence[float] = (0.0, 0.0)
    joint_angles: Sequence[float] = (0.0,) * 6
    joint_defaults: Sequence[float] = (0.0,) * 6

    def __post_init__(self):
        for name, n in (
            ("v_cmd", 2),
            ("v_actual", 2),
            ("joint_torques", 6),
            ("ee_wrench", 6),
            ("action", 9),
            ("action_prev", 9),
            ("action_prev2", 9),
            ("omega_xy", 2),
            ("gravity_xy", 2),
            ("joint_angles", 6),
            ("joint_defaults", 6),
        ):
            object.__setattr__(self, name, _arr(getattr(self, name), n))
        object.__setattr__(self, "joint_accels", _arr(self.joint_accels))
        forces = np.asarray(self.contact_forces, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(forces)):
            raise ValueError("contact forces must be finite")
        object.__setattr__(self, "contact_forces", forces)
        for name in ("omega_cmd", "omega_actual", "psi_object", "psi_robot", "d_x", "v_z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)


def _sigmoid_neg(z: float) -> float:
    """1 / (1 + e^z) without overflow."""
    if z >= 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def yaw_gap(psi_o: float, psi_r: float) -> float:
    """Shortest angular distance in [0, pi]."""
    d = math.fmod(psi_o - psi_r, 2.0 * math.pi)
    d = abs(d)
    return 2.0 * math.pi - d if d > math.pi else d


# --- individual groups ---------------------------------------------------------------


def _tracking_terms(x: RewardInput, cfg: RewardConfig) -> dict[str, float]:
    ev = x.v_cmd - x.v_actual
    ew = x.omega_cmd - x.omega_actual
    k = cfg.tracking_sharpness
    return {
        "lin_vel_tracking": cfg.lin_vel_tracking * math.exp(-k * float(ev @ ev)),
        "ang_vel_tracking": cfg.ang_vel_tracking * math.exp(-k * ew * ew),
    }


def _collision_terms(x: RewardInput, cfg: RewardConfig) -> dict[str, float]:
    n_hit = int(np.sum(np.linalg.norm(x.contact_forces, axis=1) > cfg.contact_threshold)) if len(x.contact_forces) else 0
    return {
        "distance_keeping": cfg.distance_keeping * _sigmoid_neg(cfg.steepness * (x.d_x - cfg.d_th)),
        "yaw_alignment": cfg.yaw_alignment * (-yaw_gap(x.psi_object, x.psi_robot) / math.pi),
        "contact": cfg.contact * n_hit,
    }


def _effort_terms(x: RewardInput, cfg: RewardConfig) -> dict[str, float]:
    return {
        "joint_torque": cfg.joint_torque * float(x.joint_torques @ x.joint_torques),
        "joint_acc": cfg.joint_acc * float(x.joint_accels @ x.joint_accels),
        "ee_wrench": cfg.ee_wrench * float(x.ee_wrench @ x.ee_wrench),
    }


def _smoothness_pose_terms(x: RewardInput, cfg: RewardConfig) -> dict[str, float]:
    jerk = x.action - 2.0 * x.action_prev + x.action_prev2
    dq = x.joint_angles - x.joint_defaults
    return {
        "action_rate": cfg.action_rate * float(jerk @ jerk),
        "lin_vel_z": cfg.lin_vel_z * x.v_z * x.v_z,
        "ang_vel_xy": cfg.ang_vel_xy * float(x.omega_xy @ x.omega_xy),
        "orientation": cfg.orientation * float(x.gravity_xy @ x.gravity_xy),
        "default_joint": cfg.default_joint * float(dq @ dq),
    }


def tracking_reward(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> float:
    return sum(_tracking_terms(x, cfg).values())


def collision_reward(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> float:
    """Yaw alignment, distance keeping and undesired-contact count."""
    return sum(_collision_terms(x, cfg).values())


def effort_reward(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> float:
    return sum(_effort_terms(x, cfg).values())


def smoothness_pose_reward(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> float:
    return sum(_smoothness_pose_terms(x, cfg).values())


def total_reward(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> tuple[float, dict[str, float]]:
    """Sum of every term and the per-term breakdown (keys in ``TERMS`` order)."""
    parts = {}
    for group in (_tracking_terms, _collision_terms, _effort_terms, _smoothness_pose_terms):
        parts.update(group(x, cfg))
    breakdown = {k: parts[k] for k in TERMS}
    total = 0.0
    for v in breakdown.values():
        total += v
    return total, breakdown


# --- analytic gradients ---------------------------------------------------------------


def tracking_gradient(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> dict[str, np.ndarray | float]:
    """d tracking_reward / d (v_actual, omega_actual); the command gradients are the negatives."""
    ev = x.v_cmd - x.v_actual
    ew = x.omega_cmd - x.omega_actual
    k = cfg.tracking_sharpness
    g_v = cfg.lin_vel_tracking * math.exp(-k * float(ev @ ev)) * 2.0 * k * ev
    g_w = cfg.ang_vel_tracking * math.exp(-k * ew * ew) * 2.0 * k * ew
    return {"v_actual": g_v, "omega_actual": float(g_w)}


def effort_gradient(x: RewardInput, cfg: RewardConfig = RewardConfig()) -> dict[str, np.ndarray]:
    return {
        "joint_torques": 2.0 * cfg.joint_torque * x.joint_torques,
        "joint_accels": 2.0 * cfg.joint_acc * x.joint_accels,
        "ee_wrench": 2.0 * cfg.ee_wrench * x.ee_wrench,
    }


def estimator_loss(v_hat, v) -> float:
    """Squared error of the estimated object velocity (v_x, v_y, omega_z)."""
    d = _arr(v_hat, 3) - _arr(v, 3)
    return float(d @ d)


# --- domain randomization ---------------------------------------------------------------

GRASP_RANGES = {"chair": 0.10, "table": 0.20, "bin": 0.15}  # m, symmetric
FRICTION_RANGE = (0.1, 0.6)
MASS_RANGE = (5.0, 15.0)  # kg
LIN_CMD_RANGE = (-0.5, 0.5)  # m/s
ANG_CMD_RANGE = (-0.5, 0.5)  # rad/s


@dataclass(frozen=True)
class Randomization:
    grasp_perturbation: float | np.ndarray
    friction: float | np.ndarray
    mass: float | np.ndarray
    v_x: float | np.ndarray
    v_y: float | np.ndarray
    omega_z: float | np.ndarray = field(default=0.0)


def sample_randomization(category: str, seed: int, size: int | None = None) -> Randomization:
    """Uniform draws per parameter; arrays of length ``size`` when given.

    The grasp perturbation is a signed offset of the grasp point along the object's
    graspable edge. Draw order is fixed so each seed gives one sequence.
    """
    key = getattr(category, "value", category)
    if key not in GRASP_RANGES:
        raise UnknownCategory(f"no randomization ranges for category {category!r}")
    rng = np.random.default_rng(seed)
    g = GRASP_RANGES[key]
    vals = (
        rng.uniform(-g, g, size),
        rng.uniform(*FRICTION_RANGE, size),
        rng.uniform(*MASS_RANGE, size),
        rng.uniform(*LIN_CMD_RANGE, size),
        rng.uniform(*LIN_CMD_RANGE, size),
        rng.uniform(*ANG_CMD_RANGE, size),
    )
    if size is None:
        vals = tuple(float(v) for v in vals)
    return Randomization(*vals)

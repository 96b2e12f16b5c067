"""Additive velocity noise calibrated to a target mean absolute error."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# mean velocity-tracking error of the learned object controller (m/s); used as the default MAE
CALIBRATED_MAE = 0.0486
CALIBRATED_SD = 0.0319

HALF_NORMAL = math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian noise per axis with sigma = mae * sqrt(pi / 2).

    For x ~ N(0, sigma^2), E|x| = sigma * sqrt(2 / pi), so this sigma reproduces the
    configured MAE. ``sd_v`` is recorded for reference only and is not fitted.
    """

    mae_v: float = 0.0
    mae_omega: float = 0.0
    sd_v: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mae_v < 0 or self.mae_omega < 0:
            raise ValueError("noise MAE must be >= 0")

    @classmethod
    def calibrated(cls, seed: int = 0, mae: float = CALIBRATED_MAE) -> NoiseModel:
        return cls(mae_v=mae, mae_omega=mae, sd_v=CALIBRATED_SD, seed=seed)

    @property
    def sigma_v(self) -> float:
        return self.mae_v * HALF_NORMAL

    @property
    def sigma_omega(self) -> float:
        return self.mae_omega * HALF_NORMAL

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


class NoiseStream:
    """Sequential noise source; call k always consumes the k-th block of three normals."""

    def __init__(self, model: NoiseModel):
        self.model = model
        self._rng = model.rng()
        self.calls = 0

    def __call__(self, command: tuple[float, float, float]) -> tuple[float, float, float]:
        return apply_noise(command, self.model, self)


def apply_noise(command, model: NoiseModel, stream: NoiseStream | None = None) -> tuple[float, float, float]:
    """Perturb a ``(v_x, v_y, omega_z)`` command; exact passthrough when both MAEs are zero.

    Without an explicit ``stream`` the draw is the first one of the model's seed.
    """
    v_x, v_y, w_z = command
    if model.mae_v == 0.0 and model.mae_omega == 0.0:
        if stream is not None:
            stream.calls += 1
        return (v_x, v_y, w_z)
    rng = stream._rng if stream is not None else model.rng()
    z = rng.standard_normal(3)
    if stream is not None:
        stream.calls += 1
    sv, sw = model.sigma_v, model.sigma_omega
    return (v_x + sv * z[0], v_y + sv * z[1], w_z + sw * z[2])


def sample_noise(model: NoiseModel, count: int) -> np.ndarray:
    """(count, 3) noise draws with the same per-call layout as a fresh NoiseStream."""
    z = model.rng().standard_normal((count, 3))
    return z * np.array([model.sigma_v, model.sigma_v, model.sigma_omega])

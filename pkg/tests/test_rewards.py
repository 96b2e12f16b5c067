import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rearrange.errors import UnknownCategory
from rearrange.rewards import (
    TERMS,
    RewardConfig,
    RewardInput,
    collision_reward,
    effort_gradient,
    effort_reward,
    estimator_loss,
    sample_randomization,
    smoothness_pose_reward,
    total_reward,
    tracking_gradient,
    tracking_reward,
    yaw_gap,
)

CFG = RewardConfig()
IDEAL = RewardInput(d_x=5.0)  # object well ahead of the base, nothing else active


def test_table_defaults():
    assert (CFG.lin_vel_tracking, CFG.ang_vel_tracking, CFG.distance_keeping, CFG.yaw_alignment, CFG.contact) == (5.0, 5.0, -10.0, 5.0, -5.0)
    assert (CFG.joint_torque, CFG.joint_acc, CFG.ee_wrench) == (-2.5e-5, -2.5e-7, 1.0e-3)
    assert (CFG.action_rate, CFG.lin_vel_z, CFG.ang_vel_xy, CFG.orientation, CFG.default_joint) == (-2.0e-3, -2.0, -0.05, -10.0, -1.0)
    assert (CFG.steepness, CFG.contact_threshold) == (200.0, 1.0)


def test_tracking_examples():
    assert tracking_reward(RewardInput()) == 10.0
    x = RewardInput(v_cmd=(0.5, 0.0))
    assert tracking_reward(x) == 5.0 * math.exp(-1.0) + 5.0
    assert tracking_reward(x) == pytest.approx(6.839397205857212, abs=1e-15)
    vals = [tracking_reward(RewardInput(v_cmd=(e, 0.0), omega_cmd=e)) for e in np.linspace(0, 5, 30)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert 0.0 < vals[-1] < 1e-30


def test_collision_examples():
    br = total_reward(RewardInput(psi_object=1.0, psi_robot=1.0, d_x=5.0))[1]
    assert br["yaw_alignment"] == 0.0 and br["distance_keeping"] == 0.0 and br["contact"] == 0.0
    br = total_reward(RewardInput(d_x=CFG.d_th))[1]
    assert br["distance_keeping"] == -5.0
    br = total_reward(RewardInput(d_x=5.0, contact_forces=[(2.0, 0.0, 0.0)]))[1]
    assert br["contact"] == -5.0
    # exactly at the threshold does not count
    br = total_reward(RewardInput(d_x=5.0, contact_forces=[(1.0, 0.0, 0.0), (0.0, 3.0, 4.0)]))[1]
    assert br["contact"] == -5.0
    assert collision_reward(RewardInput(psi_object=math.pi, psi_robot=0.0, d_x=5.0)) == -5.0


def test_yaw_wraps():
    assert yaw_gap(3.0, -3.0) == pytest.approx(2 * math.pi - 6.0)
    assert yaw_gap(0.1, 0.1 + 4 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_effort_and_smoothness_examples():
    assert effort_reward(RewardInput()) == 0.0
    assert effort_reward(RewardInput(joint_torques=(10, 0, 0, 0, 0, 0))) == pytest.approx(-2.5e-3, rel=1e-15)
    a = tuple(np.linspace(-1, 1, 9))
    assert smoothness_pose_reward(RewardInput(action=a, action_prev=a, action_prev2=a)) == 0.0
    assert smoothness_pose_reward(RewardInput()) == 0.0
    assert smoothness_pose_reward(RewardInput(v_z=0.5)) == -0.5


def test_ideal_total():
    total, br = total_reward(IDEAL)
    assert total == 10.0
    assert list(br) == list(TERMS)
    assert all(v == 0.0 for k, v in br.items() if k not in ("lin_vel_tracking", "ang_vel_tracking"))


def oracle_total(x: RewardInput, c: RewardConfig) -> float:
    """Every term written out in one expression, independent of the package's grouping."""
    dv = np.subtract(x.v_cmd, x.v_actual)
    gap = abs((x.psi_object - x.psi_robot + math.pi) % (2 * math.pi) - math.pi)
    forces = np.asarray(x.contact_forces).reshape(-1, 3)
    jerk = np.asarray(x.action) - 2 * np.asarray(x.action_prev) + np.asarray(x.action_prev2)
    return (
        c.lin_vel_tracking * math.exp(-4 * float(dv @ dv))
        + c.ang_vel_tracking * math.exp(-4 * (x.omega_cmd - x.omega_actual) ** 2)
        + c.distance_keeping / (1 + math.exp(min(700.0, 200 * (x.d_x - c.d_th))))
        + c.yaw_alignment * (-gap / math.pi)
        + c.contact * int((np.linalg.norm(forces, axis=1) > 1.0).sum())
        + c.joint_torque * float(np.sum(np.square(x.joint_torques)))
        + c.joint_acc * float(np.sum(np.square(x.joint_accels)))
        + c.ee_wrench * float(np.sum(np.square(x.ee_wrench)))
        + c.action_rate * float(jerk @ jerk)
        + c.lin_vel_z * x.v_z**2
        + c.ang_vel_xy * float(np.sum(np.square(x.omega_xy)))
        + c.orientation * float(np.sum(np.square(x.gravity_xy)))
        + c.default_joint * float(np.sum(np.square(np.subtract(x.joint_angles, x.joint_defaults))))
    )


def random_input(rng) -> RewardInput:
    n = lambda k, s=1.0: tuple(rng.normal(scale=s, size=k))
    return RewardInput(
        v_cmd=n(2, 0.3), v_actual=n(2, 0.3), omega_cmd=float(rng.normal()), omega_actual=float(rng.normal()),
        psi_object=float(rng.uniform(-4, 4)), psi_robot=float(rng.uniform(-4, 4)), d_x=float(rng.uniform(0.4, 0.7)),
        contact_forces=[n(3, 1.5) for _ in range(int(rng.integers(0, 4)))], joint_torques=n(6, 20), joint_accels=n(6, 50),
        ee_wrench=n(6, 5), action=n(9), action_prev=n(9), action_prev2=n(9), v_z=float(rng.normal(scale=0.2)),
        omega_xy=n(2, 0.5), gravity_xy=n(2, 0.1), joint_angles=n(6), joint_defaults=n(6),
    )


def test_total_matches_oracle_and_breakdown():
    rng = np.random.default_rng(0)
    for _ in range(500):
        x = random_input(rng)
        total, br = total_reward(x)
        assert total == pytest.approx(oracle_total(x, CFG), rel=1e-12, abs=1e-12)
        assert abs(sum(br.values()) - total) <= 1e-12
        assert br["lin_vel_tracking"] + br["ang_vel_tracking"] == pytest.approx(tracking_reward(x), abs=1e-12)
        assert 0.0 < br["lin_vel_tracking"] <= 5.0 and 0.0 < br["ang_vel_tracking"] <= 5.0
        assert -5.0 <= br["yaw_alignment"] <= 0.0
        assert -10.0 < br["distance_keeping"] < 0.0
        assert br["contact"] in [-5.0 * k for k in range(len(x.contact_forces) + 1)]


def test_distance_term_decreases_below_threshold():
    vals = [total_reward(RewardInput(d_x=d))[1]["distance_keeping"] for d in np.linspace(0.60, 0.50, 21)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def rel_err(g, fd) -> float:
    """Relative error of a whole gradient vector, ||g - fd|| / max(||g||, ||fd||)."""
    g, fd = np.atleast_1d(g), np.atleast_1d(fd)
    scale = max(np.linalg.norm(g), np.linalg.norm(fd), 1e-8)  # floor for vanishing gradients
    return float(np.linalg.norm(g - fd) / scale)


def central(f, x: RewardInput, name: str, h: float = 1e-6) -> np.ndarray:
    base = np.atleast_1d(np.array(getattr(x, name), dtype=float))
    out = np.zeros_like(base)
    for i in range(len(base)):
        up, dn = base.copy(), base.copy()
        up[i] += h
        dn[i] -= h
        if base.shape == (1,) and np.ndim(getattr(x, name)) == 0:
            up, dn = float(up[0]), float(dn[0])
        out[i] = (f(replace(x, **{name: up})) - f(replace(x, **{name: dn}))) / (2 * h)
    return out


def test_gradients_against_finite_differences():
    rng = np.random.default_rng(1)
    names = ("joint_torques", "joint_accels", "ee_wrench")
    for _ in range(100):
        x = random_input(rng)
        # each tracking input is checked with the other tracking weight zeroed, same reasoning as below
        for name, cfg in (("v_actual", RewardConfig(ang_vel_tracking=0.0)), ("omega_actual", RewardConfig(lin_vel_tracking=0.0))):
            f = lambda y: tracking_reward(y, cfg)
            assert rel_err(tracking_gradient(x, cfg)[name], central(f, x, name)) < 1e-4
        for name in names:
            # the other effort inputs are zeroed so roundoff from their larger terms stays out of the difference
            xi = replace(x, **{o: np.zeros(len(getattr(x, o))) for o in names if o != name})
            assert rel_err(effort_gradient(xi)[name], central(effort_reward, xi, name)) < 1e-4


def test_input_validation():
    with pytest.raises(ValueError):
        RewardInput(v_cmd=(1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        RewardInput(d_x=math.inf)
    with pytest.raises(ValueError):
        RewardInput(action=(0.0,) * 8)


def test_config_roundtrip(tmp_path):
    c = RewardConfig(d_th=0.6, contact=-4.0)
    c.save(tmp_path / "r.json")
    assert RewardConfig.load(tmp_path / "r.json") == c
    with pytest.raises(ValueError):
        RewardConfig.from_json('{"bogus": 1}')


def test_estimator_loss():
    assert estimator_loss((0.1, 0.2, 0.3), (0.1, 0.2, 0.3)) == 0.0
    assert estimator_loss((1, 0, 0), (0, 0, 0)) == 1.0
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=3), rng.normal(size=3)
    assert estimator_loss(a, b) == pytest.approx(sum((p - q) ** 2 for p, q in zip(a, b)), rel=1e-14)
    with pytest.raises(ValueError):
        estimator_loss((1, 2), (1, 2))


@pytest.mark.parametrize("cat,g", [("chair", 0.10), ("table", 0.20), ("bin", 0.15)])
def test_randomization_ranges(cat, g):
    r = sample_randomization(cat, seed=3, size=100_000)
    assert np.all(np.abs(r.grasp_perturbation) <= g)
    assert np.abs(r.grasp_perturbation).max() > 0.99 * g
    assert np.all((r.friction >= 0.1) & (r.friction <= 0.6))
    assert np.all((r.mass >= 5.0) & (r.mass <= 15.0))
    assert abs(r.mass.mean() - 10.0) / 10.0 < 0.01
    for v in (r.v_x, r.v_y, r.omega_z):
        assert np.all(np.abs(v) <= 0.5)


def test_randomization_determinism_and_errors():
    a = sample_randomization("chair", 9)
    assert a == sample_randomization("chair", 9)
    assert isinstance(a.mass, float)
    assert a != sample_randomization("chair", 10)
    with pytest.raises(UnknownCategory):
        sample_randomization("custom", 0)
    with pytest.raises(UnknownCategory):
        sample_randomization("sofa", 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_tracking_bounded(e1, e2):
    r = tracking_reward(RewardInput(v_cmd=(e1, e2), omega_cmd=e1))
    assert 0.0 <= r <= 10.0

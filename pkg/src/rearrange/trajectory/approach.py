"""Grasp-pose geometry and two-stage (coarse approach, fine re-plan) object approach."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..geometry import MotionLimits, Pose2
from .collision import CollisionModel, OccupancyMap
from .planner import DEFAULT_SETTINGS, PlannerSettings, plan_se2
from .trajectory import Trajectory

DETECTION_RANGE = 5.0  # m


def pre_grasp_pose(object_pose: Pose2, grasp_offset: Pose2) -> Pose2:
    """Robot pose from which the object is grasped: ``object_pose * grasp_offset``."""
    return object_pose.compose(grasp_offset)


def object_pose_from_robot(robot_pose: Pose2, grasp_offset: Pose2) -> Pose2:
    """Pose of a rigidly held object: ``robot_pose * grasp_offset^-1``."""
    return robot_pose.compose(grasp_offset.inverse())


class Approach(NamedTuple):
    coarse: Trajectory
    fine: Trajectory
    trigger_pose: Pose2


def coarse_to_fine(
    robot: Pose2,
    approx_object_pose: Pose2,
    true_object_pose: Pose2,
    grasp_offset: Pose2,
    occ: OccupancyMap,
    limits: MotionLimits,
    model: CollisionModel | None = None,
    object_id: str | None = None,
    detection_range: float = DETECTION_RANGE,
    settings: PlannerSettings = DEFAULT_SETTINGS,
) -> Approach:
    """Plan toward the estimated object, switch to its true pose once within range.

    The coarse leg targets the pre-grasp pose of ``approx_object_pose`` and is cut at
    the first sample within ``detection_range`` of the estimate. When the robot
    already starts inside the range the coarse leg is a single stationary sample.
    ``object_id`` names the object's entry in ``occ`` so that it is placed at the
    estimated pose for the coarse leg and at the true pose for the fine leg.
    """
    model = model or CollisionModel.robot_only()
    coarse_map = occ if object_id is None else occ.with_object_pose(object_id, approx_object_pose.x, approx_object_pose.y)
    fine_map = occ if object_id is None else occ.with_object_pose(object_id, true_object_pose.x, true_object_pose.y)

    if robot.distance(approx_object_pose) <= detection_range:
        coarse = Trajectory.stationary(robot)
        trigger = robot
    else:
        full = plan_se2(robot, pre_grasp_pose(approx_object_pose, grasp_offset), model, coarse_map, limits, settings)
        d = np.hypot(full.data[:, 1] - approx_object_pose.x, full.data[:, 2] - approx_object_pose.y)
        inside = np.nonzero(d <= detection_range)[0]
        idx = int(inside[0]) if len(inside) else len(full) - 1
        coarse = full.truncate(idx)
        trigger = coarse.end
    fine = plan_se2(trigger, pre_grasp_pose(true_object_pose, grasp_offset), model, fine_map, limits, settings)
    return Approach(coarse, fine, trigger)

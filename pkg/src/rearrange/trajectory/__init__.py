from .approach import DETECTION_RANGE, Approach, coarse_to_fine, object_pose_from_robot, pre_grasp_pose
from .collision import (
    CollisionModel,
    FootprintMode,
    ObjectEntry,
    ObjectStatus,
    OccupancyMap,
    Phase,
    collision_check,
    collisions_along,
    update_map,
)
from .kinematics import integrate_unicycle
from .planner import DEFAULT_SETTINGS, PlannerSettings, plan_direct, plan_se2, rtr_candidates
from .trajectory import Segment, Trajectory, dump_trajectory, load_trajectory, profile_segments

__all__ = [
    "Approach",
    "CollisionModel",
    "DEFAULT_SETTINGS",
    "DETECTION_RANGE",
    "FootprintMode",
    "ObjectEntry",
    "ObjectStatus",
    "OccupancyMap",
    "Phase",
    "PlannerSettings",
    "Segment",
    "Trajectory",
    "coarse_to_fine",
    "collision_check",
    "collisions_along",
    "dump_trajectory",
    "integrate_unicycle",
    "load_trajectory",
    "object_pose_from_robot",
    "plan_direct",
    "plan_se2",
    "pre_grasp_pose",
    "profile_segments",
    "rtr_candidates",
    "update_map",
]

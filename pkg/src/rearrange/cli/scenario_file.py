"""JSON scenario files: parsing with field-addressed errors, and serialization.

Layout::

    {
      "name": "office", "seed": 0,
      "world": {"bounds": [xmin, ymin, xmax, ymax],
                "obstacles": [{"x": .., "y": .., "radius": ..}]},
      "robot": {"start": [x, y, theta],
                "limits": {"v_max": .., "omega_max": .., "a_max": .., "alpha_max": ..},
                "footprint": [[dx, dy, r], ...], "clearance": 0.05},
      "objects": [{"id": "chair1", "category": "chair", "pose": [x, y, theta],
                   "radius": .., "grasp_offset": [x, y, theta], "mass": .., "friction": ..}],
      "targets": [{"pose": [x, y, theta]}]
    }

``world.obstacles``, ``robot.limits``, ``robot.footprint``, ``robot.clearance``,
``mass``, ``friction``, ``name`` and ``seed`` are optional.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from ..errors import InvalidScenario, ScenarioParseError
from ..geometry import Bounds, Circle, MotionLimits, Pose2
from ..task_planner.scenario import Category, ObjectSpec, Scenario
from ..trajectory.collision import DEFAULT_CLEARANCE, DEFAULT_ROBOT_CIRCLES

_MISSING = object()


def _get(d: dict, key: str, path: str, default=_MISSING):
    if not isinstance(d, dict):
        raise ScenarioParseError("expected an object", path)
    if key not in d:
        if default is _MISSING:
            raise ScenarioParseError("missing required field", f"{path}.{key}" if path else key)
        return default
    return d[key]


def _num(v, path: str, positive: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioParseError(f"expected a finite number, got {v!r}", path)
    if positive and v <= 0:
        raise ScenarioParseError(f"must be > 0, got {v!r}", path)
    return float(v)


def _vec(v, n: int, path: str) -> list[float]:
    if not isinstance(v, list) or len(v) != n:
        raise ScenarioParseError(f"expected a list of {n} numbers", path)
    return [_num(x, f"{path}[{i}]") for i, x in enumerate(v)]


def _list(v, path: str) -> list:
    if not isinstance(v, list):
        raise ScenarioParseError("expected a list", path)
    return v


def _pose(v, path: str) -> Pose2:
    return Pose2(*_vec(v, 3, path))


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a Scenario; errors name the offending field."""
    if not isinstance(doc, dict):
        raise ScenarioParseError("top level must be an object")
    world = _get(doc, "world", "")
    b = _vec(_get(world, "bounds", "world"), 4, "world.bounds")
    if not (b[0] < b[2] and b[1] < b[3]):
        raise ScenarioParseError("need xmin < xmax and ymin < ymax", "world.bounds")
    obstacles = []
    for k, o in enumerate(_list(_get(world, "obstacles", "world", []), "world.obstacles")):
        p = f"world.obstacles[{k}]"
        obstacles.append(
            Circle(_num(_get(o, "x", p), p + ".x"), _num(_get(o, "y", p), p + ".y"), _num(_get(o, "radius", p), p + ".radius", True))
        )

    robot = _get(doc, "robot", "")
    start = _pose(_get(robot, "start", "robot"), "robot.start")
    lim = _get(robot, "limits", "robot", {})
    defaults = MotionLimits()
    limits = MotionLimits(
        **{
            f: _num(_get(lim, f, "robot.limits", getattr(defaults, f)), f"robot.limits.{f}", True)
            for f in ("v_max", "omega_max", "a_max", "alpha_max")
        }
    )
    fp = _list(_get(robot, "footprint", "robot", [list(c) for c in DEFAULT_ROBOT_CIRCLES]), "robot.footprint")
    footprint = []
    for k, c in enumerate(fp):
        dx, dy, r = _vec(c, 3, f"robot.footprint[{k}]")
        if r <= 0:
            raise ScenarioParseError("radius must be > 0", f"robot.footprint[{k}][2]")
        footprint.append((dx, dy, r))
    if not footprint:
        raise ScenarioParseError("footprint needs at least one circle", "robot.footprint")
    clearance = _num(_get(robot, "clearance", "robot", DEFAULT_CLEARANCE), "robot.clearance")

    objects = []
    for k, o in enumerate(_list(_get(doc, "objects", ""), "objects")):
        p = f"objects[{k}]"
        oid = _get(o, "id", p)
        if not isinstance(oid, str) or not oid:
            raise ScenarioParseError("expected a non-empty string", p + ".id")
        cat = _get(o, "category", p)
        try:
            cat = Category(cat)
        except ValueError:
            raise ScenarioParseError(f"unknown category {cat!r}", p + ".category") from None
        try:
            objects.append(
                ObjectSpec(
                    id=oid,
                    category=cat,
                    initial_pose=_pose(_get(o, "pose", p), p + ".pose"),
                    collision_radius=_num(_get(o, "radius", p), p + ".radius", True),
                    grasp_offset=_pose(_get(o, "grasp_offset", p), p + ".grasp_offset"),
                    mass=_num(_get(o, "mass", p, 10.0), p + ".mass"),
                    friction=_num(_get(o, "friction", p, 0.3), p + ".friction"),
                )
            )
        except ScenarioParseError:
            raise
        except InvalidScenario as e:
            raise ScenarioParseError(str(e), p) from None

    targets = []
    for k, t in enumerate(_list(_get(doc, "targets", ""), "targets")):
        targets.append(_pose(_get(t, "pose", f"targets[{k}]"), f"targets[{k}].pose"))

    seed = _get(doc, "seed", "", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioParseError("expected an integer", "seed")
    name = _get(doc, "name", "", "scenario")
    if not isinstance(name, str):
        raise ScenarioParseError("expected a string", "name")

    sc = Scenario(
        robot_start=start,
        objects=tuple(objects),
        targets=tuple(targets),
        static_obstacles=tuple(obstacles),
        world_bounds=Bounds(*b),
        limits=limits,
        footprint=tuple(footprint),
        clearance_margin=clearance,
        seed=seed,
        name=name,
    )
    try:
        sc.validate()
    except ScenarioParseError:
        raise
    except InvalidScenario as e:
        raise ScenarioParseError(str(e)) from None
    return sc


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, line=e.lineno) from None
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ScenarioParseError(f"cannot read {path}: {e.strerror}") from None
    return parse_scenario(text)


def _p(pose: Pose2) -> list[float]:
    return [pose.x, pose.y, pose.theta]


def scenario_to_dict(sc: Scenario) -> dict:
    b = sc.world_bounds
    lim = sc.limits
    return {
        "name": sc.name,
        "seed": sc.seed,
        "world": {
            "bounds": [b.xmin, b.ymin, b.xmax, b.ymax],
            "obstacles": [{"x": c.x, "y": c.y, "radius": c.radius} for c in sc.static_obstacles],
        },
        "robot": {
            "start": _p(sc.robot_start),
            "limits": {"v_max": lim.v_max, "omega_max": lim.omega_max, "a_max": lim.a_max, "alpha_max": lim.alpha_max},
            "footprint": [list(c) for c in sc.footprint],
            "clearance": sc.clearance_margin,
        },
        "objects": [
            {
                "id": o.id,
                "category": o.category.value,
                "pose": _p(o.initial_pose),
                "radius": o.collision_radius,
                "grasp_offset": _p(o.grasp_offset),
                "mass": o.mass,
                "friction": o.friction,
            }
            for o in sc.objects
        ],
        "targets": [{"pose": _p(t)} for t in sc.targets],
    }


def serialize_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"

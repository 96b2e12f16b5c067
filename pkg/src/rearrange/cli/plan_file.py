"""Plan dumps: ``plan.json`` plus one trajectory file per task leg."""
from __future__ import annotations

import json
from pathlib import Path

from ..task_planner.scenario import Scenario
from ..task_planner.search import TaskPlan
from ..trajectory.trajectory import dump_trajectory, load_trajectory

PLAN_FORMAT = "plan v1"


def write_plan(plan: TaskPlan, out_dir: str | Path, scenario: Scenario | None = None, bound: str | None = None) -> Path:
    """Write ``plan.json`` and ``task_<k>_{pre,post}.traj`` into ``out_dir``.

    ``order``/``assignment`` use 0-based indices; object ids are listed alongside
    when the scenario is given. Returns the path of ``plan.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for k, j in enumerate(plan.order):
        entry = {"k": k, "object": j, "target": plan.assignment[j]}
        if scenario is not None:
            entry["object_id"] = scenario.objects[j].id
        if plan.tasks:
            pre, post = plan.tasks[k]
            entry["pre"] = f"task_{k:02d}_pre.traj"
            entry["post"] = f"task_{k:02d}_post.traj"
            entry["pre_duration_s"] = round(pre.duration, 6)
            entry["post_duration_s"] = round(post.duration, 6)
            dump_trajectory(pre, out / entry["pre"])
            dump_trajectory(post, out / entry["post"])
        tasks.append(entry)
    doc = {
        "format": PLAN_FORMAT,
        "scenario": scenario.name if scenario is not None else None,
        "method": plan.method,
        "bound": bound,
        "total_cost_s": round(plan.total_cost, 6),
        "expansions": plan.expansions,
        "order": list(plan.order),
        "assignment": list(plan.assignment),
        "tasks": tasks,
    }
    path = out / "plan.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def read_plan(path: str | Path) -> TaskPlan:
    """Load a plan written by :func:`write_plan` (``path`` is the file or its directory).

    The total cost is recomputed from the stored trajectories.
    """
    p = Path(path)
    if p.is_dir():
        p = p / "plan.json"
    doc = json.loads(p.read_text())
    if doc.get("format") != PLAN_FORMAT:
        raise ValueError(f"{p}: not a {PLAN_FORMAT!r} file")
    tasks = []
    for entry in doc["tasks"]:
        if "pre" not in entry:
            tasks = []
            break
        tasks.append((load_trajectory(p.parent / entry["pre"]), load_trajectory(p.parent / entry["post"])))
    total = sum(a.duration + b.duration for a, b in tasks) if tasks else float(doc["total_cost_s"])
    return TaskPlan(
        order=tuple(doc["order"]),
        assignment=tuple(doc["assignment"]),
        tasks=tuple(tasks),
        total_cost=total,
        method=doc.get("method", ""),
        expansions=int(doc.get("expansions", 0)),
    )

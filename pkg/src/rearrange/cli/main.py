"""Command-line entry points: ``plan``, ``simulate`` and ``benchmark``.

Exit codes: 0 success, 1 harness/internal error, 2 unreadable or malformed input,
3 infeasible planning problem, 4 episode aborted (collision or divergence).
"""
from __future__ import annotations

import argparse
import csv
import glob
import io
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import (
    BoundViolation,
    CollisionAbort,
    Divergence,
    GoalInCollision,
    InfeasibleAssignment,
    NoPathFound,
    PlanningInfeasible,
    ScenarioParseError,
    StartInCollision,
)
from ..sim import CALIBRATED_MAE, METRICS_HEADER, NoiseModel, TrackerConfig, run_episode, write_metrics
from ..task_planner import BoundMode, build_cost_matrices, branch_and_bound, greedy_plan
from ..task_planner.search import SearchStats
from ..trajectory.trajectory import Trajectory, dump_trajectory
from .plan_file import read_plan, write_plan
from .scenario_file import load_scenario

log = logging.getLogger("rearrange")

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_ABORT = 0, 1, 2, 3, 4
INFEASIBLE = (PlanningInfeasible, InfeasibleAssignment, NoPathFound, GoalInCollision, StartInCollision)
VERIFY_MAX_N = 5
REPORT_HEADER = METRICS_HEADER + ("plan_cost_s", "status")
SUMMARY_HEADER = (
    "scenario",
    "method",
    "runs",
    "mean_completion_time_s",
    "sd_completion_time_s",
    "mean_total_distance_m",
    "sd_total_distance_m",
    "plan_cost_s",
    "success_rate",
    "collisions",
)


def shipped_scenarios() -> list[str]:
    root = resources.files("rearrange") / "scenarios"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_scenarios(spec: str) -> list[Path]:
    """A file path, a glob, or the name of a shipped scenario (``office``, ...)."""
    if Path(spec).is_file():
        return [Path(spec)]
    hits = sorted(glob.glob(spec))
    if hits:
        return [Path(h) for h in hits]
    shipped = resources.files("rearrange") / "scenarios" / f"{spec}.json"
    if shipped.is_file():
        return [Path(str(shipped))]
    raise ScenarioParseError(f"no scenario file matches {spec!r} (shipped: {', '.join(shipped_scenarios())})")


def make_plan(scenario, costs, method: str, bound: str, verify: bool = False):
    if method == "greedy":
        return greedy_plan(scenario, costs)
    try:
        greedy = greedy_plan(scenario, costs)
    except PlanningInfeasible as e:
        # greedy can walk into a dead end that a different order avoids
        log.info("no greedy warm start (%s); searching from scratch", e)
        greedy = None
    if verify and scenario.n > VERIFY_MAX_N:
        log.warning("--verify-bounds needs N <= %d, running without it (N=%d)", VERIFY_MAX_N, scenario.n)
        verify = False
    stats = SearchStats()
    plan = branch_and_bound(scenario, costs, greedy, BoundMode.parse(bound), verify=verify, stats=stats)
    if verify:
        log.info("bound verification: %d nodes checked, no violations", stats.verified_nodes)
    return plan


def cmd_plan(args) -> int:
    (path,) = resolve_scenarios(args.scenario)[:1]
    sc = load_scenario(path)
    costs = build_cost_matrices(sc)
    plan = make_plan(sc, costs, args.method, args.bound, args.verify_bounds)
    out = Path(args.out or "plan_out")
    write_plan(plan, out, sc, bound=args.bound if args.method == "bnb" else None)
    print(f"method={plan.method} cost_s={plan.total_cost:.3f} expansions={plan.expansions}")
    return EXIT_OK


def _noise(args, seed: int) -> NoiseModel:
    mae = CALIBRATED_MAE if args.noise_mae is None else args.noise_mae
    return NoiseModel.calibrated(seed=seed, mae=mae)


def cmd_simulate(args) -> int:
    (path,) = resolve_scenarios(args.scenario)[:1]
    sc = load_scenario(path)
    if args.plan:
        try:
            plan = read_plan(args.plan)
        except (OSError, ValueError, KeyError) as e:
            raise ScenarioParseError(f"cannot read plan {args.plan}: {e}") from None
        if len(plan.order) != sc.n:
            raise ScenarioParseError(f"plan has {len(plan.order)} tasks, scenario has {sc.n} objects")
    else:
        plan = make_plan(sc, build_cost_matrices(sc), args.method, args.bound, args.verify_bounds)
    out = Path(args.out or "sim_out")
    (out / "executed").mkdir(parents=True, exist_ok=True)
    for old in (out / "executed").glob("leg_*.traj"):
        old.unlink()
    code = EXIT_OK
    try:
        res = run_episode(sc, plan, TrackerConfig(), _noise(args, args.seed), replan=not args.no_replan)
    except CollisionAbort as e:
        log.error("%s", e)
        res, code = e.result, EXIT_ABORT
    except Divergence as e:
        log.error("%s", e)
        res, code = None, EXIT_ABORT
    if res is not None:
        for k, (oid, phase, path_arr) in enumerate(res.legs):
            dump_trajectory(Trajectory(path_arr), out / "executed" / f"leg_{k:02d}_{oid}_{phase}.traj")
        row = res.metrics_row(sc.name, plan.method, args.seed)
        write_metrics([row], out / "metrics.csv")
        print(",".join(str(row[h]) for h in METRICS_HEADER))
    return code


def _episode_row(sc, plan, args, seed: int) -> dict:
    row = {h: "" for h in REPORT_HEADER}
    row.update(scenario=sc.name, method=plan.method, seed=seed, plan_cost_s=f"{plan.total_cost:.3f}")
    try:
        res = run_episode(sc, plan, TrackerConfig(), _noise(args, seed), replan=not args.no_replan)
        status = "ok"
    except CollisionAbort as e:
        res, status = e.result, "collision"
    except Divergence:
        res, status = None, "divergence"
    except INFEASIBLE:
        res, status = None, "replan_failed"
    if res is not None:
        row.update(res.metrics_row(sc.name, plan.method, seed))
    row["status"] = status
    return row


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def summarize(rows: list[dict], n_objects: dict[str, int]) -> tuple[list[dict], list[str]]:
    """Per (scenario, method) means/SDs over completed runs and the check bnb <= greedy.

    ``success_rate`` is successfully placed objects over objects attempted in all runs.
    """
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["scenario"], r["method"]), []).append(r)
    summary, flags = [], []
    means = {}
    for (scn, method), rs in sorted(groups.items()):
        done = [r for r in rs if r["status"] == "ok"]
        t = np.array([float(r["completion_time_s"]) for r in done])
        d = np.array([float(r["total_distance_m"]) for r in done])
        sd = (lambda a: float(a.std(ddof=1)) if len(a) > 1 else 0.0)
        succ = sum(int(r["successes"] or 0) for r in rs) / (len(rs) * n_objects[scn])
        means[(scn, method)] = float(t.mean()) if len(t) else float("nan")
        summary.append(
            {
                "scenario": scn,
                "method": method,
                "runs": len(rs),
                "mean_completion_time_s": _fmt(t.mean()) if len(t) else "nan",
                "sd_completion_time_s": _fmt(sd(t)),
                "mean_total_distance_m": _fmt(d.mean()) if len(d) else "nan",
                "sd_total_distance_m": _fmt(sd(d)),
                "plan_cost_s": rs[0]["plan_cost_s"],
                "success_rate": f"{succ:.3f}",
                "collisions": sum(int(r["collisions"] or 0) for r in rs),
            }
        )
    for scn in sorted({s for s, _ in means}):
        g, b = means.get((scn, "greedy")), means.get((scn, "bnb"))
        if g is None or b is None:
            continue
        if not b <= g:
            flags.append(f"ORDERING_VIOLATION scenario={scn} bnb_mean_s={b:.3f} greedy_mean_s={g:.3f}")
    return summary, flags


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def run_benchmark(paths, methods, seeds, args) -> tuple[list[dict], list[dict], list[str]]:
    rows = []
    n_objects = {}
    for path in paths:
        sc = load_scenario(path)
        n_objects[sc.name] = sc.n
        try:
            costs = build_cost_matrices(sc)
        except INFEASIBLE as e:
            log.error("%s: %s", sc.name, e)
            for m in methods:
                for seed in seeds:
                    rows.append({**{h: "" for h in REPORT_HEADER}, "scenario": sc.name, "method": m, "seed": seed, "status": "infeasible"})
            continue
        for m in methods:
            plan = make_plan(sc, costs, m, args.bound, args.verify_bounds)
            for seed in seeds:
                rows.append(_episode_row(sc, plan, args, seed))
    rows.sort(key=lambda r: (r["scenario"], r["method"], int(r["seed"])))
    summary, flags = summarize(rows, n_objects)
    return rows, summary, flags


def cmd_benchmark(args) -> int:
    paths = []
    for spec in args.scenario_list:
        paths.extend(resolve_scenarios(spec))
    paths = sorted(set(paths))
    methods = sorted(set(args.method_list or ["greedy", "bnb"]))
    seeds = list(range(args.seed, args.seed + args.seeds))
    rows, summary, flags = run_benchmark(paths, methods, seeds, args)
    out = Path(args.out or "benchmark.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(_csv(REPORT_HEADER, rows))
    summary_path = out.with_name(out.stem + ".summary.csv")
    summary_path.write_text(_csv(SUMMARY_HEADER, summary))
    sys.stdout.write(_csv(SUMMARY_HEADER, summary))
    for f in flags:
        print(f)
    print(f"rows={len(rows)} report={out} summary={summary_path} ordering_violations={len(flags)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rearrange", description="Multi-object rearrangement planning and simulation")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--bound", choices=["assignment", "rowmin", "mst"], default="mst", help="BnB lower bound")
        sp.add_argument("--verify-bounds", action="store_true", help="cross-check BnB against brute force (N <= 5)")
        sp.add_argument("--out", help="output path")
        sp.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    sp = sub.add_parser("plan", help="plan one scenario and dump the plan")
    sp.add_argument("--scenario", required=True, help="scenario file or shipped scenario name")
    sp.add_argument("--method", choices=["greedy", "bnb"], default="bnb")
    common(sp)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("simulate", help="execute a plan closed-loop and write metrics")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--plan", help="plan directory or plan.json; planned on the fly when omitted")
    sp.add_argument("--method", choices=["greedy", "bnb"], default="bnb")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--noise-mae", type=float, default=None, help=f"velocity noise MAE (default {CALIBRATED_MAE})")
    sp.add_argument("--no-replan", action="store_true", help="execute legs exactly as planned")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("benchmark", help="scenarios x methods x seeds report")
    sp.add_argument("--scenario", dest="scenario_list", action="append", required=True, help="path, glob or shipped name; repeatable")
    sp.add_argument("--method", dest="method_list", action="append", choices=["greedy", "bnb"])
    sp.add_argument("--seed", type=int, default=0, help="first seed")
    sp.add_argument("--seeds", type=int, default=20, help="number of consecutive seeds")
    sp.add_argument("--noise-mae", type=float, default=None)
    sp.add_argument("--no-replan", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ScenarioParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except INFEASIBLE as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BoundViolation as e:
        print(f"bound violation: {e}", file=sys.stderr)
        return EXIT_ERROR

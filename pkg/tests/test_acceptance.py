"""Acceptance criteria 1-12, one test each; every test prints a PASS/FAIL line."""
import csv
import itertools
import math
import time
from dataclasses import replace

import numpy as np
import pytest
from helpers import GRASP, cluttered_query, dense_poses, random_instance, random_matrices
from test_interaction_graph import random_state, two_node_graph
from test_kinematics import closed_form
from test_rewards import central, random_input, rel_err
from test_search import exhaustive

from rearrange.cli import main
from rearrange.geometry import MotionLimits, Pose2, wrap_angle
from rearrange.interaction_graph import Dense, GnnWeights, build_graph, edge_conv, graph_embed
from rearrange.rewards import RewardConfig, RewardInput, effort_gradient, effort_reward, total_reward, tracking_gradient, tracking_reward
from rearrange.sim import NoiseModel, NoiseStream, TrackerConfig, apply_noise, figure_eight_reference, is_success, track_trajectory
from rearrange.sim.episode import EpisodeResult, _finish
from rearrange.task_planner import (
    BoundMode,
    ObjectSpec,
    Scenario,
    SearchStats,
    TaskPlan,
    branch_and_bound,
    greedy_plan,
    hungarian_assign,
    mst_travel_bound,
    prim_mst_weight,
)
from rearrange.trajectory import collision_check, integrate_unicycle, plan_se2

# perimeter of the 12 m x 6 m lemniscate (multi-precision quadrature)
FIGURE_EIGHT_LENGTH = 36.583340820629496
SHIPPED = ("office", "warehouse", "library")
ADVERSARIAL = ("adversarial",)


@pytest.fixture
def report(capsys):
    def _report(n: int, title: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'} {title}: {detail}", flush=True)
        assert ok, f"criterion {n} failed: {detail}"

    return _report


@pytest.fixture(scope="module")
def instances():
    """200 random scenarios, N = 2..5, with their (shared) cost matrices."""
    return [random_instance(10_000 + k, 2 + k % 4) for k in range(200)]


@pytest.fixture(scope="module")
def benchmark_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench_a") / "bench.csv"
    args = ["benchmark", "--seeds", "20", "--out", str(out)]
    for s in SHIPPED + ADVERSARIAL:
        args += ["--scenario", s]
    code = main(args)
    return args, code, out


def test_c01_bnb_optimality(instances, report):
    mismatches, elapsed = 0, 0.0
    for sc, costs in instances:
        t = time.perf_counter()
        plan = branch_and_bound(sc, costs, greedy_plan(sc, costs))
        elapsed += time.perf_counter() - t
        mismatches += plan.total_cost != exhaustive(costs)
    report(1, "BnB optimality", mismatches == 0 and elapsed < 60.0, f"{len(instances)} scenarios, {mismatches} mismatches, {elapsed:.1f} s")


def test_c02_ordering(benchmark_run, report):
    _, code, out = benchmark_run
    summary = {(r["scenario"], r["method"]): r for r in csv.DictReader(out.with_name("bench.summary.csv").read_text().splitlines())}
    mean = lambda s, m: float(summary[(s, m)]["mean_completion_time_s"])
    runs_ok = all(int(r["runs"]) == 20 for r in summary.values())
    ordered = {s: mean(s, "bnb") <= mean(s, "greedy") for s in SHIPPED}
    gaps = {s: (mean(s, "greedy") - mean(s, "bnb")) / mean(s, "greedy") for s in ADVERSARIAL}
    ok = code == 0 and runs_ok and all(ordered.values()) and max(gaps.values()) >= 0.05
    detail = ", ".join(f"{s} bnb {mean(s, 'bnb'):.1f} s vs greedy {mean(s, 'greedy'):.1f} s" for s in SHIPPED)
    detail += ", " + ", ".join(f"{s} gap {100 * g:.1f}%" for s, g in gaps.items())
    report(2, "BnB <= greedy over 20 seeds", ok, detail)


def test_c03_bound_admissibility(instances, report, tmp_path, capsys):
    checked, failures = 0, []
    for mode in BoundMode:
        for k, (sc, costs) in enumerate(instances):
            stats = SearchStats()
            try:
                plan = branch_and_bound(sc, costs, greedy_plan(sc, costs), mode, verify=True, stats=stats)
                if plan.total_cost != exhaustive(costs):
                    failures.append((mode.value, k))
            except Exception as e:  # BoundViolation and anything unexpected are both failures
                failures.append((mode.value, k, type(e).__name__))
            checked += stats.verified_nodes
    # the command-line flag on the shipped scenarios
    codes = [main(["plan", "--scenario", s, "--bound", m, "--verify-bounds", "--out", str(tmp_path / f"{s}_{m}")]) for s in SHIPPED + ADVERSARIAL for m in ("assignment", "rowmin", "mst")]
    capsys.readouterr()
    ok = not failures and all(c == 0 for c in codes)
    report(3, "bound admissibility", ok, f"3 modes x {len(instances)} scenarios, {checked} nodes verified, violations {failures}, CLI exit codes {sorted(set(codes))}")


def test_c04_hungarian_and_mst(report):
    rng = np.random.default_rng(40)
    bad_h = 0
    for _ in range(500):
        n = int(rng.integers(1, 7))
        c = rng.integers(0, 100, size=(n, n)).astype(float)
        brute = min(sum(c[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
        bad_h += hungarian_assign(c)[1] != brute
    bad_m = 0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        a = rng.integers(1, 50, size=(n, n)).astype(float)
        w = np.triu(a, 1) + np.triu(a, 1).T
        mst = prim_mst_weight(w)
        shortest = min(sum(w[p[k], p[k + 1]] for k in range(n - 1)) for p in itertools.permutations(range(n)))
        bad_m += not mst <= shortest
    # the travel bound the search uses, against every completion's travel legs
    bad_t = 0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        costs = random_matrices(rng, n)
        k = int(rng.integers(1, n + 1))
        remaining = sorted(int(x) for x in rng.choice(n, size=k, replace=False))
        free = sorted(int(x) for x in rng.choice(n, size=k, replace=False))
        cur = int(rng.integers(0, n + 1))
        bound = mst_travel_bound(cur, remaining, costs, free)
        a = costs.travel
        best = min(
            a[cur, o[0]] + sum(a[r[i] + 1, o[i + 1]] for i in range(k - 1))
            for o in itertools.permutations(remaining)
            for r in itertools.permutations(free)
        )
        bad_t += not bound <= best
    ok = bad_h == 0 and bad_m == 0 and bad_t == 0
    report(4, "Hungarian / MST oracles", ok, f"hungarian mismatches {bad_h}/500, MST above a Hamiltonian path {bad_m}/200, travel bound above a completion {bad_t}/200")


def test_c05_kinematics(report):
    rng = np.random.default_rng(50)
    worst_cf = worst_rev = 0.0
    for _ in range(10_000):
        x0, y0 = rng.uniform(-10, 10, 2)
        th0 = rng.uniform(-math.pi, math.pi)
        v = rng.uniform(-1, 1)
        w = rng.choice([-1, 1]) * rng.uniform(1e-3, 2.0)
        dt = rng.uniform(1e-3, 2.0)
        p = integrate_unicycle(Pose2(x0, y0, th0), v, w, dt)
        ex, ey, eth = closed_form(x0, y0, th0, v, w, dt)
        worst_cf = max(worst_cf, abs(p.x - ex), abs(p.y - ey), abs(wrap_angle(p.theta - eth)))
        q = integrate_unicycle(p, -v, -w, dt)
        worst_rev = max(worst_rev, abs(q.x - x0), abs(q.y - y0), abs(wrap_angle(q.theta - th0)))
    report(5, "unicycle kinematics", worst_cf < 1e-9 and worst_rev < 1e-9, f"10^4 samples, closed-form max err {worst_cf:.1e}, reversibility max err {worst_rev:.1e}")


def test_c06_trajectory_safety(report):
    lim = MotionLimits()
    violations = bound_breaks = 0
    for seed in range(100):
        start, goal, model, occ = cluttered_query(seed)
        tr = plan_se2(start, goal, model, occ, lim)
        violations += sum(collision_check(p, model, occ) for p in dense_poses(tr, 0.05))
        bound_breaks += tr.duration < start.distance(goal) / lim.v_max
    ok = violations == 0 and bound_breaks == 0
    report(6, "trajectory safety", ok, f"100 cluttered maps, {violations} dense collision hits, {bound_breaks} straight-line bound violations")


def test_c07_noise_calibration(report):
    m = NoiseModel.calibrated(seed=70, mae=0.0486)
    stream = NoiseStream(m)
    draws = np.array([apply_noise((0.0, 0.0, 0.0), m, stream) for _ in range(1_000_000)])
    mae_v = float(np.abs(draws[:, 0]).mean())
    mae_w = float(np.abs(draws[:, 2]).mean())
    rel = max(abs(mae_v - 0.0486), abs(mae_w - 0.0486)) / 0.0486
    report(7, "noise calibration", rel < 0.01, f"10^6 draws, MAE v {mae_v:.5f}, omega {mae_w:.5f} m/s, worst relative deviation {100 * rel:.2f}%")


def test_c08_figure_eight(report):
    ref = figure_eight_reference()
    nominal = FIGURE_EIGHT_LENGTH / 0.3
    lines, ok = [], True
    for seed in range(5):
        t = time.perf_counter()
        res = track_trajectory(ref, ref.start, TrackerConfig(), NoiseModel.calibrated(seed=seed), MotionLimits())
        wall = time.perf_counter() - t
        dev = abs(res.completion_time - nominal) / nominal
        ok &= res.mean_error < 0.10 and dev <= 0.10 and wall < 10.0
        lines.append(f"seed {seed}: mean err {res.mean_error:.4f} m, time {res.completion_time:.1f} s ({100 * dev:.1f}%), {wall:.2f} s wall")
    report(8, "figure-eight tracking", ok, f"reference {nominal:.1f} s; " + "; ".join(lines))


def test_c09_rewards(report):
    ok = tracking_reward(RewardInput()) == 10.0
    ok &= total_reward(RewardInput(d_x=RewardConfig().d_th))[1]["distance_keeping"] == -5.0
    ok &= total_reward(RewardInput(d_x=5.0, contact_forces=[(2.0, 0.0, 0.0)]))[1]["contact"] == -5.0
    ok &= total_reward(RewardInput(d_x=5.0))[0] == 10.0
    examples = ok
    rng = np.random.default_rng(90)
    worst = 0.0
    names = ("joint_torques", "joint_accels", "ee_wrench")
    for _ in range(100):
        x = random_input(rng)
        for name, cfg in (("v_actual", RewardConfig(ang_vel_tracking=0.0)), ("omega_actual", RewardConfig(lin_vel_tracking=0.0))):
            worst = max(worst, rel_err(tracking_gradient(x, cfg)[name], central(lambda y: tracking_reward(y, cfg), x, name)))
        for name in names:
            xi = replace(x, **{o: np.zeros(len(getattr(x, o))) for o in names if o != name})
            worst = max(worst, rel_err(effort_gradient(xi)[name], central(effort_reward, xi, name)))
    ok &= worst < 1e-4
    report(9, "reward terms", ok, f"table examples {'exact' if examples else 'MISMATCH'}, FD gradient worst relative error {worst:.1e} (step 1e-6)")


def test_c10_graph(report):
    rng = np.random.default_rng(100)
    w = GnnWeights.seeded(0)
    shapes = True
    for k in range(1000):
        g = build_graph(*random_state(rng))
        shapes &= g.nodes.shape == (9, 15) and g.edges.shape == (28, 2) and g.edge_features.shape == (28, 7)
        if k % 100 == 0:
            shapes &= graph_embed(g, w).shape == (128,)
    worst = 0.0
    for _ in range(20):
        g = build_graph(*random_state(rng))
        worst = max(worst, float(np.max(np.abs(graph_embed(g, w) - graph_embed(g.permuted(rng.permutation(9)), w)))))
    n4 = build_graph(*random_state(rng)).incoming(4) == {0, 3, 5}
    layers = [Dense([[1.0, 2.0, -1.0]], [0.75]), Dense([[2.0]], [-1.0]), Dense([[1.0]], [0.0])]
    out = edge_conv(two_node_graph(), layers)
    hand = out[0, 0] == 0.0 and out[1, 0] == -0.3934693402873666
    ok = shapes and worst <= 1e-12 and n4 and hand
    report(10, "interaction graph", ok, f"shapes {shapes} over 10^3 states, relabeling max diff {worst:.1e}, n4 neighbors {n4}, hand EdgeConv {hand}")


def test_c11_determinism(benchmark_run, report, tmp_path, capsys):
    args, code, out = benchmark_run
    out_b = tmp_path / "bench.csv"
    rerun = list(args)
    rerun[rerun.index("--out") + 1] = str(out_b)
    code_b = main(rerun)
    capsys.readouterr()
    same = out.read_bytes() == out_b.read_bytes()
    same_summary = out.with_name("bench.summary.csv").read_bytes() == out_b.with_name("bench.summary.csv").read_bytes()
    rows = len(out.read_text().splitlines()) - 1
    ok = code == code_b == 0 and same and same_summary
    report(11, "benchmark determinism", ok, f"{rows} rows, report identical {same}, summary identical {same_summary}")


def test_c12_success_thresholds(report):
    deg = math.radians
    direct = [
        (is_success(0.299, deg(44.9)), True),
        (is_success(0.301, deg(44.9)), False),
        (is_success(0.299, deg(45.1)), False),
        (is_success(0.3, 0.0), False),
        (is_success(0.0, math.pi / 4), False),
    ]
    scored = []
    obj = ObjectSpec("a", "chair", Pose2(5, 5, 0), 0.25, GRASP)
    target = Pose2(10, 10, 0.3)
    sc = Scenario(Pose2(2, 2, 0), [obj], [target])
    for dx, dth, expect in ((0.299, 44.9, True), (0.301, 0.0, False), (0.0, 45.1, False), (0.0, -44.9, True)):
        res = EpisodeResult()
        _finish(res, sc, TaskPlan((0,), (0,)), {"a": Pose2(target.x + dx, target.y, target.theta + deg(dth))}, 0.0, 0)
        scored.append((res.per_object[0].success, expect))
    ok = all(bool(a) == b for a, b in direct + scored)
    report(12, "success thresholds", ok, f"{len(direct) + len(scored)} boundary vectors at 0.3 m / 45 deg")

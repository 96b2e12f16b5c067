import itertools
import math

import numpy as np
import pytest
from helpers import random_instance, random_matrices

from rearrange.errors import BoundViolation, PlanningInfeasible
from rearrange.task_planner import (
    BoundMode,
    CostMatrices,
    SearchStats,
    TaskPlan,
    branch_and_bound,
    greedy_plan,
    lower_bound,
    mst_travel_bound,
    plan_cost,
)
from rearrange.trajectory import Trajectory


def exhaustive(costs):
    """Independent oracle: every (order, target sequence) pair, written without package helpers."""
    a, b = costs.travel, costs.manipulate
    n = costs.n
    best = math.inf
    for order in itertools.permutations(range(n)):
        for tg in itertools.permutations(range(n)):
            loc, c = 0, 0.0
            for j, l in zip(order, tg):
                c += a[loc, j] + b[j, l]
                loc = l + 1
            best = min(best, c)
    return best


def test_single_object():
    costs = CostMatrices([[4.0], [9.0]], [[2.5]])
    plan = branch_and_bound(None, costs)
    assert plan.order == (0,) and plan.assignment == (0,)
    assert plan.total_cost == 6.5
    assert greedy_plan(None, costs).total_cost == 6.5


def test_greedy_nearest_and_ties():
    a = [[2.0, 1.0], [1.0, 1.0], [1.0, 1.0]]
    b = [[1.0, 1.0], [1.0, 1.0]]
    assert greedy_plan(None, CostMatrices(a, b)).order == (1, 0)
    a = [[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]
    plan = greedy_plan(None, CostMatrices(a, b))
    assert plan.order == (0, 1) and plan.assignment == (0, 1)


@pytest.mark.parametrize("mode", list(BoundMode))
def test_bnb_matches_exhaustive_on_random_matrices(mode):
    rng = np.random.default_rng(list(BoundMode).index(mode))
    for _ in range(60):
        n = int(rng.integers(1, 6))
        costs = random_matrices(rng, n)
        plan = branch_and_bound(None, costs, greedy_plan(None, costs), mode)
        assert plan.total_cost == exhaustive(costs)


def test_bnb_with_infinite_entries():
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(150):
        n = int(rng.integers(2, 5))
        costs = random_matrices(rng, n, inf_frac=0.3)
        best = exhaustive(costs)
        if math.isinf(best):
            with pytest.raises(PlanningInfeasible):
                branch_and_bound(None, costs)
            continue
        checked += 1
        assert branch_and_bound(None, costs).total_cost == best
    assert checked > 50


def test_warm_start_dominance_and_verify():
    for seed in range(6):
        sc, costs = random_instance(seed, 4)
        g = greedy_plan(sc, costs)
        for mode in BoundMode:
            stats = SearchStats()
            p = branch_and_bound(sc, costs, g, mode, verify=True, stats=stats)
            assert p.total_cost <= g.total_cost + 1e-9
            assert stats.verified_nodes >= stats.expansions


def test_mst_prunes_at_least_as_well():
    for seed in range(8):
        sc, costs = random_instance(100 + seed, 4)
        g = greedy_plan(sc, costs)
        s_assign, s_mst = SearchStats(), SearchStats()
        branch_and_bound(sc, costs, g, BoundMode.ASSIGNMENT, stats=s_assign)
        branch_and_bound(sc, costs, g, BoundMode.MST, stats=s_mst)
        assert s_mst.expansions <= s_assign.expansions


def test_verify_catches_inadmissible_bound(monkeypatch):
    import rearrange.task_planner.search as search

    rng = np.random.default_rng(0)
    costs = random_matrices(rng, 4)
    real = search.lower_bound
    monkeypatch.setattr(search, "lower_bound", lambda *a: 10.0 * real(*a) + 50.0)
    with pytest.raises(BoundViolation):
        branch_and_bound(None, costs, verify=True)


def test_mst_bound_admissible():
    rng = np.random.default_rng(6)
    for _ in range(150):
        n = int(rng.integers(1, 6))
        costs = random_matrices(rng, n)
        a = costs.travel
        k = int(rng.integers(1, n + 1))
        remaining = sorted(int(x) for x in rng.choice(n, size=k, replace=False))
        free = sorted(int(x) for x in rng.choice(n, size=k, replace=False))
        cur = int(rng.integers(0, n + 1))
        bound = mst_travel_bound(cur, remaining, costs, free)
        for order in itertools.permutations(remaining):
            for rel in itertools.permutations(free):
                # travel legs of a completion: current -> first object, then release rel[i] -> order[i + 1]
                t = a[cur, order[0]] + sum(a[rel[i] + 1, order[i + 1]] for i in range(k - 1))
                assert bound <= t + 1e-9


def test_singleton_mst_is_single_edge():
    costs = CostMatrices([[3.0, 5.0], [1.0, 2.0], [4.0, 4.0]], [[1.0, 1.0], [1.0, 1.0]])
    assert mst_travel_bound(0, [1], costs) == 5.0


def test_lower_bound_empty():
    costs = CostMatrices([[3.0], [1.0]], [[1.0]])
    for mode in BoundMode:
        assert lower_bound(costs, 0, (), (), mode) == 0.0


def test_plan_cost():
    assert plan_cost(TaskPlan((), ())) == 0.0
    a = Trajectory(np.array([[0, 0, 0, 0, 1, 0], [3.0, 3, 0, 0, 0, 0]]))
    b = Trajectory(np.array([[0, 3, 0, 0, 1, 0], [4.5, 7.5, 0, 0, 0, 0]]))
    assert plan_cost(TaskPlan((0,), (0,), ((a, b),))) == 7.5


def test_plan_cost_remeasured_on_real_plan():
    sc, costs = random_instance(7, 3)
    plan = branch_and_bound(sc, costs, greedy_plan(sc, costs))
    measured = sum(float(pre.data[-1, 0] - pre.data[0, 0]) + float(post.data[-1, 0] - post.data[0, 0]) for pre, post in plan.tasks)
    assert abs(plan.total_cost - measured) < 1e-9
    for k, (j, (pre, post)) in enumerate(zip(plan.order, plan.tasks)):
        assert pre.end.distance(sc.pre_grasp(j)) < 1e-6
        assert post.end.distance(sc.release_pose(plan.assignment[j])) < 1e-6


def test_taskplan_validation():
    with pytest.raises(ValueError):
        TaskPlan((0, 0), (0, 1))
    with pytest.raises(ValueError):
        TaskPlan((0, 1), (1, 1))


def test_size_mismatch():
    sc, costs = random_instance(1, 2)
    with pytest.raises(ValueError):
        greedy_plan(sc, CostMatrices([[1.0]], [[1.0]]))


def test_bnb_without_warm_start_where_greedy_dead_ends():
    inf = math.inf
    # greedy takes object 0 (travel 1) to target 0 (manipulate 1); from there object 1 is unreachable
    a = [[1.0, 2.0], [inf, inf], [5.0, 5.0]]
    b = [[1.0, 3.0], [1.0, 1.0]]
    costs = CostMatrices(a, b)
    with pytest.raises(PlanningInfeasible):
        greedy_plan(None, costs)
    plan = branch_and_bound(None, costs)
    assert plan.total_cost == exhaustive(costs) == 9.0


def test_deterministic_plan():
    sc, costs = random_instance(9, 4)
    p1 = branch_and_bound(sc, costs, greedy_plan(sc, costs))
    p2 = branch_and_bound(sc, costs, greedy_plan(sc, costs))
    assert (p1.order, p1.assignment, p1.total_cost) == (p2.order, p2.assignment, p2.total_cost)

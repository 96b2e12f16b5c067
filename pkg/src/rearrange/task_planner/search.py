"""Joint visitation-order / target-assignment search.

A plan visits objects in ``order`` and delivers object ``i`` to ``assignment[i]``.
Its cost is the sum of the travel legs (start or previous release to the next
pre-grasp pose) and manipulation legs (grasp pose to release pose).
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ..errors import BoundViolation, PlanningInfeasible
from ..trajectory.trajectory import Trajectory
from .assignment import assignment_bound
from .costs import CostMatrices
from .mst import prim_mst_weight
from .scenario import Scenario

EPS = 1e-9


class BoundMode(str, Enum):
    ASSIGNMENT = "assignment"
    ROW_MIN = "assignment+row_min_travel"
    MST = "assignment+mst_travel"

    @classmethod
    def parse(cls, value: str | BoundMode) -> BoundMode:
        aliases = {"assignment": cls.ASSIGNMENT, "rowmin": cls.ROW_MIN, "mst": cls.MST}
        if isinstance(value, cls):
            return value
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class TaskPlan:
    order: tuple[int, ...]
    assignment: tuple[int, ...]  # assignment[object] = target
    tasks: tuple[tuple[Trajectory, Trajectory], ...] = ()
    total_cost: float = 0.0
    method: str = ""
    expansions: int = 0

    def __post_init__(self):
        n = len(self.order)
        if sorted(self.order) != list(range(n)):
            raise ValueError(f"order {self.order} is not a permutation")
        if sorted(self.assignment) != list(range(n)) or len(self.assignment) != n:
            raise ValueError(f"assignment {self.assignment} is not a bijection")
        if self.tasks and len(self.tasks) != n:
            raise ValueError("one (pre, post) trajectory pair per task is required")

    @property
    def target_sequence(self) -> tuple[int, ...]:
        """Target of the k-th task."""
        return tuple(self.assignment[i] for i in self.order)


def plan_cost(plan: TaskPlan) -> float:
    """Sum of the durations of every task trajectory."""
    total = 0.0
    for pre, post in plan.tasks:
        total += pre.duration + post.duration
    return total


def sequence_cost(costs: CostMatrices, order: Sequence[int], targets: Sequence[int], start: int = 0) -> float:
    """Cost of visiting ``order[k]`` and releasing it at ``targets[k]``, from departure row ``start``."""
    a, b = costs.travel, costs.manipulate
    loc = start
    total = 0.0
    for j, l in zip(order, targets):
        total = total + (a[loc, j] + b[j, l])
        loc = l + 1
    return float(total)


def _assemble(costs: CostMatrices, order, targets, method: str, expansions: int = 0) -> TaskPlan:
    n = len(order)
    assignment = [0] * n
    for j, l in zip(order, targets):
        assignment[j] = l
    total = sequence_cost(costs, order, targets)
    if not math.isfinite(total):
        raise PlanningInfeasible("plan uses an infeasible leg")
    tasks = ()
    if costs.has_paths():
        loc = 0
        pairs = []
        for j, l in zip(order, targets):
            pairs.append((costs.travel_paths[(loc, j)], costs.manipulate_paths[(j, l)]))
            loc = l + 1
        tasks = tuple(pairs)
        total = 0.0
        for pre, post in tasks:
            total += pre.duration + post.duration
    return TaskPlan(tuple(order), tuple(assignment), tasks, total, method, expansions)


def _check_sizes(scenario, costs: CostMatrices) -> None:
    if scenario is not None and scenario.n != costs.n:
        raise ValueError(f"scenario has {scenario.n} objects, cost matrices cover {costs.n}")


def greedy_plan(scenario: Scenario | None, costs: CostMatrices) -> TaskPlan:
    """Nearest next object by travel cost, then its cheapest free target; lowest index on ties.

    ``scenario`` only cross-checks sizes and may be None for matrix-only instances.
    """
    _check_sizes(scenario, costs)
    n = costs.n
    a, b = costs.travel, costs.manipulate
    loc = 0
    objs, tgts = list(range(n)), list(range(n))
    order, targets = [], []
    while objs:
        j = min(objs, key=lambda o: (a[loc, o], o))
        if not math.isfinite(a[loc, j]):
            raise PlanningInfeasible(f"greedy: no reachable object from departure {loc}")
        l = min(tgts, key=lambda t: (b[j, t], t))
        if not math.isfinite(b[j, l]):
            raise PlanningInfeasible(f"greedy: object {j} cannot reach a free target")
        order.append(j)
        targets.append(l)
        objs.remove(j)
        tgts.remove(l)
        loc = l + 1
    return _assemble(costs, order, targets, "greedy")


# --- bounds -----------------------------------------------------------------


def travel_edge(costs: CostMatrices, i: int, j: int, targets: Iterable[int]) -> float:
    """Lower bound on the travel leg between consecutive visits to objects i and j.

    Either leg departs from the release pose of a still-free target, so the cheapest
    such travel entry into i or j bounds it; a straight-line time stands in when all
    relevant entries are infinite.
    """
    a = costs.travel
    rows = [l + 1 for l in targets]
    best = math.inf
    for r in rows:
        best = min(best, a[r, i], a[r, j])
    if not math.isfinite(best):
        for r in rows:
            best = min(best, costs.fallback_travel(r, i), costs.fallback_travel(r, j))
    return float(best)


def mst_travel_bound(current: int, remaining: Sequence[int], costs: CostMatrices, targets: Sequence[int] | None = None) -> float:
    """Prim MST over the current location and the remaining objects' pre-grasp poses.

    ``current`` is a travel-matrix row. ``targets`` are the still-free targets whose
    releases can precede a later visit (defaults to every target).
    """
    remaining = list(remaining)
    if not remaining:
        return 0.0
    if targets is None:
        targets = range(costs.n)
    targets = list(targets)
    m = len(remaining) + 1
    w = np.full((m, m), math.inf)
    np.fill_diagonal(w, 0.0)
    a = costs.travel
    for k, j in enumerate(remaining, start=1):
        e = a[current, j]
        if not math.isfinite(e):
            e = costs.fallback_travel(current, j)
        w[0, k] = w[k, 0] = e
    for k1, k2 in itertools.combinations(range(1, m), 2):
        e = travel_edge(costs, remaining[k1 - 1], remaining[k2 - 1], targets)
        w[k1, k2] = w[k2, k1] = e
    return prim_mst_weight(w)


def row_min_travel_bound(current: int, remaining: Sequence[int], costs: CostMatrices, targets: Sequence[int]) -> float:
    """Each remaining object is entered once, from the current location or a free target."""
    a = costs.travel
    rows = [current] + [l + 1 for l in targets]
    total = 0.0
    for j in remaining:
        total += min(a[r, j] for r in rows)
    return float(total)


def lower_bound(costs: CostMatrices, current: int, remaining: Sequence[int], targets: Sequence[int], mode: BoundMode) -> float:
    """Admissible bound on the cost still to pay from a partial plan."""
    if not remaining:
        return 0.0
    sub = costs.manipulate[np.ix_(list(remaining), list(targets))]
    bound = assignment_bound(sub)
    if mode is BoundMode.ROW_MIN:
        bound += row_min_travel_bound(current, remaining, costs, targets)
    elif mode is BoundMode.MST:
        bound += mst_travel_bound(current, remaining, costs, targets)
    return bound


def best_completion(costs: CostMatrices, current: int, remaining: Sequence[int], targets: Sequence[int]) -> float:
    """Exhaustive minimum cost of finishing from a partial plan (small N only)."""
    if not remaining:
        return 0.0
    best = math.inf
    for order in itertools.permutations(remaining):
        for tgt in itertools.permutations(targets):
            c = sequence_cost(costs, order, tgt, start=current)
            if c < best:
                best = c
    return best


# --- branch and bound ---------------------------------------------------------------


@dataclass
class SearchStats:
    expansions: int = 0
    generated: int = 0
    pruned: int = 0
    verified_nodes: int = 0
    incumbent_updates: int = 0
    pruned_nodes: list = field(default_factory=list, repr=False)


def branch_and_bound(
    scenario: Scenario | None,
    costs: CostMatrices,
    warm_start: TaskPlan | None = None,
    bound_mode: BoundMode | str = BoundMode.MST,
    verify: bool = False,
    stats: SearchStats | None = None,
) -> TaskPlan:
    """Best-first branch and bound over (object, target) choices.

    The warm start's cost is the initial incumbent; a node is pruned iff its bound
    reaches the incumbent. With ``verify`` every expanded and pruned node is checked
    against exhaustive enumeration and BoundViolation is raised on any inconsistency.
    """
    _check_sizes(scenario, costs)
    mode = BoundMode.parse(bound_mode)
    stats = stats if stats is not None else SearchStats()
    n = costs.n
    a, b = costs.travel, costs.manipulate

    incumbent = math.inf
    best_seq: tuple | None = None
    if warm_start is not None:
        incumbent = sequence_cost(costs, warm_start.order, warm_start.target_sequence)
        best_seq = (tuple(warm_start.order), tuple(warm_start.target_sequence))

    def check_admissible(lb, g, loc, rem, tg):
        stats.verified_nodes += 1
        exact = g + best_completion(costs, loc, rem, tg)
        if lb > exact + EPS * max(1.0, abs(exact)):
            raise BoundViolation(f"bound {lb} exceeds best completion {exact} at order prefix", mode=mode.value)

    all_idx = tuple(range(n))
    root_lb = lower_bound(costs, 0, all_idx, all_idx, mode)
    # heap entry: (lb, -depth, order, targets, g)
    heap = [(root_lb, 0, (), (), 0.0)]
    while heap:
        lb, negd, order, tgts, g = heapq.heappop(heap)
        if lb >= incumbent:
            stats.pruned += 1 + len(heap)
            if verify:
                stats.pruned_nodes.append((order, tgts, g))
                stats.pruned_nodes.extend((o, t, gg) for _, _, o, t, gg in heap)
            break
        stats.expansions += 1
        loc = 0 if not tgts else tgts[-1] + 1
        rem = tuple(j for j in all_idx if j not in order)
        free = tuple(l for l in all_idx if l not in tgts)
        if verify:
            check_admissible(lb, g, loc, rem, free)
        for j in rem:
            if not math.isfinite(a[loc, j]):
                continue
            for l in free:
                if not math.isfinite(b[j, l]):
                    continue
                stats.generated += 1
                cg = g + (a[loc, j] + b[j, l])
                corder, ctg = order + (j,), tgts + (l,)
                if len(corder) == n:
                    if cg < incumbent:
                        incumbent = float(cg)
                        best_seq = (corder, ctg)
                        stats.incumbent_updates += 1
                    continue
                crem = tuple(x for x in rem if x != j)
                cfree = tuple(x for x in free if x != l)
                clb = max(lb, cg + lower_bound(costs, l + 1, crem, cfree, mode))
                if clb >= incumbent:
                    stats.pruned += 1
                    if verify:
                        stats.pruned_nodes.append((corder, ctg, cg))
                    continue
                heapq.heappush(heap, (clb, negd - 1, corder, ctg, cg))

    if best_seq is None:
        raise PlanningInfeasible("no feasible visitation order and assignment exists")
    if verify:
        _verify_pruned(costs, stats, incumbent)
    plan = _assemble(costs, best_seq[0], best_seq[1], "bnb", stats.expansions)
    return plan


def _verify_pruned(costs: CostMatrices, stats: SearchStats, incumbent: float) -> None:
    n = costs.n
    all_idx = range(n)
    for order, tgts, g in stats.pruned_nodes:
        loc = 0 if not tgts else tgts[-1] + 1
        rem = [j for j in all_idx if j not in order]
        free = [l for l in all_idx if l not in tgts]
        best = g + best_completion(costs, loc, rem, free)
        stats.verified_nodes += 1
        if best < incumbent - EPS * max(1.0, abs(incumbent)):
            raise BoundViolation(f"pruned branch {order}/{tgts} holds cost {best} < returned {incumbent}")


def brute_force_plan(costs: CostMatrices) -> tuple[float, tuple[int, ...], tuple[int, ...]]:
    """Minimum over all N!·N! (order, target sequence) pairs."""
    n = costs.n
    best = (math.inf, (), ())
    for order in itertools.permutations(range(n)):
        for tgt in itertools.permutations(range(n)):
            c = sequence_cost(costs, order, tgt)
            if c < best[0]:
                best = (c, order, tgt)
    return best

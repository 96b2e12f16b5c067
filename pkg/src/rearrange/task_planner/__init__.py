from .assignment import hungarian_assign
from .costs import CostMatrices, build_cost_matrices
from .mst import prim_mst_weight
from .scenario import Category, ObjectSpec, RobotState, Scenario
from .search import (
    BoundMode,
    SearchStats,
    TaskPlan,
    branch_and_bound,
    brute_force_plan,
    greedy_plan,
    lower_bound,
    mst_travel_bound,
    plan_cost,
    sequence_cost,
)

__all__ = [
    "BoundMode",
    "Category",
    "CostMatrices",
    "ObjectSpec",
    "RobotState",
    "Scenario",
    "SearchStats",
    "TaskPlan",
    "branch_and_bound",
    "brute_force_plan",
    "build_cost_matrices",
    "greedy_plan",
    "hungarian_assign",
    "lower_bound",
    "mst_travel_bound",
    "plan_cost",
    "prim_mst_weight",
    "sequence_cost",
]

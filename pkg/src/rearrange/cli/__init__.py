"""Scenario files, plan dumps and the command-line interface."""
from .main import build_parser, main
from .plan_file import read_plan, write_plan
from .scenario_file import load_scenario, parse_scenario, scenario_from_dict, scenario_to_dict, serialize_scenario

__all__ = [
    "build_parser",
    "load_scenario",
    "main",
    "parse_scenario",
    "read_plan",
    "scenario_from_dict",
    "scenario_to_dict",
    "serialize_scenario",
    "write_plan",
]

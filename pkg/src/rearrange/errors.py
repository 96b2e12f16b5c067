"""Exception hierarchy. Every error carries a stable ``code`` string."""


class RearrangeError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.context = context


class PlanningInfeasible(RearrangeError):
    code = "PLANNING_INFEASIBLE"


class InfeasibleAssignment(RearrangeError):
    code = "INFEASIBLE_ASSIGNMENT"


class BoundViolation(RearrangeError):
    code = "BOUND_VIOLATION"


class GoalInCollision(RearrangeError):
    code = "GOAL_IN_COLLISION"


class StartInCollision(RearrangeError):
    code = "START_IN_COLLISION"


class NoPathFound(RearrangeError):
    code = "NO_PATH_FOUND"


class UnknownObject(RearrangeError):
    code = "UNKNOWN_OBJECT"


class Divergence(RearrangeError):
    code = "DIVERGENCE"


class CollisionAbort(RearrangeError):
    """Raised when an episode hits an obstacle; ``result`` holds the partial episode."""

    code = "COLLISION_ABORT"

    def __init__(self, message: str = "", result=None, **context):
        super().__init__(message, **context)
        self.result = result


class MalformedState(RearrangeError):
    code = "MALFORMED_STATE"


class DimensionMismatch(RearrangeError):
    code = "DIMENSION_MISMATCH"


class UnknownCategory(RearrangeError):
    code = "UNKNOWN_CATEGORY"


class InvalidScenario(RearrangeError):
    code = "INVALID_SCENARIO"


class ScenarioParseError(InvalidScenario):
    """Parse/validation failure addressed by JSON field path and, when known, line."""

    code = "SCENARIO_PARSE"

    def __init__(self, message: str, field: str = "", line: int | None = None):
        where = field or "<root>"
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}: {message}")
        self.field = field
        self.line = line

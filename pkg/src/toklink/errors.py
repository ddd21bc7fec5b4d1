"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A config document failed validation; message names the offending field."""


class InfeasibleProblemError(RuntimeError):
    """The problem instance admits no feasible allocation (e.g. zero rate
    with a positive token requirement)."""


class FeasibilityContractError(RuntimeError):
    """A caller passed an allocation that violates a precondition the solver
    relies on (e.g. an infeasible upper latency bound). Indicates a bug in
    the calling code, not a property of the instance."""


class OracleSizeError(ValueError):
    """The requested brute-force grid is too large to enumerate."""

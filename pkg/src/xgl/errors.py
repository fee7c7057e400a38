"""Exception types shared across the package."""


class CapacityError(ValueError):
    """Input exceeds a hard size cap (arity, depth, enumeration size)."""


class SolverError(RuntimeError):
    """The LP solver gave up (iteration cap, numerical breakdown)."""


class GuaranteeViolation(AssertionError):
    """A value that a theorem guarantees was not attained."""


class InconsistencyError(RuntimeError):
    """Two independent routes to the same answer disagree."""

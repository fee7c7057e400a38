"""XOR games, nonlocal boxes and communication-complexity lower bounds."""

from .boolfn import BoolFn, Density, RealFn, Spectrum, fwht, inverse_fwht, library
from .errors import CapacityError, GuaranteeViolation, InconsistencyError, SolverError

__all__ = [
    "BoolFn",
    "Density",
    "RealFn",
    "Spectrum",
    "fwht",
    "inverse_fwht",
    "library",
    "CapacityError",
    "GuaranteeViolation",
    "InconsistencyError",
    "SolverError",
]

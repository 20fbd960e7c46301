"""Exception types shared across the package."""


class HawkesError(Exception):
    """Base class for errors raised by this package."""


class DataValidationError(HawkesError, ValueError):
    """Input data violates a format or ordering contract."""


class SimulationError(HawkesError, RuntimeError):
    """A simulator could not complete (cap exceeded, degenerate setup)."""


class BoundViolationError(SimulationError):
    """The intensity exceeded the thinning bound at a candidate point."""


class FitError(HawkesError, RuntimeError):
    """An optimizer failed to produce a usable estimate."""

"""Exception types shared across the package."""


class SpecbandError(Exception):
    """Base class for all package errors."""


class RangeError(SpecbandError, ValueError):
    """Index outside the supported evaluation range."""


class ModeError(SpecbandError, ValueError):
    """Boundary mode incompatible with the given point (e.g. periodic on aperiodic)."""


class IncompatibleSystemsError(SpecbandError, TypeError):
    """Points or families living on different kinds of dynamical systems."""


class ConfigError(SpecbandError, ValueError):
    """Invalid configuration. ``violations`` lists every problem found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericalError(SpecbandError, RuntimeError):
    """A numerical routine failed to meet its contract."""


class PrecisionError(NumericalError):
    """Interval arithmetic could not decide a comparison at the precision cap."""


class ResourceError(SpecbandError, RuntimeError):
    """Requested computation exceeds the declared size limits."""

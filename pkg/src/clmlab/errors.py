"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all domain errors."""


class RangeError(LabError):
    """Bin index or price outside the configured window."""


class SideError(LabError):
    """A one-sided bin received an amount of the wrong token."""


class CouplingError(LabError):
    """Active-bin deposit amounts violate the required y/x ratio."""


class UnallocatableError(LabError):
    """A nonzero token budget has no supported bin to go to."""


class SizeError(LabError):
    """Instance too large for exhaustive enumeration."""


class MetricError(LabError):
    """A market metric is undefined for the given state (e.g. empty pool)."""


class DirectionError(LabError):
    """Breakout boundary lies on the wrong side of the current price."""


class ScenarioError(LabError):
    """Scenario validation failed; carries the list of violations."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)

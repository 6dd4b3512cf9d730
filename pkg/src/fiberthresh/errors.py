class FiberThreshError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FiberThreshError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDataError(FiberThreshError, ValueError):
    """The sample vector cannot support the requested fit."""


class ConvergenceError(FiberThreshError, RuntimeError):
    """An iterative estimator hit its iteration cap."""


class ConfigError(FiberThreshError, ValueError):
    """A configuration value violates an invariant.

    ``key`` names the offending field so callers can report it.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key

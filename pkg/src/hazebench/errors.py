"""Exception types shared across the toolkit.

Input problems subclass ValueError, training failures RuntimeError;
everything carries HazebenchError so callers can catch the family.
"""


class HazebenchError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(HazebenchError, ValueError):
    """Array dimensions do not match what the operation requires."""


class ParameterError(HazebenchError, ValueError):
    """A configuration value or argument is outside its legal range."""


class DomainError(HazebenchError, ValueError):
    """An input value is outside the mathematical domain of the operation."""


class TrainingError(HazebenchError, RuntimeError):
    """Optimization produced a non-finite loss."""


class ManifestError(HazebenchError, ValueError):
    """A manifest or run-config file failed to parse or validate."""

"""Exception hierarchy shared across the package."""


class SpreadNetError(Exception):
    """Base class for all package errors."""


class ParameterError(SpreadNetError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ShapeError(SpreadNetError, ValueError):
    """A graph does not have the structure an operation requires."""


class ParityError(ParameterError):
    """No d-regular graph exists because d*M is odd."""


class CapacityError(SpreadNetError):
    """The exact state space is too large to integrate."""


class NoCrossingError(SpreadNetError):
    """The adoption curve never reaches the requested level."""


class ConfigError(SpreadNetError):
    """Invalid experiment configuration."""

"""Exception hierarchy shared by all modules."""


class DDAttackError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DDAttackError, ValueError):
    """Malformed user input: dimensions, window sizes, file contents."""


class NumericalError(DDAttackError, ArithmeticError):
    """A computation could not be carried out on the given numbers."""


class NonFinite(NumericalError):
    pass


class ShapeMismatch(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class BadDimensions(ConfigError):
    pass


class WindowTooSmall(ConfigError):
    pass


class WindowTooLarge(ConfigError):
    pass


class EmptySeries(ConfigError):
    pass


class TooFewSamples(ConfigError):
    pass


class WindowBelowObservabilityIndex(ConfigError):
    """The feature recursion is only exact for windows at least the observability index."""


class RegimeViolation(ConfigError):
    """A detectability check was asked outside the time range where it is valid."""

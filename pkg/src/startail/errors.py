"""Exception hierarchy shared by all modules."""


class StartailError(Exception):
    """Base class for library errors."""


class NumericError(StartailError):
    """A numerical routine failed to deliver the requested accuracy."""


class ToleranceNotReached(NumericError):
    pass


class DirectionOutsideCone(StartailError, ValueError):
    pass


class DegenerateBox(StartailError, ValueError):
    pass


class DivergentIntegral(StartailError, ValueError):
    pass


class LevelOutOfRange(StartailError, ValueError):
    pass


class NoRoot(NumericError):
    pass


class HeavyTailUnsupported(StartailError, ValueError):
    pass


class HeavyTailOnly(StartailError, ValueError):
    pass


class RejectionStall(NumericError):
    pass


class InsufficientTail(StartailError, ValueError):
    pass


class InsufficientSample(StartailError, ValueError):
    pass


class ConfigError(StartailError, ValueError):
    """Invalid experiment configuration (unknown key, bad value)."""

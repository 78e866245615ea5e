"""Exception types shared across the package."""


class RelexError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RelexError):
    """A caller supplied a non-finite or otherwise invalid value."""


class ConfigError(RelexError):
    """A configuration file or parameter set is invalid."""


class DivergenceError(RelexError):
    """A simulated trajectory left the finite domain.

    ``iteration`` is the step index at which divergence was detected.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class TruncationError(RelexError):
    """A grid domain is too small: its boundary carries non-negligible mass."""


class GridMismatchError(RelexError):
    """Two grid measures do not share the same bounds and resolution."""


class EmptyInputError(RelexError):
    """An operation received an empty sequence where data is required."""


class FitError(RelexError):
    """Too few usable points to fit a decay rate."""

"""Exception types shared across the package."""


class MemesimError(Exception):
    """Base class for all package errors."""


class ConfigError(MemesimError):
    """Invalid configuration or incompatible inputs (exit code 1)."""


class InputError(MemesimError):
    """Unusable input data, e.g. an empty or malformed CSV (exit code 1)."""


class SteadyStateError(MemesimError):
    """A run exceeded its configured step cap, either while waiting for the
    steady state or during the measurement phase (exit code 2)."""


class UndefinedCorrelationError(MemesimError):
    """Rank correlation is undefined because one variable is entirely tied."""


class FitUnavailableError(MemesimError):
    """A distribution fit cannot be produced from the given samples (exit code 3)."""

"""Exception taxonomy shared by all modules.

The CLI maps these onto process exit codes:
0 success, 1 invalid input, 2 acceptance/scaling failure,
3 numerical breakdown, 4 invalid run.
"""


class SolitonLabError(Exception):
    """Base class for all package errors."""


class ConfigError(SolitonLabError):
    """Invalid user input: bad config values, violated preconditions."""


class NumericalBreakdownError(SolitonLabError):
    """Non-finite values appeared during a computation."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class AccuracyError(SolitonLabError):
    """A computed quantity failed its internal accuracy check."""


class InvalidRunError(SolitonLabError):
    """A simulation violated a validity gate (e.g. mass reached the domain edge)."""

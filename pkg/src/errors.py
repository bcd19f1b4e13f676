"""Exception hierarchy shared by the library and the CLI"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.tuning.tpe import ObservationSet


class PsnlError(Exception):
    """Base class for every error raised on purpose by this package."""


class UsageError(PsnlError):
    """Bad flags or an inconsistent run configuration."""


class DataError(PsnlError, ValueError):
    """Malformed or inconsistent input data."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DivergenceError(PsnlError, ArithmeticError):
    """A non-finite or otherwise impossible value showed up during training."""


class TuningError(PsnlError):
    """Every tuning trial diverged; the history is attached."""

    def __init__(self, message: str, observations: ObservationSet) -> None:
        super().__init__(message)
        self.observations = observations

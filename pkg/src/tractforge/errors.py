"""Exception types shared across the package."""

from __future__ import annotations

import warnings


class TractForgeError(Exception):
    """Base class for every error raised by tractforge."""


class InvalidScalar(TractForgeError, ValueError):
    pass


class DomainError(TractForgeError, ValueError):
    pass


class ConvergenceError(TractForgeError, RuntimeError):
    pass


class InvalidDatum(TractForgeError, ValueError):
    pass


class InvalidGeometry(TractForgeError, ValueError):
    pass


class NotInTract(TractForgeError, ValueError):
    pass


class BuildError(TractForgeError, RuntimeError):
    """The conformal map could not be built to the requested accuracy."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class TruncationError(TractForgeError, ValueError):
    pass


class DegenerateDistance(TractForgeError, ValueError):
    pass


class NoBracket(TractForgeError, RuntimeError):
    pass


class NonConvergence(TractForgeError, RuntimeError):
    """The gate solver stalled; carries the best vector and the residual history."""

    def __init__(self, message: str, best=None, history=None):
        super().__init__(message)
        self.best = best
        self.history = list(history or [])


class GeometryError(TractForgeError, ValueError):
    pass


class ConfigError(TractForgeError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str = ""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class IoError(TractForgeError, OSError):
    pass


class TruncationWarning(UserWarning):
    """A map value was requested outside the region where truncation effects are negligible."""


def warn_truncation(message: str) -> None:
    warnings.warn(message, TruncationWarning, stacklevel=3)

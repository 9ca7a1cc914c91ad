"""Exception hierarchy for the package."""
from __future__ import annotations


class FloqluxError(Exception):
    """Base class for all package-specific errors."""


class DiagnosticError(FloqluxError):
    """Numerical routine failed; message carries the offending parameters."""


class ConvergenceError(FloqluxError):
    """An iterative refinement did not reach its tolerance."""


class OutOfWindowError(FloqluxError, KeyError):
    """A Fourier block or harmonic index lies outside the truncation window."""


class InfraredDivergenceError(FloqluxError, ValueError):
    """A 1/f spectral density was sampled at exactly zero frequency."""


class TrackingBreakError(FloqluxError):
    """State tracking lost the branch (best overlap at or below 0.5)."""


class AliasingError(FloqluxError, ValueError):
    """Sampling step too coarse for the beat frequency being fit."""


class FitError(FloqluxError):
    """A nonlinear fit failed after the allowed restarts."""


class ConfigError(FloqluxError, ValueError):
    """Config file rejected; message carries line/column and a hint."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            where = f"line {line}" + (f", column {col}" if col is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class ExportError(FloqluxError, OSError):
    """Refusing to write sweep output (existing files, bad target, ...)."""

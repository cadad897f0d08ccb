"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CscpError(Exception):
    """Base class for all package errors."""


class ValidationError(CscpError, ValueError):
    """A value violates a domain invariant."""


class ConfigError(ValidationError):
    """A mining, generator or stratification setting is out of range."""


class FormatError(CscpError, ValueError):
    """An input file does not follow the expected layout (e.g. wrong header)."""


class IngestIOError(CscpError, OSError):
    """An input stream could not be read or decoded."""


class UndefinedConfidenceError(CscpError, ArithmeticError):
    """Confidence requested for an antecedent with zero support."""


class GenerationError(CscpError, RuntimeError):
    """The synthetic generator could not produce a valid patient."""


class OracleGuardError(CscpError, ValueError):
    """The brute-force oracle was asked to enumerate too large a universe."""

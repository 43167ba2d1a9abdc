"""Error types shared by the library and the command line front end."""

from __future__ import annotations


class PolyhomError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(PolyhomError):
    """Malformed or inconsistent run configuration."""

    exit_code = 2


class MathDomainError(PolyhomError, ValueError):
    """Input outside the mathematical framework (bad roots, non-integrable terms, ...)."""

    exit_code = 3


class ValidationFailure(PolyhomError):
    """A numerical or structural check landed outside its tolerance."""

    exit_code = 4


class ModeMismatch(PolyhomError, TypeError):
    """Exact and floating coefficients were combined."""


class DimensionMismatch(PolyhomError, ValueError):
    """Tangential dimensions of two operands differ."""

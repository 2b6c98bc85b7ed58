"""Exception types raised across the package."""

from __future__ import annotations


class SpikedCovError(Exception):
    """Base class for all package errors."""


class InputError(SpikedCovError, ValueError):
    """Malformed or non-finite numerical input."""


class ParseError(InputError):
    """A CSV file could not be read as a numeric matrix."""


class ConfigError(SpikedCovError, ValueError):
    """Invalid prior, sampler or study configuration."""


class DomainError(SpikedCovError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class InvariantError(SpikedCovError, RuntimeError):
    """An internal numerical invariant no longer holds."""


class DegeneratePosteriorError(SpikedCovError, RuntimeError):
    """Posterior draws carry no usable information for the requested summary."""


class UnreliableOracleError(SpikedCovError, RuntimeError):
    """An importance-sampling oracle has too small an effective sample size."""

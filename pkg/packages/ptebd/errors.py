# packages/ptebd/errors.py
"""Exception hierarchy shared by the library, the CLI and the HTTP service."""
from __future__ import annotations


class PtebdError(Exception):
    """Base class; `exit_code` is what the CLI returns when this escapes a run."""

    exit_code = 1


class ShapeError(PtebdError, ValueError):
    exit_code = 2


class ArgumentError(PtebdError, ValueError):
    exit_code = 2


class ConfigurationError(PtebdError):
    exit_code = 2


class CapacityError(PtebdError):
    exit_code = 3


class NumericError(PtebdError):
    exit_code = 4


class UndefinedValueError(NumericError):
    """A quantity has no value for the given state (e.g. imbalance at zero filling)."""

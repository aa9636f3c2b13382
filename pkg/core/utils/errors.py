#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
messkit
Exception hierarchy
Author: messkit developers
"""

from typing import Any, Dict, Optional


class MesskitError(Exception):
    """Base class for all messkit errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize the error.

        Args:
            message: Human readable description
            details: Structured context (estimates, offending values, hints)
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if not self.details:
            return self.message
        extra = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.message} ({extra})"


class SchemaError(MesskitError):
    """Malformed input: shapes, types, configuration fields."""


class DomainError(MesskitError):
    """Argument outside the domain of a function (e.g. tabulated range)."""


class AccuracyError(MesskitError):
    """A numerical estimate exceeded its advertised tolerance."""


class ConditioningError(MesskitError):
    """Near-singular matrices, near-real poles, ill-conditioned transforms."""


class DecompositionError(MesskitError):
    """A bath decomposition could not produce any usable modes."""


class StructuralError(MesskitError):
    """Generator preconditions violated or structural checks failed."""


class ConvergenceError(MesskitError):
    """Truncation did not converge."""


class InstabilityError(MesskitError):
    """Propagated state norm diverged."""


class DimensionError(MesskitError):
    """Requested space exceeds the configured dimension guard."""


class ConstructionError(MesskitError):
    """Noise construction failed."""


class PreconditionError(MesskitError):
    """Operation called on an input that violates its precondition."""

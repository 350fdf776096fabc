"""Shared exception types and the global size budget."""

from __future__ import annotations

# Constructions abort rather than thrash once an intermediate universe (or
# table) would exceed this many entries.
DEFAULT_BUDGET = 200_000


class BudgetError(RuntimeError):
    """A construction would exceed its configured size budget."""


class AlgebraFormatError(ValueError):
    """An algebra file or document is malformed; message carries field context."""


class VerificationError(RuntimeError):
    """A semantic verification that must hold failed (reported, never ignored)."""

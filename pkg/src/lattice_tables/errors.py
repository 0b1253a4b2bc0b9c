"""Exception hierarchy shared by every module."""

from typing import Any, Optional


class LatticeTablesError(Exception):
    """Base class for all library errors."""


class ValidationError(LatticeTablesError):
    """Malformed input: unknown ids, carrier mismatch, invalid maps."""


class LatticeValidationError(ValidationError):
    """A candidate order is not a bounded lattice."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class BudgetExceededError(LatticeTablesError):
    """A node, stage, closure or search budget ran out."""

    def __init__(self, budget: str, limit: int, reached: Optional[int] = None):
        self.budget = budget
        self.limit = limit
        self.reached = reached
        detail = f" (reached {reached})" if reached is not None else ""
        super().__init__(f"{budget} budget {limit} exceeded{detail}")


class NotFoundError(LatticeTablesError):
    """Nothing found within budget; not a claim of nonexistence."""


class InternalConsistencyError(LatticeTablesError):
    """A property that holds by proof failed on concrete data."""


class DecodeError(LatticeTablesError):
    """A presentation yields no candidate for a decode step."""

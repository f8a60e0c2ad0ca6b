"""Exception types shared across the package.

The names mirror the error classes used throughout the public contracts:
invalid-parameter, invalid-input, invalid-labeling, invalid-instance,
budget-exceeded, domain-error and total-rule violations.
"""


class InvalidParameterError(ValueError):
    """A generator or operation was called with unusable parameters."""


class InvalidInputError(ValueError):
    """A precondition on the input object (labeling, assignment, ...) failed."""


class InvalidLabelingError(ValueError):
    """A labeling uses labels outside the declared palette."""


class InvalidInstanceError(ValueError):
    """The graph instance violates a structural requirement of the operation."""


class BudgetExceededError(RuntimeError):
    """Exact enumeration was requested past the configured bit budget."""


class DomainError(ValueError):
    """A bound calculator was evaluated outside its numeric domain."""


class TotalRuleViolation(RuntimeError):
    """A table-backed rule met a view it has no entry for."""

    def __init__(self, message, view=None):
        super().__init__(message)
        self.view = view


class PSolverViolation(RuntimeError):
    """A black-box inner solver produced an invalid output inside a
    regular-tree ball where it promised correctness."""

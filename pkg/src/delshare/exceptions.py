"""Exception types shared across the library."""


class ValidationError(ValueError):
    """A problem instance violates one of its structural invariants."""


class InconsistentHistory(ValueError):
    """Successor arguments disagree with components already recorded in an info set."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured strategy budget."""

    def __init__(self, count: int, budget: int):
        super().__init__(f"enumeration needs {count} strategies, budget is {budget}")
        self.count = count
        self.budget = budget


class SeparationViolation(AssertionError):
    """Two info sets with identical grouping key received different values or actions.

    The grouping identities are guaranteed by the theory, so raising this
    signals an implementation bug rather than a property of the instance.
    """


class NotSeparated(ValueError):
    """Supplied strategies do not factor through the required information states."""

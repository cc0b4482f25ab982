"""Exception hierarchy shared by the core modules and the CLI."""

from __future__ import annotations


class PrecisionError(ArithmeticError):
    """A p-adic or t-adic precision budget was exhausted."""


class InfeasiblePresentationError(ValueError):
    """A presentation or family violates its defining inequalities."""


class OracleError(RuntimeError):
    """The truncated-quotient oracle could not resolve the requested data."""


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed the configured budget.

    Attributes:
        needed: The number of work items the enumeration would visit.
        budget: The configured cap.
    """

    def __init__(self, needed: int, budget: int) -> None:
        super().__init__(f"enumeration needs {needed} items, budget is {budget}")
        self.needed = needed
        self.budget = budget

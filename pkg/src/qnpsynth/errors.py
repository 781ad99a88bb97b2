"""Exception types shared across the package."""

from .fol.syntax import FormulaError
from .sexpr import ParseError


class InputError(ValueError):
    """Input is malformed or inconsistent (bad file, unknown symbol, ...)."""


class BudgetExceeded(RuntimeError):
    """A state or check budget was exhausted before the analysis finished."""

    def __init__(self, budget_name, limit):
        self.budget_name = budget_name
        self.limit = limit
        super().__init__(f"budget exceeded: {budget_name} > {limit}")


class PreconditionViolation(ValueError):
    """An inapplicable ground action was applied."""


__all__ = ["BudgetExceeded", "FormulaError", "InputError", "ParseError", "PreconditionViolation"]

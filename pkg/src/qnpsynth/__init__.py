"""Synthesis and verification of first-order soundness guarantees for
qualitative-numerical abstractions of STRIPS domains."""

from .errors import BudgetExceeded, InputError, ParseError, PreconditionViolation

__version__ = "0.1.0"

__all__ = ["BudgetExceeded", "InputError", "ParseError", "PreconditionViolation", "__version__"]

"""First-order formulas over planning signatures."""

from .batch import Batch, enumerate_batches, evaluate_batch, structure_count
from .equivalence import DEFAULT_MAX_UNIVERSE, EquivalenceVerdict, semantically_equivalent
from .parser import parse_formula, parse_formulas
from .printer import to_infix, to_sexpr
from .simplify import simplify
from .structure import EvaluationError, Structure, closure, evaluate, extension
from .syntax import *  # noqa: F401,F403
from .syntax import FormulaError, Signature

__all__ = [
    "Batch", "enumerate_batches", "evaluate_batch", "structure_count",
    "DEFAULT_MAX_UNIVERSE", "EquivalenceVerdict", "semantically_equivalent",
    "parse_formula", "parse_formulas", "to_infix", "to_sexpr", "simplify",
    "EvaluationError", "Structure", "closure", "evaluate", "extension",
    "FormulaError", "Signature",
]

"""Finite combinatorics of constant prediction: predictors, encodings, trees and conditions."""
from .budget import EnumBudget
from .errors import PredcombError
from .seqcore import (FiniteMemoryPredictor, HitReport, Predictor, RulePredictor, TablePredictor,
                      UltWord, Word, check_constant, check_constant_exact, check_weak)

__all__ = [
    "EnumBudget", "PredcombError", "FiniteMemoryPredictor", "HitReport", "Predictor",
    "RulePredictor", "TablePredictor", "UltWord", "Word", "check_constant",
    "check_constant_exact", "check_weak",
]
__version__ = "0.1.0"

"""Sequences whose relative frequencies need not converge, and the imprecise
probabilities they induce."""

from .builder import (
    Construction,
    Schedules,
    construct_extreme,
    construct_for_curve,
    construct_polytope_boundary,
    pre_dynkin_counterexample,
    von_mises_doubling,
)
from .credal import CredalSet, gbr_credal, gbr_root, lower_prevision, upper_prevision
from .frequency import TailPolicy
from .sequence import SymbolSequence, read_sequence, write_sequence

__version__ = "0.1.0"

__all__ = [
    "Construction",
    "CredalSet",
    "Schedules",
    "SymbolSequence",
    "TailPolicy",
    "construct_extreme",
    "construct_for_curve",
    "construct_polytope_boundary",
    "gbr_credal",
    "gbr_root",
    "lower_prevision",
    "pre_dynkin_counterexample",
    "read_sequence",
    "upper_prevision",
    "von_mises_doubling",
    "write_sequence",
]

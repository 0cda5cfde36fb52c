"""Exceptional sets: interval unions, densities and growth-lemma checkers."""
from .intervals import DensityReport, IntervalUnion, comb, decay, measures, parse_generator
from .lemmas import (
    LogPowerXi,
    area_set,
    borel_exceptional,
    derivative_quotient,
    log_deriv_check,
    log_power,
    min_modulus_check,
    set_from_predicate,
    stable_set,
    value_at_origin,
    zero_count,
    zero_count_lemma_check,
)

__all__ = [
    "DensityReport", "IntervalUnion", "comb", "decay", "measures", "parse_generator",
    "LogPowerXi", "area_set", "borel_exceptional", "derivative_quotient", "log_deriv_check",
    "log_power", "min_modulus_check", "set_from_predicate", "stable_set", "value_at_origin",
    "zero_count", "zero_count_lemma_check",
]

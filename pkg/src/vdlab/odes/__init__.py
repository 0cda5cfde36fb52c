"""Linear ODEs: residual checks, ray integration and hypothesis verdicts."""
from .equation import Jet, LinearODE, disc_samples, residual
from .integrate import NumericSolution, integrate_base, integrate_fan, integrate_ray

__all__ = ["Jet", "LinearODE", "disc_samples", "residual", "NumericSolution",
           "integrate_base", "integrate_fan", "integrate_ray"]
from .verdicts import (
    THEOREMS,
    TheoremVerdict,
    check_2LM2,
    check_coefficient_bound,
    comparable,
    little_o,
    solution_count_check,
    standardness_verdicts,
    wittich_admissible,
)

__all__ += ["THEOREMS", "TheoremVerdict", "check_2LM2", "check_coefficient_bound",
            "comparable", "little_o", "solution_count_check", "standardness_verdicts",
            "wittich_admissible"]

"""Exception hierarchy shared by every vdlab module."""


class VDLabError(Exception):
    """Base class for all library errors."""


class InputError(VDLabError):
    """Bad user input (unparsable text, violated precondition)."""


class ParseError(InputError):
    def __init__(self, message, position=None, text=None):
        self.message = message
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class PreconditionError(InputError):
    pass


class NotMeromorphic(InputError):
    """Expression would have an essential singularity in the finite plane."""


class MixedKinds(InputError):
    pass


class NumericError(VDLabError):
    """A numeric procedure could not deliver the requested accuracy."""


class PoleHit(NumericError):
    pass


class Undefined(NumericError):
    pass


class QuadratureNoConverge(NumericError):
    pass


class WindingUnstable(NumericError):
    pass


class TailTooShort(NumericError):
    pass


class DegenerateDenominator(NumericError):
    pass


class StepUnderflow(NumericError):
    pass


class PredicateOscillation(NumericError):
    pass


class NoneSatisfied(VDLabError):
    pass


class MissingSolutionBase(InputError):
    pass

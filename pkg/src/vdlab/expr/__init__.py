"""Expression algebra with log-domain evaluation and exact derivatives."""
from .logcomplex import LogComplex, logsum, wrap_angle
from .nodes import (
    ONE,
    ZERO,
    Z,
    Add,
    ComplexFunc,
    Const,
    Div,
    Exp,
    Mul,
    Poly,
    Pow,
    Var,
    add,
    as_func,
    const,
    diff,
    div,
    eval_log,
    exp,
    log_derivative,
    mul,
    neg,
    poly,
    poly_from_roots,
    power,
    spherical_deriv_log,
)
from .parser import parse

__all__ = [
    "LogComplex", "logsum", "wrap_angle", "ONE", "ZERO", "Z", "Add", "ComplexFunc",
    "Const", "Div", "Exp", "Mul", "Poly", "Pow", "Var", "add", "as_func", "const",
    "diff", "div", "eval_log", "exp", "log_derivative", "mul", "neg", "poly", "poly_from_roots",
    "power", "spherical_deriv_log", "parse",
]

"""Complex numbers stored as (log modulus, argument) pairs.

Values such as exp(exp(50)) are far outside double range, but their
logarithms are not.  Every field may be a scalar or a numpy array; all
operations broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(a):
    """Reduce angles to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.remainder(a + np.pi, TWO_PI) - np.pi
    # remainder maps +pi to -pi; keep the half-open convention (-pi, pi]
    w = np.where(w == -np.pi, np.pi, w)
    return w if w.ndim else float(w)


@dataclass(frozen=True)
class LogComplex:
    logmod: np.ndarray | float
    arg: np.ndarray | float

    @classmethod
    def from_complex(cls, w) -> "LogComplex":
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore"):
            logmod = np.log(np.abs(w))
        arg = np.where(w == 0, 0.0, np.angle(w))
        if w.ndim == 0:
            return cls(float(logmod), float(arg))
        return cls(logmod, arg)

    @classmethod
    def zero(cls, shape=()) -> "LogComplex":
        if shape == ():
            return cls(-np.inf, 0.0)
        return cls(np.full(shape, -np.inf), np.zeros(shape))

    def to_complex(self):
        """Decode; overflows to inf exactly where the value is not representable."""
        with np.errstate(over="ignore", invalid="ignore"):
            mod = np.exp(self.logmod)
            w = mod * unit_phase(self.arg)
        w = np.where(np.asarray(self.logmod) == -np.inf, 0.0, w)
        return w if np.ndim(w) else complex(w)

    @property
    def is_zero(self):
        return np.asarray(self.logmod) == -np.inf

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        lm = np.add(self.logmod, other.logmod)
        return _normalized(lm, np.add(self.arg, other.arg))

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        with np.errstate(invalid="ignore"):
            lm = np.subtract(self.logmod, other.logmod)
        return _normalized(lm, np.subtract(self.arg, other.arg))

    def __neg__(self) -> "LogComplex":
        return _normalized(self.logmod, np.add(self.arg, np.pi))

    def __pow__(self, n: int) -> "LogComplex":
        with np.errstate(invalid="ignore"):
            lm = np.multiply(self.logmod, n)
        if n == 0:
            lm = np.zeros_like(np.asarray(self.logmod, dtype=float))
            if lm.ndim == 0:
                lm = 0.0
        return _normalized(lm, np.multiply(self.arg, n))

    def __add__(self, other: "LogComplex") -> "LogComplex":
        return logsum([self, other])

    def __sub__(self, other: "LogComplex") -> "LogComplex":
        return logsum([self, -other])

    def conj(self) -> "LogComplex":
        return _normalized(self.logmod, np.negative(self.arg))


def _normalized(logmod, arg) -> LogComplex:
    logmod = np.asarray(logmod, dtype=float)
    arg = np.where(logmod == -np.inf, 0.0, wrap_angle(arg))
    if logmod.ndim == 0:
        return LogComplex(float(logmod), float(arg))
    return LogComplex(logmod, np.asarray(arg, dtype=float))


def logsum(values) -> LogComplex:
    """Stable sum: factor out the largest modulus before adding."""
    values = list(values)
    if not values:
        return LogComplex.zero()
    lms = np.broadcast_arrays(*[np.asarray(v.logmod, dtype=float) for v in values])
    args = np.broadcast_arrays(*[np.asarray(v.arg, dtype=float) for v in values])
    lm = np.stack(lms)
    ar = np.stack(args)
    top = np.max(lm, axis=0)
    safe_top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        scaled = np.exp(lm - safe_top) * unit_phase(ar)
    scaled = np.where(lm == -np.inf, 0.0, scaled)
    s = scaled.sum(axis=0)
    with np.errstate(divide="ignore"):
        out_lm = safe_top + np.log(np.abs(s))
    out_lm = np.where(top == -np.inf, -np.inf, out_lm)
    if np.any(top == np.inf):
        # an infinite term swamps the rest
        inf_arg = np.take_along_axis(ar, np.argmax(lm, axis=0)[None], axis=0)[0]
        out_lm = np.where(top == np.inf, np.inf, out_lm)
        s = np.where(top == np.inf, np.exp(1j * inf_arg), s)
    return _normalized(out_lm, np.angle(s))


def unit_phase(arg):
    """exp(i*arg), exact at multiples of pi/2 so that 1 + (-1) cancels to 0."""
    arg = np.asarray(arg, dtype=float)
    c = np.cos(arg)
    s = np.sin(arg)
    quarter = arg / (np.pi / 2)
    exact = quarter == np.round(quarter)
    if np.any(exact):
        q = np.where(exact, np.mod(np.round(quarter), 4), 0).astype(int)
        c = np.where(exact, np.choose(q, [1.0, 0.0, -1.0, 0.0]), c)
        s = np.where(exact, np.choose(q, [0.0, 1.0, 0.0, -1.0]), s)
    return c + 1j * s


def logaddexp_real(*logs):
    """log(sum(exp(l))) for real log-values, broadcasting."""
    out = logs[0]
    for lg in logs[1:]:
        out = np.logaddexp(out, lg)
    return out

"""Zero counting by the argument principle on circles."""
from __future__ import annotations

import numpy as np

from ..errors import WindingUnstable
from ..expr import ComplexFunc, Const, log_derivative
from ..expr.logcomplex import wrap_angle

TWO_PI = 2.0 * np.pi
_MAX_STEP = np.pi / 3          # largest argument increment trusted between samples
_LOG_MAX_STEP = np.log(_MAX_STEP)
_MAX_POINTS = 1 << 20


def winding_number(p: ComplexFunc, r: float, base_points: int = 256) -> int:
    """Winding number of p(r e^{i theta}) about 0, i.e. zeros of entire p in |z| < r.

    Argument increments are summed over samples that are refined locally
    (bisection of the offending segment) until no segment can turn the
    argument by more than pi/3.  A segment is trusted only if both its
    wrapped increment and the local rate |z p'/p| times its length stay
    below that bound; the rate test catches near-zeros whose increment
    aliases onto a small multiple of 2 pi.  The result is accepted once
    two runs, the second with doubled base sampling, agree.
    """
    if isinstance(p, Const):
        if p.value == 0:
            raise WindingUnstable("identically zero function has no winding number")
        return 0
    first = _adaptive_winding(p, r, base_points)
    second = _adaptive_winding(p, r, 2 * base_points)
    if first != second:
        raise WindingUnstable(f"winding not stable at r={r}: {first} vs {second}")
    return first


def _adaptive_winding(p, r, n):
    dlog = log_derivative(p)
    theta = np.linspace(0.0, TWO_PI, n + 1)
    args, rates = _args(p, dlog, r, theta)
    args[-1] = args[0]          # same point; rounding must not open the contour
    while True:
        d = wrap_angle(np.diff(args))
        turn = np.maximum(rates[:-1], rates[1:]) + np.log(np.diff(theta))
        bad = (np.abs(d) > _MAX_STEP) | (turn > _LOG_MAX_STEP)
        if not np.any(bad):
            total = np.sum(d) / TWO_PI
            k = int(np.round(total))
            if abs(total - k) > 1e-6:
                raise WindingUnstable(f"non-integer winding {total} at r={r}")
            return k
        if len(theta) > _MAX_POINTS:
            raise WindingUnstable(f"refinement cap reached at r={r}")
        idx = np.nonzero(bad)[0]
        if np.min(theta[idx + 1] - theta[idx]) < 1e-14:
            raise WindingUnstable(f"zero on or extremely near |z|={r}")
        mids = 0.5 * (theta[idx] + theta[idx + 1])
        new_args, new_rates = _args(p, dlog, r, mids)
        theta = np.insert(theta, idx + 1, mids)
        args = np.insert(args, idx + 1, new_args)
        rates = np.insert(rates, idx + 1, new_rates)


def _args(p, dlog, r, theta):
    """arg p and log|z p'/p| at r e^{i theta}."""
    z = r * np.exp(1j * theta)
    v = p.eval_log(z)
    if np.any(np.asarray(v.logmod) == -np.inf):
        raise WindingUnstable(f"zero exactly on |z|={r}")
    w = dlog.eval_log(z)
    rate = np.nan_to_num(np.asarray(w.logmod, dtype=float) + np.log(r), nan=np.inf)
    return np.asarray(v.arg, dtype=float), rate

"""Tail estimators for deviation quantities and the inequalities relating them.

Every estimate is a ratio curve over a radius grid plus its minimum and
maximum over a tail window (the last ``tail_fraction`` of grid points).
Kinds N, P and E are liminf quantities and report the tail minimum; kind
V is a limsup quantity and reports the tail maximum.
"""
from __future__ import annotations

import functools
import math
from dataclasses import astuple, dataclass, field

import numpy as np

from .errors import DegenerateDenominator, MixedKinds, PreconditionError, TailTooShort
from .nevanlinna import (
    DEFAULT_QUAD,
    INF,
    CircleQuadrature,
    GrowthCurve,
    RadiusGrid,
    area_characteristic,
    characteristic,
    log_max_modulus_curve,
    normalize_target,
    proximity_curve,
    target_label,
)

KINDS = ("N", "P", "E", "V")
ESTIMATE_CAP = 1e6
MIN_TAIL_POINTS = 20

_NUMERATOR = {"N": "m", "P": "L", "E": "L", "V": "m"}
_DENOMINATOR = {"N": "T", "P": "T", "E": "A", "V": "T"}


@dataclass
class DeficiencyEstimate:
    kind: str
    target: object
    ratio_curve: GrowthCurve
    tail_liminf: float
    tail_limsup: float
    tail_fraction: float
    flags: list = field(default_factory=list)

    @property
    def estimate(self) -> float:
        value = self.tail_limsup if self.kind == "V" else self.tail_liminf
        return min(value, ESTIMATE_CAP)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a": target_label(self.target),
            "estimate": self.estimate,
            "tail_liminf": self.tail_liminf,
            "tail_limsup": self.tail_limsup,
            "tail_fraction": self.tail_fraction,
            "flags": list(self.flags),
        }


@functools.lru_cache(maxsize=128)
def _cached_curve(name, f, a, grid, quad_key):
    quad = CircleQuadrature(*quad_key)
    if name == "T":
        return characteristic(f, grid, quad)
    if name == "A":
        return area_characteristic(f, grid, quad)
    if name == "m":
        return proximity_curve(f, a, grid, quad)
    if name == "L":
        return log_max_modulus_curve(f, a, grid, quad)
    raise ValueError(name)


def curve(name: str, f, a, grid: RadiusGrid, quad: CircleQuadrature = DEFAULT_QUAD):
    """Memoised functional curve; the expression tree and grid are the key."""
    try:
        return _cached_curve(name, f, normalize_target(a), grid, astuple(quad))
    except TypeError:          # unhashable inputs (e.g. numeric solutions)
        return _cached_curve.__wrapped__(name, f, normalize_target(a), grid, astuple(quad))


def _require_transcendental(f):
    if getattr(f, "is_numeric", False):
        return
    if not f.is_transcendental:
        raise PreconditionError(
            f"{f} is not transcendental; deviation ratios have no limit to estimate")


def _tail_window(grid: RadiusGrid, tail_fraction: float):
    idx = grid.tail_indices(tail_fraction)
    if len(idx) < MIN_TAIL_POINTS:
        raise TailTooShort(
            f"tail window has {len(idx)} points, need at least {MIN_TAIL_POINTS}")
    return idx


def ratio_estimate(kind: str, num: GrowthCurve, den: GrowthCurve, target,
                   tail_fraction: float = 0.25) -> DeficiencyEstimate:
    """Build an estimate from precomputed numerator/denominator curves."""
    idx = _tail_window(num.grid, tail_fraction)
    if np.any(den.values[idx] <= 0):
        raise DegenerateDenominator(f"{den.label} is not positive on the tail window")
    ratio = num.ratio(den, f"{_NUMERATOR[kind]}/{_DENOMINATOR[kind]}")
    tail = ratio.values[idx]
    flags = []
    if not ratio.accurate:
        flags.append("quadrature-unconverged")
    lo, hi = float(np.min(tail)), float(np.max(tail))
    if hi > ESTIMATE_CAP or not np.isfinite(hi):
        flags.append("capped")
    if len(tail) >= 3 and tail[-1] >= hi and np.polyfit(np.arange(len(tail)), tail, 1)[0] > 0:
        flags.append("unbounded?")
    return DeficiencyEstimate(kind, target, ratio, min(lo, ESTIMATE_CAP),
                              min(hi, ESTIMATE_CAP), tail_fraction, flags)


def estimate(kind: str, f, a, grid: RadiusGrid, tail_fraction: float = 0.25,
             quad: CircleQuadrature = DEFAULT_QUAD) -> DeficiencyEstimate:
    """Estimate delta_kind(a, f) from the tail of the defining ratio curve."""
    kind = kind.upper()
    if kind not in KINDS:
        raise PreconditionError(f"unknown deviation kind {kind!r}")
    a = normalize_target(a)
    _require_transcendental(f)
    _tail_window(grid, tail_fraction)
    num = curve(_NUMERATOR[kind], f, a, grid, quad)
    den = curve(_DENOMINATOR[kind], f, INF, grid, quad)
    return ratio_estimate(kind, num, den, a, tail_fraction)


# ---------------------------------------------------------------------------
# growth indicators


def _tail_slope(x, y):
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def order_estimate(T: GrowthCurve, tail_fraction: float = 0.25) -> float:
    """Least-squares slope of log T against log r on the tail."""
    idx = T.grid.tail_indices(tail_fraction)
    if np.any(T.values[idx] <= 0):
        return 0.0
    return _tail_slope(np.log(T.r[idx]), np.log(T.values[idx]))


def log_order_estimate(T: GrowthCurve, tail_fraction: float = 0.25) -> float:
    """Least-squares slope of log T against log log r on the tail."""
    idx = T.grid.tail_indices(tail_fraction)
    r = T.r[idx]
    if np.any(r <= 1) or np.any(T.values[idx] <= 0):
        raise PreconditionError("logarithmic order needs r > 1 and T > 0 on the tail")
    return _tail_slope(np.log(np.log(r)), np.log(T.values[idx]))


# ---------------------------------------------------------------------------
# inequality checks


def sum_check(estimates, tolerance: float | None = None) -> dict:
    """Sum laws: total N-deficiency at most 2; E-deviations at most 2 pi."""
    estimates = list(estimates)
    if not estimates:
        return {"kind": None, "targets": [], "sum": 0.0, "bound": None,
                "margin": None, "pass": True, "note": "vacuous"}
    kinds = {e.kind for e in estimates}
    if len(kinds) > 1:
        raise MixedKinds(f"cannot sum estimates of kinds {sorted(kinds)}")
    kind = kinds.pop()
    if kind not in ("N", "E"):
        raise PreconditionError(f"no sum law is checked for kind {kind}")
    values = [e.estimate for e in estimates]
    total = float(sum(values))
    if kind == "N":
        bound, tol = 2.0, 0.05 if tolerance is None else tolerance
        ok, note = total <= bound + tol, ""
    else:
        bound, tol = 2 * math.pi, 0.1 if tolerance is None else tolerance
        positive = [v for v in values if v > tol]
        single = len(positive) == 1 and positive[0] > bound
        ok = single or total <= bound + tol
        note = "single deviated value above 2pi" if single else ""
    return {
        "kind": kind,
        "targets": [target_label(e.target) for e in estimates],
        "values": values,
        "sum": total,
        "bound": bound,
        "tolerance": tol,
        "margin": bound + tol - total,
        "pass": bool(ok),
        "note": note,
    }


def bergweiler_bock_check(f, a, grid: RadiusGrid, tail_fraction: float = 0.25,
                          tolerance: float = 0.05,
                          quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """delta_E(a, f) <= pi for functions of order at least 1/2."""
    T = curve("T", f, INF, grid, quad)
    rho = order_estimate(T, tail_fraction)
    report = {"check": "bergweiler-bock", "a": target_label(a), "order_estimate": rho,
              "bound": math.pi, "tolerance": tolerance}
    if rho < 0.5:
        report.update(applicable=False, **{"pass": True},
                      note="measured order below 1/2; bound not applicable")
        return report
    est = estimate("E", f, a, grid, tail_fraction, quad)
    report.update(applicable=True, estimate=est.to_dict(),
                  margin=math.pi + tolerance - est.estimate,
                  **{"pass": bool(est.estimate <= math.pi + tolerance)})
    return report


def marchenko_bound_check(f, a, grid: RadiusGrid, tail_fraction: float = 0.25,
                          tolerance: float = 0.05,
                          quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """delta_E(a, f) <= pi * sqrt(delta_V (2 - delta_V)) for T(r, f) ~ C r."""
    _require_transcendental(f)
    T = curve("T", f, INF, grid, quad)
    rho = order_estimate(T, tail_fraction)
    if abs(rho - 1.0) > 0.1:
        raise PreconditionError(
            f"measured order {rho:.3f} is not 1; the bound is checked only when T(r) ~ C r")
    e_est = estimate("E", f, a, grid, tail_fraction, quad)
    v_est = estimate("V", f, a, grid, tail_fraction, quad)
    dv = min(max(v_est.estimate, 0.0), 1.0)
    bound = math.pi * math.sqrt(dv * (2.0 - dv))
    return {
        "check": "marchenko",
        "a": target_label(a),
        "order_estimate": rho,
        "delta_E": e_est.to_dict(),
        "delta_V": v_est.to_dict(),
        "bound": bound,
        "tolerance": tolerance,
        "margin": bound + tolerance - e_est.estimate,
        "pass": bool(e_est.estimate <= bound + tolerance),
    }

"""Hypotheses of the standard-solution theorems as finite-data predicates.

Little-o conditions ``X = o(Y)`` are judged on the ratio curve X/Y:

* supported    tail maximum <= ``SMALL`` and the tail maximum did not grow
               when the grid was extended from its first 75% to all of it;
* violated     tail minimum > ``LARGE`` and the tail minimum kept at least
               ``KEEP`` of its value under the same extension;
* inconclusive otherwise.

Two-sided comparisons ``X ≍ Y`` require the tail ratio to stay in
[1/C, C].  Log-power conditions use the exponent ``m`` (1.5 by default)
and the regularised power ``x * max(1, log x)^m`` so that they stay
defined when x < e.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..deficiency import curve, estimate, log_order_estimate
from ..errors import MissingSolutionBase, NoneSatisfied, VDLabError
from ..nevanlinna import (
    DEFAULT_QUAD,
    INF,
    CircleQuadrature,
    GrowthCurve,
    RadiusGrid,
    base_characteristic,
    max_modulus_curve,
    target_label,
)
from .equation import LinearODE

SMALL = 0.05
LARGE = 0.25
PREFIX = 0.75
KEEP = 0.75                    # a ratio still falling faster than this is undecided
ASYMP_C = 10.0
DEFAULT_M = 1.5
DEFAULT_TARGETS = (1, 2, 1j)

THEOREMS = ("T1.1", "T1.3/5.1", "T2.2", "T2.3", "C2.4", "T2.6", "T3.3", "T3.4", "C3.6")
_CORROBORATION_KIND = {"T1.1": "N", "T1.3/5.1": "P", "T2.2": "P", "T2.3": "P", "C2.4": "P",
                       "T2.6": "P", "T3.3": "E", "T3.4": "E", "C3.6": "E"}


@dataclass
class TheoremVerdict:
    theorem: str
    verdict: str                              # supported | violated | inconclusive
    measurements: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    corroboration: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict, repr=False)

    def to_dict(self, with_curves: bool = False) -> dict:
        out = {"theorem": self.theorem, "verdict": self.verdict,
               "measurements": self.measurements, "notes": list(self.notes),
               "corroboration": self.corroboration}
        if with_curves:
            out["curves"] = {k: c.to_dict() for k, c in self.curves.items()}
        return out


# ---------------------------------------------------------------------------
# ratio classification


def _tail_stats(values, n_points, tail_fraction):
    k = max(1, int(math.ceil(tail_fraction * n_points)))
    tail = values[n_points - k:n_points]
    return float(np.min(tail)), float(np.max(tail))


def little_o(ratio: np.ndarray, tail_fraction: float = 0.25, small: float = SMALL,
             large: float = LARGE) -> dict:
    """Classify a ratio curve as o(1), not o(1), or undecided."""
    ratio = np.asarray(ratio, dtype=float)
    n = len(ratio)
    lo, hi = _tail_stats(ratio, n, tail_fraction)
    n_prev = max(2, int(math.ceil(PREFIX * n)))
    lo_prev, hi_prev = _tail_stats(ratio, n_prev, tail_fraction)
    nonincreasing = hi <= hi_prev * (1 + 1e-9) + 1e-12
    if hi <= small and nonincreasing:
        status = "supported"
    elif lo > large and lo >= KEEP * lo_prev:
        status = "violated"
    else:
        status = "inconclusive"
    return {"status": status, "tail_liminf": lo, "tail_limsup": hi,
            "prefix_tail_limsup": hi_prev, "nonincreasing_under_extension": bool(nonincreasing)}


def comparable(ratio: np.ndarray, tail_fraction: float = 0.25, C: float = ASYMP_C) -> dict:
    """Is the ratio bounded above and below on the tail, within [1/C, C]?"""
    lo, hi = _tail_stats(np.asarray(ratio, dtype=float), len(ratio), tail_fraction)
    ok = (lo >= 1.0 / C) and (hi <= C)
    return {"status": "supported" if ok else "violated", "tail_liminf": lo,
            "tail_limsup": hi, "C": C}


def _combine(statuses) -> str:
    statuses = list(statuses)
    if statuses and all(s == "supported" for s in statuses):
        return "supported"
    if any(s == "violated" for s in statuses):
        return "violated"
    return "inconclusive"


def log_power(x: np.ndarray, m: float) -> np.ndarray:
    """x * max(1, log x)^m for x >= 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.maximum(x, 1.0))
    return x * np.maximum(1.0, lg) ** m


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / den, np.inf)
    return np.where(num == 0, 0.0, out)


# ---------------------------------------------------------------------------
# individual hypotheses


class _Context:
    """Curves shared between the verdicts of one (equation, solution, grid)."""

    def __init__(self, ode, f, grid, quad, tail_fraction, m):
        self.ode, self.f, self.grid, self.quad = ode, f, grid, quad
        self.tail, self.m = tail_fraction, m

    def T(self, g):
        return curve("T", g, INF, self.grid, self.quad)

    def A(self, g):
        return curve("A", g, INF, self.grid, self.quad)

    def L(self, g, a):
        return curve("L", g, a, self.grid, self.quad)


def _coefficient_ratios(ctx, numerator, denominator_curve, label):
    measurements, curves, statuses = {}, {}, []
    den = denominator_curve.values
    for name, num in numerator:
        ratio = _ratio(num, den)
        key = f"{name}/{label}"
        res = little_o(ratio, ctx.tail)
        measurements[key] = res
        curves[key] = GrowthCurve(ctx.grid, np.nan_to_num(ratio, posinf=1e300), key)
        statuses.append(res["status"])
    return measurements, curves, statuses


def _nonzero_coeffs(ode):
    return [(j, a) for j, a in enumerate(ode.coefficients)
            if not (a.is_constant and complex(a.evaluate(0)) == 0)]


def verdict_wittich(ctx) -> TheoremVerdict:
    Tf = ctx.T(ctx.f)
    nums = [(f"T(A{j})", ctx.T(a).values) for j, a in _nonzero_coeffs(ctx.ode)]
    meas, curves, st = _coefficient_ratios(ctx, nums, Tf, "T(f)")
    return TheoremVerdict("T1.1", _combine(st) if st else "supported", meas,
                          [] if st else ["all coefficients vanish"], curves=curves)


def check_2LM2(ode: LinearODE, grid: RadiusGrid, tail_fraction: float = 0.25,
               quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """Smallest p with limsup sum_{j>p} log+ M(A_j) / log+ M(A_p) < 1."""
    if not ode.entire_coefficients:
        raise NoneSatisfied("the condition concerns entire coefficients only")
    if not ode.transcendental_coefficients:
        raise NoneSatisfied("all coefficients are polynomials; at least one must be transcendental")
    logM = [np.maximum(max_modulus_curve(a, grid, quad).values, 0.0) for a in ode.coefficients]
    n = ode.order
    tried = {}
    for p in range(n):
        upper = sum((logM[j] for j in range(p + 1, n)), np.zeros(len(grid)))
        ratio = _ratio(upper, logM[p])
        ratio = np.where(logM[p] > 0, ratio, np.inf)
        lo, hi = _tail_stats(ratio, len(ratio), tail_fraction)
        tried[p] = hi
        if hi < 1:
            lower = {f"log+M(A{j})/log+M(A{p})": _tail_stats(_ratio(logM[j], logM[p]),
                                                             len(grid), tail_fraction)[1]
                     for j in range(p)}
            return {
                "p": p,
                "ratio_curve": GrowthCurve(grid, np.nan_to_num(ratio, posinf=1e300),
                                           f"sum log+M(A_j>{p})/log+M(A{p})"),
                "tail_limsup": hi,
                "tail_liminf": lo,
                "lower_ratios": lower,
                "A_p_transcendental": bool(ode.coefficients[p].is_transcendental),
                "tried": tried,
                "verdict": "supported",
            }
    raise NoneSatisfied(f"no index satisfies the condition; tail limsups {tried}")


def solution_count_check(ode: LinearODE, base, p: int, grid: RadiusGrid,
                         tail_fraction: float = 0.25, C: float = ASYMP_C,
                         quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """Members of ``base`` with log T(r, f) ≍ log M(r, A_p) on the tail."""
    logM = max_modulus_curve(ode.coefficients[p], grid, quad).values
    members = []
    for k, f in enumerate(base):
        T = curve("T", f, INF, grid, quad).values
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((T > 0) & (logM > 0), np.log(np.maximum(T, 1e-300)) / logM, 0.0)
        res = comparable(ratio, tail_fraction, C)
        members.append({"index": k, "c": res["tail_liminf"], **res})
    good = sum(1 for r in members if r["status"] == "supported")
    need = ode.order - p
    return {"p": p, "required": need, "count": good, "members": members,
            "pass": good >= need}


def _verdict_2lm2(ctx, base) -> TheoremVerdict:
    try:
        res = check_2LM2(ctx.ode, ctx.grid, ctx.tail, ctx.quad)
    except NoneSatisfied as exc:
        return TheoremVerdict("T1.3/5.1", "violated", notes=[f"NoneSatisfied: {exc}"])
    meas = {k: v for k, v in res.items() if k not in ("ratio_curve",)}
    notes = []
    if not res["A_p_transcendental"]:
        notes.append("A_p is not transcendental although the theorem implies it")
    if base is not None:
        try:
            meas["solution_count"] = solution_count_check(ctx.ode, base, res["p"], ctx.grid,
                                                          ctx.tail, quad=ctx.quad)
        except VDLabError as exc:
            notes.append(f"solution count skipped: {type(exc).__name__}: {exc}")
    # the conclusion covers only solutions with log T(r, f) ≍ log M(r, A_p)
    member = solution_count_check(ctx.ode, [ctx.f], res["p"], ctx.grid, ctx.tail,
                                  quad=ctx.quad)["members"][0]
    meas["logT(f)/logM(A_p)"] = member
    verdict = member["status"]
    if verdict != "supported":
        notes.append("the condition holds for the equation but f is not among the "
                     "solutions with log T(r,f) comparable to log M(r,A_p)")
    return TheoremVerdict("T1.3/5.1", verdict, meas, notes,
                          curves={"2LM2": res["ratio_curve"]})


def verdict_T22(ctx, base) -> TheoremVerdict:
    if base is None:
        raise MissingSolutionBase("the condition needs a characteristic function T(r) of a base")
    notes = []
    if not ctx.ode.entire_coefficients:
        return TheoremVerdict("T2.2", "violated", notes=["coefficients are not entire"])
    Tb = base_characteristic(base, ctx.grid, ctx.quad)
    logT = np.log(np.maximum(Tb.values, 1e-300))
    lhs = np.maximum(logT, 0.0) * np.maximum(1.0, np.log(np.maximum(logT, 1.0))) ** ctx.m
    Tf = ctx.T(ctx.f).values
    ratio = _ratio(lhs, Tf)
    res = little_o(ratio, ctx.tail)
    key = "logT(r)*log^m(logT(r))/T(f)"
    notes.append("exceptional sets of density < 1 are not distinguished from finite-measure sets")
    return TheoremVerdict("T2.2", res["status"], {key: res, "m": ctx.m}, notes,
                          curves={key: GrowthCurve(ctx.grid, ratio, key), "T(r)": Tb})


def _L_conditions(ctx, den_curve, label, a0_condition="zero"):
    nums = [(f"L(inf,A{j})", ctx.L(a, INF).values) for j, a in _nonzero_coeffs(ctx.ode)]
    A0 = ctx.ode.coefficients[0]
    notes = []
    if a0_condition == "zero":
        if A0.is_constant and complex(A0.evaluate(0)) == 0:
            notes.append("A0 vanishes identically, so L(r,0,A0) is infinite")
            nums.append(("L(0,A0)", np.full(len(ctx.grid), np.inf)))
        else:
            nums.append(("L(0,A0)", ctx.L(A0, 0).values))
    else:
        nums.append(("L(inf,A0)*log^m", log_power(ctx.L(A0, INF).values, ctx.m)))
    meas, curves, st = _coefficient_ratios(ctx, nums, den_curve, label)
    return meas, curves, st, notes


def verdict_T23(ctx) -> TheoremVerdict:
    meas, curves, st, notes = _L_conditions(ctx, ctx.T(ctx.f), "T(f)")
    return TheoremVerdict("T2.3", _combine(st), meas, notes, curves=curves)


def verdict_C24(ctx) -> TheoremVerdict:
    ok = ctx.ode.polynomial_coefficients
    meas = {"polynomial_coefficients": ok}
    return TheoremVerdict("C2.4", "supported" if ok else "violated", meas,
                          [] if ok else ["some coefficient is not a polynomial"])


def verdict_T26(ctx) -> TheoremVerdict:
    A0 = ctx.ode.coefficients[0]
    if not A0.is_entire:
        return TheoremVerdict("T2.6", "violated", notes=["A0 is not entire"])
    meas, curves, st, notes = _L_conditions(ctx, ctx.T(ctx.f), "T(f)", a0_condition="power")
    meas["m"] = ctx.m
    return TheoremVerdict("T2.6", _combine(st), meas, notes, curves=curves)


def verdict_T33(ctx) -> TheoremVerdict:
    Af = ctx.A(ctx.f)
    nums = [(f"T(A{j})", ctx.T(a).values) for j, a in _nonzero_coeffs(ctx.ode)]
    meas, curves, st = _coefficient_ratios(ctx, nums, Af, "A(f)")
    return TheoremVerdict("T3.3", _combine(st) if st else "supported", meas, curves=curves)


def verdict_T34(ctx) -> TheoremVerdict:
    meas, curves, st, notes = _L_conditions(ctx, ctx.A(ctx.f), "A(f)")
    if ctx.ode.entire_coefficients:
        notes.append("entire coefficients: the logarithmic order condition is not needed")
    else:
        rho_log = log_order_estimate(ctx.T(ctx.f), ctx.tail)
        meas["log_order"] = rho_log
        st.append("supported" if rho_log > 2 else "violated")
    return TheoremVerdict("T3.4", _combine(st), meas, notes, curves=curves)


def verdict_C36(ctx) -> TheoremVerdict:
    v = verdict_C24(ctx)
    return TheoremVerdict("C3.6", v.verdict, v.measurements, v.notes)


def _corroborate(ctx, verdict: TheoremVerdict, targets):
    kind = _CORROBORATION_KIND[verdict.theorem]
    values = {}
    for a in targets:
        try:
            est = estimate(kind, ctx.f, a, ctx.grid, ctx.tail, ctx.quad)
            values[target_label(a)] = est.estimate
        except VDLabError as exc:
            values[target_label(a)] = f"{type(exc).__name__}: {exc}"
    numeric = [v for v in values.values() if isinstance(v, float)]
    verdict.corroboration = {
        "kind": kind,
        "estimates": values,
        "threshold": SMALL,
        "corroborated": bool(numeric) and all(v <= SMALL for v in numeric),
    }


# ---------------------------------------------------------------------------
# public entry points


def wittich_admissible(f, ode: LinearODE, grid: RadiusGrid, tail_fraction: float = 0.25,
                       quad: CircleQuadrature = DEFAULT_QUAD) -> TheoremVerdict:
    """T(r, A_j) = o(T(r, f)) for all j."""
    return verdict_wittich(_Context(ode, f, grid, quad, tail_fraction, DEFAULT_M))


def resolve_base(ode: LinearODE, base=None):
    if base is not None:
        return list(base)
    if len(ode.solutions) == ode.order:
        return list(ode.solutions)
    return None


def standardness_verdicts(ode: LinearODE, f, grid: RadiusGrid, base=None,
                          tail_fraction: float = 0.25, m: float = DEFAULT_M,
                          targets=DEFAULT_TARGETS, theorems=THEOREMS,
                          quad: CircleQuadrature = DEFAULT_QUAD) -> list[TheoremVerdict]:
    """Evaluate every hypothesis for the solution ``f``; corroborate supported ones."""
    ctx = _Context(ode, f, grid, quad, tail_fraction, m)
    base = resolve_base(ode, base)
    builders = {
        "T1.1": lambda: verdict_wittich(ctx),
        "T1.3/5.1": lambda: _verdict_2lm2(ctx, base),
        "T2.2": lambda: verdict_T22(ctx, base),
        "T2.3": lambda: verdict_T23(ctx),
        "C2.4": lambda: verdict_C24(ctx),
        "T2.6": lambda: verdict_T26(ctx),
        "T3.3": lambda: verdict_T33(ctx),
        "T3.4": lambda: verdict_T34(ctx),
        "C3.6": lambda: verdict_C36(ctx),
    }
    out = []
    for thm in theorems:
        try:
            v = builders[thm]()
        except MissingSolutionBase as exc:
            v = TheoremVerdict(thm, "inconclusive", notes=[f"MissingSolutionBase: {exc}"])
        if v.verdict == "supported":
            _corroborate(ctx, v, targets)
        out.append(v)
    return out


def check_coefficient_bound(base, ode: LinearODE, grid: RadiusGrid,
                            tail_fraction: float = 0.25, C: float = ASYMP_C,
                            quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """L(r, inf, A_j) / (log r + max_k log T(r, f_k)) on the tail."""
    base = list(base)
    if not base:
        raise MissingSolutionBase("an empty solution set was given")
    logT = np.max(np.stack([np.log(np.maximum(curve("T", f, INF, grid, quad).values, 1e-300))
                            for f in base]), axis=0)
    den = np.log(grid.r) + logT
    idx = grid.tail_indices(tail_fraction)
    report = {"tail_fraction": tail_fraction, "C": C, "coefficients": {}}
    ok = True
    for j, a in enumerate(ode.coefficients):
        L = curve("L", a, INF, grid, quad).values
        if np.any(den[idx] <= 0):
            ok = False
            report["coefficients"][f"A{j}"] = {"bounded": False,
                                               "note": "denominator not positive on tail"}
            continue
        ratio = L[idx] / den[idx]
        slope = float(np.polyfit(np.log(grid.r[idx]), ratio, 1)[0]) if len(idx) > 2 else 0.0
        bounded = bool(np.max(ratio) <= C)
        ok &= bounded
        report["coefficients"][f"A{j}"] = {"tail_max": float(np.max(ratio)),
                                           "tail_min": float(np.min(ratio)),
                                           "tail_slope": slope, "bounded": bounded}
    report["pass"] = bool(ok)
    return report

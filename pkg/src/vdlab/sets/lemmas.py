"""Empirical checkers for the growth lemmas behind the exceptional sets.

Each checker evaluates both sides of an inequality on a radius grid,
collects the radii where it fails into an :class:`IntervalUnion` and
reports that set's size.  None of them proves anything; they measure how
the inequality behaves on finite data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, PredicateOscillation, PreconditionError
from ..expr import ComplexFunc, div, log_derivative
from ..nevanlinna import (
    DEFAULT_QUAD,
    INF,
    CircleQuadrature,
    RadiusGrid,
    area_characteristic,
    characteristic,
    log_max_modulus_curve,
    min_log_modulus_curve,
    target_parts,
)
from ..nevanlinna.functionals import _count_nudged
from .intervals import IntervalUnion, measures

BISECT_REL_TOL = 1e-8
DYADIC_K = (1, 2, 4, 8)


def log_power(x, m: float):
    """max(1, log x)^m, the regularised log^m used in every lemma bound."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.asarray(x, dtype=float))
    return np.maximum(1.0, np.nan_to_num(lg, nan=1.0, neginf=1.0)) ** m


# ---------------------------------------------------------------------------
# sets from predicates


def _refine(pred, left, right, rel_tol):
    """Bisect brackets [left, right] where pred(left) != pred(right)."""
    left = np.asarray(left, dtype=float).copy()
    right = np.asarray(right, dtype=float).copy()
    if not len(left):
        return left
    p_left = np.asarray(pred(left), dtype=bool)
    for _ in range(200):
        width = right - left
        if np.all(width <= rel_tol * np.maximum(right, 1e-300)):
            break
        mid = 0.5 * (left + right)
        pm = np.asarray(pred(mid), dtype=bool)
        same = pm == p_left
        left = np.where(same, mid, left)
        right = np.where(same, right, mid)
    return 0.5 * (left + right)


def set_from_predicate(pred, lo: float, hi: float, points: int = 2000,
                       rel_tol: float = BISECT_REL_TOL, spacing: str = "linear") -> IntervalUnion:
    """{r in [lo, hi) : pred(r)} from a scan with bisection-refined endpoints.

    ``pred`` maps an increasing array of radii to a boolean array.  Features
    narrower than the scan spacing are invisible; see :func:`stable_set`.
    """
    if not hi > lo:
        raise InputError("need lo < hi")
    if spacing == "geometric" and lo > 0:
        r = np.geomspace(lo, hi, points)
    else:
        r = np.linspace(lo, hi, points)
    mask = np.asarray(pred(r), dtype=bool)
    change = np.nonzero(mask[1:] != mask[:-1])[0]
    edges = _refine(pred, r[change], r[change + 1], rel_tol)
    rising = ~mask[change]                     # False -> True: an interval opens
    starts = list(edges[rising])
    ends = list(edges[~rising])
    if mask[0]:
        starts.insert(0, lo)
    if mask[-1]:
        ends.append(hi)
    return IntervalUnion(zip(starts, ends))


def stable_set(pred, lo, hi, points=2000, rel_tol=BISECT_REL_TOL, spacing="linear",
               refinements: int = 2):
    """Like :func:`set_from_predicate`, doubling the scan until the interval count settles.

    Raises PredicateOscillation if the count still changes after
    ``refinements`` doublings.  Returns (set, scan points used).
    """
    prev = set_from_predicate(pred, lo, hi, points, rel_tol, spacing)
    for _ in range(refinements):
        points *= 2
        cur = set_from_predicate(pred, lo, hi, points, rel_tol, spacing)
        if len(cur) == len(prev):
            return cur, points
        prev = cur
    raise PredicateOscillation(
        f"interval count still changing at {points} scan points; the predicate oscillates "
        "below the grid spacing")


# ---------------------------------------------------------------------------
# Borel-type growth lemma


@dataclass(frozen=True)
class LogPowerXi:
    """xi(x) = (log x)^m, evaluated through u = log x to avoid overflow."""

    m: float = 2.0

    def __call__(self, x):
        return np.log(np.asarray(x, dtype=float)) ** self.m

    def of_log(self, u):
        return np.asarray(u, dtype=float) ** self.m

    def tail_integral(self, U: float) -> float:
        """Closed form of the integral of dx/(x xi(x)) over [e, e^U]."""
        if self.m == 1:
            return math.log(U)
        return (1.0 - U ** (1.0 - self.m)) / (self.m - 1.0)

    def __str__(self):
        return f"log^{self.m:g}(x)"


def _rhs_integral(xi, U: float, panels: int = 64, nodes: int = 16) -> float:
    """Integral of dx/(x xi(x)) over [e, e^U], in the variable t = log log x."""
    if U <= 1:
        return 0.0
    t_hi = math.log(U)
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, t_hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * x[None, :]
    u = np.exp(t)
    return float(np.sum(half[:, None] * w[None, :] * u / xi.of_log(u)))


def borel_exceptional(log_F, phi, xi=None, C: float = 2.0, r0: float = 1.0, R: float = 100.0,
                      points: int = 2000) -> dict:
    """Exceptional set of a Borel-type growth lemma and its integral bound.

    E = {r >= r0 : F(r + phi(r)/xi(F(r))) >= C F(r)} is built by direct
    predicate evaluation; ``log_F`` returns log F(r) (so towers such as
    exp(e^r) stay finite).  The report compares

        LHS = integral over E of dr/phi(r)
        RHS = 1/xi(e) + (1/log C) * integral of dx/(x xi(x)) over [e, F(R)].
    """
    xi = xi or LogPowerXi(2.0)
    if not C > 1:
        raise PreconditionError(f"C must exceed 1, got {C}")
    if not R > r0:
        raise InputError("need r0 < R")
    scan = np.linspace(r0, R, points)
    lf = np.asarray(log_F(scan), dtype=float)
    if np.any(~np.isfinite(lf)):
        raise PreconditionError("log F must be finite on [r0, R]")
    if lf[0] < 1.0 - 1e-12:
        raise PreconditionError(f"F(r0) = exp({lf[0]:.4g}) is below e")
    if np.any(np.diff(lf) < -1e-12 * np.maximum(1.0, np.abs(lf[1:]))):
        raise PreconditionError("F must be nondecreasing on [r0, R]")
    ph = np.asarray(phi(scan), dtype=float) * np.ones_like(scan)
    if np.any(ph <= 0):
        raise PreconditionError("phi must be positive on [r0, R]")
    log_C = math.log(C)

    def pred(r):
        r = np.asarray(r, dtype=float)
        base = np.asarray(log_F(r), dtype=float)
        step = np.asarray(phi(r), dtype=float) / xi.of_log(base)
        return np.asarray(log_F(r + step), dtype=float) - base >= log_C

    E, used = stable_set(pred, r0, R, points)
    lhs = E.weighted_measure(lambda t: 1.0 / (np.asarray(phi(t), dtype=float) * np.ones_like(t)),
                             r0, R)
    U = float(log_F(np.array([R]))[0])
    integral = _rhs_integral(xi, U)
    rhs = 1.0 / float(xi.of_log(1.0)) + integral / log_C
    closed = None
    if isinstance(xi, LogPowerXi):
        closed = 1.0 / float(xi.of_log(1.0)) + xi.tail_integral(U) / log_C
    return {
        "lemma": "borel",
        "C": C, "r0": r0, "R": R, "xi": str(xi),
        "set": E.to_list(),
        "linear_measure": E.measure(),
        "lhs": lhs,
        "rhs": rhs,
        "rhs_closed_form": closed,
        "slack": rhs - lhs,
        "scan_points": used,
        "pass": bool(lhs <= rhs),
    }


# ---------------------------------------------------------------------------
# zero counts and minimum modulus of entire functions


def value_at_origin(g: ComplexFunc, radius: float = 1e-3, samples: int = 64) -> complex:
    """g(0) as a circle mean, which also covers removable singularities."""
    theta = 2 * np.pi * np.arange(samples) / samples
    return complex(np.mean(g.evaluate(radius * np.exp(1j * theta))))


def _require_normalised(g: ComplexFunc):
    if not isinstance(g, ComplexFunc):
        raise InputError("the lemma checks need a symbolic function")
    g0 = value_at_origin(g)
    if abs(g0 - 1.0) > 1e-8:
        raise PreconditionError(f"g(0) must be 1, got {g0:.6g}")


def zero_count(g: ComplexFunc, r: float) -> int:
    """Zeros of g in |z| < r, with removable singularities of the split cancelled."""
    num, den = target_parts(g, 0.0)
    zeros, rr = _count_nudged(num, r)
    if den.is_constant:
        return zeros
    poles, _ = _count_nudged(den, rr)
    return zeros - poles


def zero_count_lemma_check(g: ComplexFunc, grid: RadiusGrid, m: float = 1.5,
                           max_log_measure: float = 0.5,
                           quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """n(r) <= 2r/(R - r) * L(R) with R = r + r / log^m L(r).

    Here L is the log maximum modulus and log^m is regularised as
    max(1, log L)^m.  The check passes when the violating radii have
    logarithmic measure at most ``max_log_measure``.
    """
    _require_normalised(g)
    r = grid.r
    L = log_max_modulus_curve(g, INF, grid, quad).values
    lam = log_power(L, m)
    big_r = r + r / lam
    uniq, inv = np.unique(big_r, return_inverse=True)
    L_big = log_max_modulus_curve(g, INF, RadiusGrid.from_points(uniq), quad).values[inv]
    n = np.array([zero_count(g, x) for x in r], dtype=float)
    if np.any(n < 0):
        raise PreconditionError("g has poles; the zero-count lemma is for entire functions")
    bound = 2.0 * r / (big_r - r) * L_big
    bad = n > bound * (1 + 1e-12)
    E = IntervalUnion.from_mask(r, bad)
    with np.errstate(divide="ignore", invalid="ignore"):
        k_ratio = np.where(L > 0, n / (L * lam), np.where(n > 0, np.inf, 0.0))
    log_meas = E.log_measure(1.0, math.inf)
    return {
        "lemma": "zero-count",
        "m": m,
        "radii": r.tolist(),
        "n": n.tolist(),
        "bound": bound.tolist(),
        "K": float(np.max(k_ratio)),
        "violating_set": E.to_list(),
        "violating_log_measure": log_meas,
        "max_log_measure": max_log_measure,
        "pass": bool(log_meas <= max_log_measure),
    }


def min_modulus_check(g: ComplexFunc, grid: RadiusGrid, delta: float = 0.1, m: float = 1.5,
                      quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """log|g| >= -K (1 + log 1/delta) L log^m L outside a set of density < delta.

    Reports the smallest K in (1, 2, 4, 8) that works; K is None if none does.
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    _require_normalised(g)
    r = grid.r
    L = log_max_modulus_curve(g, INF, grid, quad).values
    low = min_log_modulus_curve(g, grid, quad).values
    scale = (1.0 + math.log(1.0 / delta)) * L * log_power(L, m)
    tried = []
    chosen = None
    for K in DYADIC_K:
        bad = low < -K * scale
        E = IntervalUnion.from_mask(r, bad)
        dens = measures(E, grid.r_max)
        tried.append({"K": K, "violating_points": int(bad.sum()),
                      "density": dens.upper_linear_density})
        if dens.upper_linear_density < delta:
            chosen = (K, E, dens)
            break
    report = {
        "lemma": "min-modulus",
        "delta": delta,
        "m": m,
        "radii": r.tolist(),
        "min_log_modulus": low.tolist(),
        "tried": tried,
        "K": None,
        "pass": False,
    }
    if chosen:
        K, E, dens = chosen
        report.update(K=K, violating_set=E.to_list(), density=dens.to_dict(), **{"pass": True})
    return report


# ---------------------------------------------------------------------------
# logarithmic derivatives


def derivative_quotient(f: ComplexFunc, k: int, j: int) -> ComplexFunc:
    """f^(k) / f^(j); the k = j + 1 case is built structurally."""
    if not k > j >= 0:
        raise InputError("need k > j >= 0")
    base = f.nth_diff(j)
    if k == j + 1:
        return log_derivative(base)
    return div(f.nth_diff(k), base)


def log_deriv_check(f: ComplexFunc, grid: RadiusGrid, k: int = 1, j: int = 0,
                    budget: float = 1.0, quad: CircleQuadrature = DEFAULT_QUAD) -> dict:
    """max log+ |f^(k)/f^(j)| <= C (log T(r, f) + log r) outside a set of finite measure.

    The smallest C whose violating radii have linear measure at most
    ``budget`` is reported; radii are weighted by their grid cells.
    """
    if not f.is_transcendental:
        raise PreconditionError(f"{f} is not transcendental")
    q = derivative_quotient(f, k, j)
    r = grid.r
    lq = log_max_modulus_curve(q, INF, grid, quad).values
    T = characteristic(f, grid, quad).values
    with np.errstate(divide="ignore"):
        scale = np.maximum(np.log(np.maximum(T, 1e-300)) + np.log(r), 0.0)
    mids = 0.5 * (r[:-1] + r[1:])
    cell = np.diff(np.concatenate([[r[0]], mids, [r[-1]]]))
    forced = (scale <= 0) & (lq > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, lq / scale, 0.0)
    spent = float(cell[forced].sum())
    order = np.argsort(-ratio[~forced], kind="stable")
    free_ratio = ratio[~forced][order]
    free_cell = cell[~forced][order]
    C = 0.0
    if spent > budget:
        C = math.inf
    else:
        total = spent
        for rho, w in zip(free_ratio, free_cell):
            if total + w > budget:
                C = float(rho)
                break
            total += w
    bad = forced | (ratio > C)
    E = IntervalUnion.from_mask(r, bad)
    tail = grid.tail_indices(0.25)
    return {
        "lemma": "log-deriv",
        "k": k, "j": j,
        "radii": r.tolist(),
        "log_quotient_max": lq.tolist(),
        "log_T_plus_log_r": scale.tolist(),
        "C": C,
        "tail_ratio_max": float(np.max(ratio[tail])),
        "violating_set": E.to_list(),
        "violating_measure": E.measure(),
        "budget": budget,
        "pass": bool(math.isfinite(C)),
    }


# ---------------------------------------------------------------------------
# large-area radii


def area_set(f: ComplexFunc, alpha: float, lo: float, hi: float, points: int = 400,
             quad: CircleQuadrature = DEFAULT_QUAD) -> IntervalUnion:
    """{r in [lo, hi) : A(r, f) >= r^alpha}."""

    def pred(r):
        vals = area_characteristic(f, RadiusGrid.from_points(r), quad).values
        return vals >= np.asarray(r) ** alpha

    return set_from_predicate(pred, lo, hi, points, spacing="geometric")

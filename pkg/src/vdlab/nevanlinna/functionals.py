"""Growth functionals of meromorphic functions over radius grids.

Conventions: ``a`` is a complex target or ``math.inf``.  For f = g/h
(the entire split of the expression) every functional is built from

    P_a = g - a*h  (finite a)   or  h  (a = inf)     -- the a-point function
    Q_a = h        (finite a)   or  g  (a = inf)

so that log+ 1/|f - a| (resp. log+ |f|) equals log+ (|Q_a| / |P_a|) and
the a-points of f are the zeros of P_a.

Numeric solutions (ray fans produced by :mod:`vdlab.odes`) are accepted
wherever the functional only needs circle samples; they are integrated by
the periodic trapezoid rule over their fixed ray angles.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import (
    DegenerateDenominator,
    InputError,
    PoleHit,
    QuadratureNoConverge,
    WindingUnstable,
)
from ..expr import ZERO, ComplexFunc, Const, add, log_derivative, mul, neg
from .grid import INF, GrowthCurve, RadiusGrid, normalize_target
from .quadrature import (
    DEFAULT_QUAD,
    TWO_PI,
    CircleQuadrature,
    circle_means,
    find_crossings,
    polish_extrema,
)
from .winding import winding_number

LOG_CAP = 1e6                      # nats; stands in for log 1/|f-a| at exact hits
RADIUS_NUDGE = 1e-6                # relative radius shift when an a-point sits on a circle

_parts_cache: dict = {}


def _is_numeric(f) -> bool:
    return getattr(f, "is_numeric", False)


def target_parts(f: ComplexFunc, a) -> tuple[ComplexFunc, ComplexFunc]:
    """(P_a, Q_a) as described in the module docstring."""
    a = normalize_target(a)
    key = (id(f), a)
    hit = _parts_cache.get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    g, h = f.split
    if a == INF:
        parts = (h, g)
    else:
        parts = (add(g, mul(Const(-a), h)), h)
    if len(_parts_cache) > 2048:
        _parts_cache.clear()
    _parts_cache[key] = (f, parts)
    return parts


def log_ratio(f, a):
    """u(r, theta) = log|Q_a| - log|P_a| as a vectorised callable."""
    p, q = target_parts(f, a)

    def u(r, theta):
        z = np.asarray(r) * np.exp(1j * np.asarray(theta))
        lp = np.asarray(p.eval_log(z).logmod)
        lq = 0.0 if isinstance(q, Const) and q.value == 1 else np.asarray(q.eval_log(z).logmod)
        with np.errstate(invalid="ignore"):
            out = lq - lp
        # exact a-points (or poles) on a sample are replaced by a finite cap
        return np.nan_to_num(out, nan=0.0, posinf=LOG_CAP, neginf=-LOG_CAP)

    return u


def _as_grid(grid) -> RadiusGrid:
    if isinstance(grid, RadiusGrid):
        return grid
    return RadiusGrid.from_points(np.atleast_1d(np.asarray(grid, dtype=float)))


# ---------------------------------------------------------------------------
# proximity m(r, a, f)


def proximity_curve(f, a, grid, quad: CircleQuadrature = DEFAULT_QUAD) -> GrowthCurve:
    grid = _as_grid(grid)
    a = normalize_target(a)
    if _is_numeric(f):
        u = f.log_ratio_samples(a, grid.r)
        vals = np.mean(np.maximum(u, 0.0), axis=1)
        return GrowthCurve(grid, vals, "m", a, meta={"method": "trapezoid-rays",
                                                      "rays": int(u.shape[1])})
    u = log_ratio(f, a)
    breaks = find_crossings(u, grid.r, quad.scan_points)
    vals, ok = circle_means(lambda r, t: np.maximum(u(r, t), 0.0), grid.r, quad, breaks)
    return GrowthCurve(grid, vals, "m", a, ok, meta={"method": "adaptive-gk15"})


def proximity(f, a, r: float, quad: CircleQuadrature = DEFAULT_QUAD) -> float:
    """m(r, a, f); raises QuadratureNoConverge when the tolerance is missed."""
    c = proximity_curve(f, a, [r], quad)
    if not c.flags[0]:
        raise QuadratureNoConverge(f"proximity m({r}) missed tolerance")
    return float(c.values[0])


# ---------------------------------------------------------------------------
# counting functions n, N


def count(f: ComplexFunc, a, r: float) -> int:
    """n(r, a, f): a-points in |z| < r with multiplicity (poles for a = inf)."""
    p, _ = target_parts(f, a)
    return winding_number(p, r)


def _count_nudged(p, r):
    """Count, shifting r outward by RADIUS_NUDGE*r (at most twice) on instability."""
    rr = r
    for _ in range(3):
        try:
            return winding_number(p, rr), rr
        except WindingUnstable:
            rr = rr * (1.0 + RADIUS_NUDGE)
    raise WindingUnstable(f"winding unstable near r={r} even after perturbation")


def counting_curve(f, a, grid) -> GrowthCurve:
    grid = _as_grid(grid)
    p, _ = target_parts(f, a)
    vals, used = [], []
    for r in grid.radii:
        n, rr = _count_nudged(p, r)
        vals.append(n)
        used.append(rr)
    perturbed = [(r, rr) for r, rr in zip(grid.radii, used) if rr != r]
    return GrowthCurve(grid, np.array(vals, dtype=float), "n", normalize_target(a),
                       meta={"perturbed_radii": perturbed})


def a_point_moduli(f, a, r_max: float, r_start: float | None = None, rel_tol=1e-11):
    """Moduli of a-points in (0, r_max] located by bisection on the count.

    Returns ``(n0, jumps)`` where n0 is the multiplicity at the origin and
    ``jumps`` is a list of (modulus, multiplicity).
    """
    p, _ = target_parts(f, a)
    if isinstance(p, Const):
        if p.value == 0:
            raise DegenerateDenominator("f is identically equal to the target")
        return 0, []
    r_eps = r_start if r_start is not None else min(1e-6, 1e-6 * r_max)
    n0, r_eps = _count_nudged(p, r_eps)
    jumps: list[tuple[float, int]] = []

    def locate(lo, n_lo, hi, n_hi):
        if n_lo == n_hi:
            return
        if hi - lo <= rel_tol * hi:
            jumps.append((0.5 * (lo + hi), n_hi - n_lo))
            return
        mid = 0.5 * (lo + hi)
        try:
            n_mid = winding_number(p, mid)
        except WindingUnstable:
            # an a-point sits (numerically) on |z| = mid
            jumps.append((mid, n_hi - n_lo))
            return
        locate(lo, n_lo, mid, n_mid)
        locate(mid, n_mid, hi, n_hi)

    # coarse geometric scan keeps each bisection bracket small
    checkpoints = np.geomspace(r_eps, r_max, max(8, int(16 * math.log10(r_max / r_eps)) + 1))
    prev_r, prev_n = r_eps, n0
    for r in checkpoints[1:]:
        n, rr = _count_nudged(p, r)
        locate(prev_r, prev_n, rr, n)
        prev_r, prev_n = rr, n
    return n0, sorted(jumps)


def integrated_count(f, a, grid) -> GrowthCurve:
    """N(r, a, f) integrated exactly from the located a-point moduli."""
    grid = _as_grid(grid)
    a = normalize_target(a)
    p, _ = target_parts(f, a)
    if isinstance(p, Const) and p.value != 0:
        return GrowthCurve(grid, np.zeros(len(grid)), "N", a, meta={"jumps": []})
    n0, jumps = a_point_moduli(f, a, grid.r_max * (1 + 2 * RADIUS_NUDGE))
    r = grid.r
    vals = n0 * np.log(r)
    for rho, mult in jumps:
        vals = vals + mult * np.where(r > rho, np.log(r / rho), 0.0)
    return GrowthCurve(grid, vals, "N", a,
                       meta={"n0": n0, "jumps": [[float(x), int(k)] for x, k in jumps]})


# ---------------------------------------------------------------------------
# characteristic T(r, f)


def characteristic(f, grid, quad: CircleQuadrature = DEFAULT_QUAD) -> GrowthCurve:
    grid = _as_grid(grid)
    m = proximity_curve(f, INF, grid, quad)
    if _is_numeric(f) or f.is_entire:
        return GrowthCurve(grid, m.values, "T", INF, m.flags, meta=dict(m.meta))
    n = integrated_count(f, INF, grid)
    return GrowthCurve(grid, m.values + n.values, "T", INF, m.flags,
                       meta={**m.meta, "pole_jumps": n.meta.get("jumps")})


# ---------------------------------------------------------------------------
# circle maxima: L(r, a, f) and log M(r, f)


def _circle_max(f, a, grid, quad, clamp):
    grid = _as_grid(grid)
    if _is_numeric(f):
        u = f.log_ratio_samples(a, grid.r)
        best = np.max(u, axis=1)
    else:
        u_fn = log_ratio(f, a)
        n = max(512, quad.scan_points)
        theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
        samples = u_fn(grid.r[:, None], theta[None, :])
        best, _ = polish_extrema(u_fn, grid.r, theta, samples, maximize=True)
    return np.maximum(best, 0.0) if clamp else best


def log_max_modulus_curve(f, a, grid, quad: CircleQuadrature = DEFAULT_QUAD) -> GrowthCurve:
    grid = _as_grid(grid)
    a = normalize_target(a)
    return GrowthCurve(grid, _circle_max(f, a, grid, quad, clamp=True), "L", a)


def log_max_modulus(f, a, r: float, quad: CircleQuadrature = DEFAULT_QUAD) -> float:
    return float(log_max_modulus_curve(f, a, [r], quad).values[0])


def max_modulus_curve(f, grid, quad: CircleQuadrature = DEFAULT_QUAD) -> GrowthCurve:
    """log M(r, f), not clamped at zero."""
    grid = _as_grid(grid)
    return GrowthCurve(grid, _circle_max(f, INF, grid, quad, clamp=False), "M", INF)


def max_modulus(f, r: float, quad: CircleQuadrature = DEFAULT_QUAD) -> float:
    return float(max_modulus_curve(f, [r], quad).values[0])


def min_log_modulus_curve(f, grid, quad: CircleQuadrature = DEFAULT_QUAD) -> GrowthCurve:
    """min over |z| = r of log|f(z)|."""
    grid = _as_grid(grid)
    u_fn = log_ratio(f, INF)
    n = max(512, quad.scan_points)
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    samples = u_fn(grid.r[:, None], theta[None, :])
    best, _ = polish_extrema(u_fn, grid.r, theta, samples, maximize=False)
    return GrowthCurve(grid, best, "minlog", INF)


# ---------------------------------------------------------------------------
# spherical area A(r, f) and the Ahlfors-Shimizu characteristic T0(r, f)


def _log_at(func, z):
    """Log-domain value, nudging samples that land exactly on a pole."""
    try:
        return func.eval_log(z)
    except PoleHit:
        return func.eval_log(z * (1.0 + 1e-13))


def _flux_integrand(f: ComplexFunc):
    """Integrand of A(r) = (1/2pi) * integral Re(z(g'conj(g) + h'conj(h))) / (|g|^2+|h|^2).

    This is r * d/dr of the circle mean of log sqrt(|g|^2 + |h|^2), which by
    Green's theorem equals the spherical area of the image of |z| < r
    divided by pi.  Each term is written as Re(z g'/g) * |g|^2/(|g|^2+|h|^2)
    with g'/g formed structurally, so no phase of size e^r ever appears.
    """
    g, h = f.split
    pieces = [(x, log_derivative(x)) for x in (g, h)]

    def F(r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = r * np.exp(1j * theta)
        lms = [np.asarray(x.eval_log(z).logmod) for x, _ in pieces]
        big = np.logaddexp(2 * lms[0], 2 * lms[1])
        out = 0.0
        for lm_x, (_, dlog) in zip(lms, pieces):
            if dlog == ZERO:
                continue
            d = _log_at(dlog, z)
            with np.errstate(invalid="ignore", over="ignore"):
                weight = np.exp(2 * lm_x - big)
                term = weight * np.exp(np.log(r) + np.asarray(d.logmod)) * np.cos(
                    theta + np.asarray(d.arg))
            out = out + np.where(weight > 0, term, 0.0)
        return np.nan_to_num(out)

    return F


def _area_flux(f, radii, quad):
    radii = np.asarray(radii, dtype=float)
    if f.is_constant:
        return np.zeros(len(radii)), np.ones(len(radii), dtype=bool)
    F = _flux_integrand(f)
    breaks = find_crossings(log_ratio(f, INF), radii, quad.scan_points)
    return circle_means(F, radii, quad, breaks)


def sph_density(f: ComplexFunc):
    """(r, theta) -> f#(z)^2 evaluated stably through the entire split.

    Uses g'h - gh' = gh (g'/g - h'/h).
    """
    g, h = f.split
    lg_d, lh_d = log_derivative(g), log_derivative(h)
    cross_d = add(lg_d, neg(lh_d))

    def D(r, theta):
        z = np.asarray(r) * np.exp(1j * np.asarray(theta))
        lg = np.asarray(g.eval_log(z).logmod)
        lh = np.asarray(h.eval_log(z).logmod)
        lc = np.asarray(_log_at(cross_d, z).logmod)
        denom = np.logaddexp(2 * lg, 2 * lh)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(2 * (lg + lh + lc - denom))
        return np.nan_to_num(out)

    return D


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :])
    weights = half[:, None] * w[None, :]
    return nodes, weights


def _area_rings(f, radii, quad, ring_order=8, ring_width=0.25):
    """A(r) = 2 * integral_0^r s * mean_theta f#(s e^{i theta})^2 ds by polar quadrature.

    Rings are shared across all radii (cumulative sums).
    """
    radii = np.asarray(radii, dtype=float)
    if f.is_constant:
        return np.zeros(len(radii)), np.ones(len(radii), dtype=bool)
    edges = [0.0]
    for r in radii:
        prev = edges[-1]
        k = max(1, int(math.ceil((r - prev) / ring_width)))
        edges.extend(np.linspace(prev, r, k + 1)[1:])
    edges = np.asarray(edges)
    nodes, weights = _gauss_panels(edges, ring_order)
    D = sph_density(f)
    ring_vals, ok = circle_means(D, nodes.ravel(), quad)
    contrib = (2.0 * nodes * ring_vals.reshape(nodes.shape) * weights).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    idx = np.searchsorted(edges, radii)
    ring_ok = ok.reshape(nodes.shape).all(axis=1)
    good = np.concatenate([[True], np.cumprod(ring_ok).astype(bool)])
    return cum[idx], good[idx]


def area_characteristic(f, grid, quad: CircleQuadrature = DEFAULT_QUAD,
                        method: str = "flux") -> GrowthCurve:
    """A(r, f), the spherical area of f(D(0, r)) divided by pi.

    ``method="flux"`` integrates the boundary form (robust for very fast
    growth); ``method="rings"`` integrates f#^2 over the disc directly.
    """
    grid = _as_grid(grid)
    if _is_numeric(f):
        vals = f.area_flux_samples(grid.r)
        return GrowthCurve(grid, vals, "A", INF, meta={"method": "trapezoid-rays"})
    if method == "flux":
        vals, ok = _area_flux(f, grid.r, quad)
    elif method == "rings":
        vals, ok = _area_rings(f, grid.r, quad)
    else:
        raise ValueError(f"unknown area method {method!r}")
    return GrowthCurve(grid, vals, "A", INF, ok, meta={"method": method})


def ahlfors_shimizu(f, grid, quad: CircleQuadrature = DEFAULT_QUAD,
                    nodes_per_interval: int = 4) -> tuple[GrowthCurve, GrowthCurve]:
    """(T0, A) on ``grid``; T0(r) = integral_0^r A(t)/t dt by Gauss-Legendre in t."""
    grid = _as_grid(grid)
    if _is_numeric(f):
        # the quadrature nodes fall between the radii a fan was sampled on
        raise InputError("T0 needs a symbolic function; numeric fans only support A(r)")
    r = grid.r
    head = np.linspace(0.0, r[0], max(2, int(math.ceil(r[0] / 0.5))) + 1)
    edges = np.concatenate([head, r[1:]])
    nodes, weights = _gauss_panels(edges, nodes_per_interval)
    a_all, ok_all = _area_flux(f, np.concatenate([nodes.ravel(), r]), quad)
    a_nodes, a_grid = a_all[: nodes.size], a_all[nodes.size:]
    ok_nodes, ok_grid = ok_all[: nodes.size], ok_all[nodes.size:]
    contrib = (a_nodes.reshape(nodes.shape) / nodes * weights).sum(axis=1)
    cum = np.cumsum(contrib)
    n_head = len(head) - 1
    t0 = cum[n_head - 1:]
    panel_ok = ok_nodes.reshape(nodes.shape).all(axis=1)
    good = np.cumprod(panel_ok).astype(bool)[n_head - 1:]
    T0 = GrowthCurve(grid, t0, "T0", INF, good & ok_grid)
    A = GrowthCurve(grid, a_grid, "A", INF, ok_grid, meta={"method": "flux"})
    return T0, A


def ahlfors_shimizu_identity(f: ComplexFunc, grid, quad: CircleQuadrature = DEFAULT_QUAD):
    """T0 from the circle-mean identity (independent route used as an oracle).

    T0(r) = mean log sqrt(|g|^2 + |h|^2) over |z| = r  -  log sqrt(|g(0)|^2 + |h(0)|^2).
    """
    grid = _as_grid(grid)
    g, h = f.split

    def F(r, theta):
        z = np.asarray(r) * np.exp(1j * np.asarray(theta))
        return 0.5 * np.logaddexp(2 * np.asarray(g.eval_log(z).logmod),
                                  2 * np.asarray(h.eval_log(z).logmod))

    breaks = find_crossings(log_ratio(f, INF), grid.r, quad.scan_points)
    vals, ok = circle_means(F, grid.r, quad, breaks)
    at0 = F(0.0, 0.0)
    return GrowthCurve(grid, vals - at0, "T0", INF, ok, meta={"method": "identity"})


# ---------------------------------------------------------------------------
# characteristic of a solution base


def base_characteristic(base, grid, quad: CircleQuadrature = DEFAULT_QUAD) -> GrowthCurve:
    """(1/2pi) integral log sqrt(1 + sum |f_k|^2) over |z| = r."""
    grid = _as_grid(grid)
    base = list(base)
    if not base:
        raise ValueError("empty solution base")
    if all(_is_numeric(b) for b in base):
        logs = [b.logabs_samples(grid.r) for b in base]
        tot = np.logaddexp.reduce(np.stack([np.zeros_like(logs[0])] + [2 * x for x in logs]),
                                  axis=0)
        vals = np.mean(0.5 * tot, axis=1)
        return GrowthCurve(grid, vals, "Tbase", INF, meta={"method": "trapezoid-rays"})
    if any(_is_numeric(b) for b in base):
        raise TypeError("mix of numeric and symbolic solutions in one base")

    def F(r, theta):
        z = np.asarray(r) * np.exp(1j * np.asarray(theta))
        acc = np.zeros(np.broadcast_shapes(np.shape(r), np.shape(theta)))
        for b in base:
            acc = np.logaddexp(acc, 2 * np.asarray(b.eval_log(z).logmod))
        return 0.5 * acc

    vals, ok = circle_means(F, grid.r, quad)
    return GrowthCurve(grid, vals, "Tbase", INF, ok, meta={"method": "adaptive-gk15",
                                                            "size": len(base)})

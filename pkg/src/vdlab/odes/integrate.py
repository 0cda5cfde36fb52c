"""Taylor-series integration of linear ODEs along rays.

On each step the coefficient series A_j(z + w) are generated by the
expression layer's Taylor mode, the solution series follows from the
recurrence obtained by matching powers of w, and the step length is
chosen so that the trailing series terms stay below the tolerance.
State vectors are renormalised after every step and the scale is kept
as a separate logarithm, so growth like exp(e^r) never overflows.

All rays of a fan advance together; each keeps its own step length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, StepUnderflow
from ..expr import LogComplex
from ..nevanlinna.grid import INF, normalize_target
from .equation import Jet, LinearODE

DEFAULT_ORDER = 20


@dataclass
class NumericSolution:
    """Log-domain samples of one solution on a fan of rays from ``z0``.

    ``logf[i, k]``/``argf[i, k]`` hold log|f| and arg f at distance
    ``radii[i]`` along ray ``thetas[k]``; ``logdf``/``argdf`` the same
    for f'.  With ``z0 = 0`` the columns of each row are equispaced
    samples of the circle |z| = radii[i].
    """

    ode: LinearODE
    jet: Jet
    thetas: np.ndarray
    radii: np.ndarray
    logf: np.ndarray
    argf: np.ndarray
    logdf: np.ndarray
    argdf: np.ndarray
    meta: dict = field(default_factory=dict)

    is_numeric = True

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    # --- access --------------------------------------------------------------
    def samples(self, ray: int = 0) -> list[tuple[float, float, float]]:
        """(s, log|f|, arg f) along one ray."""
        return [(float(s), float(lm), float(a))
                for s, lm, a in zip(self.radii, self.logf[:, ray], self.argf[:, ray])]

    def _rows(self, radii):
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        idx = np.searchsorted(self.radii, radii)
        idx = np.clip(idx, 0, len(self.radii) - 1)
        if not np.allclose(self.radii[idx], radii, rtol=1e-12, atol=0):
            raise InputError("numeric solutions are only available at their integration radii")
        if abs(self.jet.z0) != 0:
            raise InputError("circle samples need a fan anchored at the origin")
        return idx

    def logabs_samples(self, radii) -> np.ndarray:
        return self.logf[self._rows(radii)]

    def log_ratio_samples(self, a, radii) -> np.ndarray:
        """log|Q_a| - log|P_a| on the fan: log|f| (a = inf) or -log|f - a|."""
        rows = self._rows(radii)
        a = normalize_target(a)
        if a == INF:
            return self.logf[rows]
        diff = LogComplex(self.logf[rows], self.argf[rows]) - LogComplex.from_complex(a)
        out = -np.asarray(diff.logmod)
        return np.nan_to_num(out, posinf=1e6, neginf=-1e6)

    def area_flux_samples(self, radii) -> np.ndarray:
        """A(r) as the circle mean of Re(z f'/f) |f|^2 / (1 + |f|^2)."""
        rows = self._rows(radii)
        r = self.radii[rows][:, None]
        lf, lf1 = self.logf[rows], self.logdf[rows]
        phase = self.thetas[None, :] + self.argdf[rows] - self.argf[rows]
        with np.errstate(over="ignore", invalid="ignore"):
            weight = np.exp(2 * lf - np.logaddexp(0.0, 2 * lf))
            term = weight * np.exp(np.log(r) + lf1 - lf) * np.cos(phase)
        term = np.where(weight > 0, np.nan_to_num(term), 0.0)
        return term.mean(axis=1)

    def max_error_estimate(self) -> float:
        return float(self.meta.get("max_local_error", 0.0))


def _falling(m: int, j: int) -> float:
    """(m + 1)(m + 2)...(m + j)."""
    out = 1.0
    for i in range(1, j + 1):
        out *= m + i
    return out


def _solution_series(coef_series, y, order):
    """Taylor coefficients c_0..c_order of the solution from its jet ``y``.

    ``coef_series[j]`` has shape (order + 1, R); ``y`` has shape (n, R).
    """
    n = len(coef_series)
    rays = y.shape[1]
    c = np.zeros((order + 1, rays), dtype=complex)
    for k in range(n):
        c[k] = y[k] / math.factorial(k)
    for k in range(0, order + 1 - n):
        acc = np.zeros(rays, dtype=complex)
        for j, a in enumerate(coef_series):
            if a is None:
                continue
            for i in range(k + 1):
                acc += a[i] * _falling(k - i, j) * c[k - i + j]
        c[k + n] = -acc / _falling(k, n)
    return c


def _eval_series(c, w, deriv=0):
    """Value of the ``deriv``-th derivative of sum c_k w^k (Horner)."""
    order = c.shape[0] - 1
    out = np.zeros(np.shape(w), dtype=complex)
    for k in range(order, deriv - 1, -1):
        out = out * w + c[k] * _falling(k - deriv, deriv)
    return out


def integrate_fan(ode: LinearODE, jet: Jet, radii, n_rays: int = 512, tol: float = 1e-12,
                  order: int = DEFAULT_ORDER, theta0: float = 0.0,
                  thetas=None, max_steps: int = 200000) -> NumericSolution:
    """Integrate from ``jet.z0`` along ``n_rays`` equispaced directions.

    Values are stored at the distances in ``radii`` (sorted, positive).
    """
    n = ode.order
    if len(jet.values) != n:
        raise InputError("jet length must equal the equation order")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or np.any(np.diff(radii) <= 0) or np.any(radii < 0):
        raise InputError("radii must be increasing and non-negative")
    if thetas is None:
        thetas = theta0 + 2 * np.pi * np.arange(n_rays) / n_rays
    thetas = np.asarray(thetas, dtype=float)
    rays = len(thetas)
    direction = np.exp(1j * thetas)
    z0 = jet.z0
    coefs = [None if a.is_constant and complex(a.evaluate(0)) == 0 else a
             for a in ode.coefficients]

    y = np.tile(np.asarray(jet.values, dtype=complex)[:, None], (1, rays))
    scale = np.zeros(rays)
    norm0 = np.max(np.abs(y), axis=0)
    if np.any(norm0 == 0):
        raise InputError("the zero jet gives the trivial solution")
    y = y / norm0
    scale += np.log(norm0)
    s = np.zeros(rays)
    nxt = np.zeros(rays, dtype=int)        # next radius index to record, per ray
    G = len(radii)
    logf = np.full((G, rays), np.nan)
    argf = np.full((G, rays), np.nan)
    logdf = np.full((G, rays), np.nan)
    argdf = np.full((G, rays), np.nan)
    s_end = radii[-1]
    steps = 0
    worst = 0.0

    def record(mask, c, w_local):
        rows = nxt[mask]
        cols = np.nonzero(mask)[0]
        fv = _eval_series(c[:, mask], w_local)
        dfv = _eval_series(c[:, mask], w_local, 1) if n >= 1 else np.zeros_like(fv)
        with np.errstate(divide="ignore"):
            logf[rows, cols] = np.log(np.abs(fv)) + scale[mask]
            logdf[rows, cols] = np.log(np.abs(dfv)) + scale[mask]
        argf[rows, cols] = np.angle(fv)
        argdf[rows, cols] = np.angle(dfv)

    # radii at distance 0 are the initial jet itself
    while True:
        at0 = (nxt < G) & (radii[np.minimum(nxt, G - 1)] == 0)
        if not np.any(at0):
            break
        with np.errstate(divide="ignore"):
            logf[nxt[at0], np.nonzero(at0)[0]] = np.log(np.abs(y[0, at0])) + scale[at0]
            logdf[nxt[at0], np.nonzero(at0)[0]] = np.log(np.abs(y[1 % n, at0])) + scale[at0]
        argf[nxt[at0], np.nonzero(at0)[0]] = np.angle(y[0, at0])
        argdf[nxt[at0], np.nonzero(at0)[0]] = np.angle(y[1 % n, at0])
        nxt[at0] += 1

    while np.any(s < s_end):
        steps += 1
        if steps > max_steps:
            raise StepUnderflow("step budget exhausted before reaching the last radius")
        z = z0 + s * direction
        series = [None if a is None else a.taylor(z, order) for a in coefs]
        c = _solution_series(series, y, order)
        # scale series by powers of the direction so that t is the real step
        pw = direction[None, :] ** np.arange(order + 1)[:, None]
        ct = c * pw
        nrm = np.max(np.abs(ct[:n]), axis=0)
        nrm = np.where(nrm > 0, nrm, 1.0)
        h = np.full(rays, np.inf)
        for k in range(order - 5, order + 1):      # several terms: series may be sparse
            mag = np.abs(ct[k])
            with np.errstate(divide="ignore"):
                hk = np.where(mag > 0, (tol * nrm / mag) ** (1.0 / k), np.inf)
            h = np.minimum(h, hk)
        h = 0.9 * h
        live = s < s_end
        h = np.minimum(h, s_end - s)
        h = np.where(live, h, 0.0)
        tiny = live & (h < 1e-13 * np.maximum(1.0, np.abs(z)))
        if np.any(tiny):
            raise StepUnderflow(
                f"step underflow near z = {complex(z[np.argmax(tiny)]):.6g}")
        worst = max(worst, float(np.max(np.where(
            live, np.abs(ct[order]) * h ** order / nrm, 0.0))))
        s_new = s + h
        # dense output at every requested radius inside the step
        while True:
            pending = live & (nxt < G)
            target = np.where(pending, radii[np.minimum(nxt, G - 1)], np.inf)
            hit = pending & (target <= s_new * (1 + 1e-15))
            if not np.any(hit):
                break
            w_local = (target[hit] - s[hit]) * direction[hit]
            record(hit, c, w_local)
            nxt[hit] += 1
        w = h * direction
        y_new = np.stack([_eval_series(c, w, j) for j in range(n)])
        mx = np.max(np.abs(y_new), axis=0)
        mx = np.where(mx > 0, mx, 1.0)
        y = np.where(live[None, :], y_new / mx, y)
        scale = np.where(live, scale + np.log(mx), scale)
        s = np.where(live, s_new, s)

    return NumericSolution(ode, jet, thetas, radii, logf, argf, logdf, argdf,
                           meta={"steps": steps, "order": order, "tol": tol,
                                 "max_local_error": worst})


def integrate_ray(ode: LinearODE, jet: Jet, theta: float, r_max: float, tol: float = 1e-12,
                  points=None, order: int = DEFAULT_ORDER) -> NumericSolution:
    """Integrate along the single ray z0 + s e^{i theta}, 0 <= s <= r_max."""
    if points is None:
        points = np.linspace(0.0, r_max, 201)
    return integrate_fan(ode, jet, points, tol=tol, order=order, thetas=[theta])


def integrate_base(ode: LinearODE, radii, n_rays: int = 512, tol: float = 1e-12,
                   jets=None) -> list[NumericSolution]:
    """Fans for the given jets, or for the canonical base e_1, ..., e_n at 0."""
    if jets is None:
        jets = [Jet(tuple(1.0 if i == k else 0.0 for i in range(ode.order)), 0j)
                for k in range(ode.order)]
    return [integrate_fan(ode, j, radii, n_rays=n_rays, tol=tol) for j in jets]

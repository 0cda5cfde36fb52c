"""Finite unions of half-open intervals [a, b) and their density proxies."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from ..errors import InputError

LOG_TEN = math.log(10.0)


class IntervalUnion:
    """Disjoint, sorted union of half-open intervals [a, b) with 0 <= a < b."""

    __slots__ = ("_a", "_b")

    def __init__(self, intervals=()):
        pairs = [(float(a), float(b)) for a, b in intervals]
        for a, b in pairs:
            if a < 0 or not (b >= a) or math.isnan(a) or math.isnan(b):
                raise InputError(f"bad interval [{a}, {b})")
        pairs = sorted(p for p in pairs if p[1] > p[0])
        merged: list[list[float]] = []
        for a, b in pairs:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        self._a = np.array([p[0] for p in merged], dtype=float)
        self._b = np.array([p[1] for p in merged], dtype=float)

    # --- construction ------------------------------------------------------
    @classmethod
    def from_arrays(cls, starts, ends) -> "IntervalUnion":
        return cls(zip(np.asarray(starts, dtype=float), np.asarray(ends, dtype=float)))

    @classmethod
    def from_mask(cls, radii, mask) -> "IntervalUnion":
        """Cells around flagged grid radii; cell edges sit halfway between points."""
        r = np.asarray(radii, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if len(r) == 0 or not mask.any():
            return cls()
        if len(r) == 1:
            return cls([(r[0], r[0])])
        mids = 0.5 * (r[:-1] + r[1:])
        lo = np.concatenate([[r[0]], mids])
        hi = np.concatenate([mids, [r[-1]]])
        return cls.from_arrays(lo[mask], hi[mask])

    @classmethod
    def from_json(cls, text: str) -> "IntervalUnion":
        data = json.loads(text)
        if not isinstance(data, list):
            raise InputError("interval JSON must be an array of [a, b) pairs")
        return cls(tuple(p) for p in data)

    # --- queries -------------------------------------------------------------
    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self._a.tolist(), self._b.tolist()))

    @property
    def starts(self) -> np.ndarray:
        return self._a.copy()

    @property
    def ends(self) -> np.ndarray:
        return self._b.copy()

    def __len__(self):
        return len(self._a)

    def __bool__(self):
        return len(self._a) > 0

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other):
        return (isinstance(other, IntervalUnion) and np.array_equal(self._a, other._a)
                and np.array_equal(self._b, other._b))

    def __repr__(self):
        return f"IntervalUnion({self.intervals!r})"

    def __contains__(self, x) -> bool:
        i = np.searchsorted(self._a, x, side="right") - 1
        return bool(i >= 0 and x < self._b[i])

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    __or__ = union

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        i = j = 0
        while i < len(self._a) and j < len(other._a):
            a = max(self._a[i], other._a[j])
            b = min(self._b[i], other._b[j])
            if a < b:
                out.append((a, b))
            if self._b[i] < other._b[j]:
                i += 1
            else:
                j += 1
        return IntervalUnion(out)

    __and__ = intersection

    def clip(self, lo: float, hi: float) -> "IntervalUnion":
        return self.intersection(IntervalUnion([(lo, hi)]))

    def complement(self, lo: float, hi: float) -> "IntervalUnion":
        """[lo, hi) minus the union."""
        cut = self.clip(lo, hi)
        edges = [lo] + [x for ab in cut.intervals for x in ab] + [hi]
        return IntervalUnion((edges[k], edges[k + 1]) for k in range(0, len(edges), 2))

    def measure(self, lo: float = 0.0, hi: float = math.inf) -> float:
        """Linear measure of the part inside [lo, hi)."""
        a = np.clip(self._a, lo, hi)
        b = np.clip(self._b, lo, hi)
        return float(np.sum(b - a))

    def log_measure(self, lo: float = 1.0, hi: float = math.inf) -> float:
        """Integral of dt/t over the part inside [max(lo, 1), hi)."""
        lo = max(lo, 1.0)
        if hi <= lo:
            return 0.0
        a = np.clip(self._a, lo, hi)
        b = np.clip(self._b, lo, hi)
        keep = b > a
        return float(np.sum(np.log(b[keep] / a[keep])))

    def weighted_measure(self, weight, lo: float, hi: float, nodes: int = 16) -> float:
        """Integral of weight(t) dt over the part inside [lo, hi) (Gauss-Legendre)."""
        cut = self.clip(lo, hi)
        if not cut:
            return 0.0
        x, w = np.polynomial.legendre.leggauss(nodes)
        total = 0.0
        for a, b in cut.intervals:
            # split long pieces so the rule stays accurate for slowly varying weights
            pieces = max(1, int(math.ceil(math.log2(max(b / max(a, 1e-300), 2.0)))) * 4)
            edges = np.linspace(a, b, pieces + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * (edges[1:] - edges[:-1])
            t = mid[:, None] + half[:, None] * x[None, :]
            total += float(np.sum(half[:, None] * w[None, :] * np.asarray(weight(t), dtype=float)))
        return total

    # cumulative measures at many points, vectorised
    def measure_upto(self, x) -> np.ndarray:
        """|E ∩ [0, x)| for each x."""
        x = np.asarray(x, dtype=float)
        lengths = np.concatenate([[0.0], np.cumsum(self._b - self._a)])
        i = np.searchsorted(self._a, x, side="right")       # intervals starting before x
        full = lengths[np.maximum(i - 1, 0)]
        last_a = self._a[np.maximum(i - 1, 0)] if len(self._a) else np.zeros_like(x)
        last_b = self._b[np.maximum(i - 1, 0)] if len(self._b) else np.zeros_like(x)
        partial = np.where(i > 0, np.minimum(x, last_b) - last_a, 0.0)
        return np.where(i > 0, full + partial, 0.0)

    def log_measure_upto(self, x) -> np.ndarray:
        """Integral of dt/t over E ∩ [1, x) for each x."""
        x = np.asarray(x, dtype=float)
        part = self.clip(1.0, math.inf)
        a, b = part._a, part._b
        lengths = np.concatenate([[0.0], np.cumsum(np.log(b / a))]) if len(a) else np.zeros(1)
        i = np.searchsorted(a, x, side="right")
        safe = np.maximum(i - 1, 0)
        if not len(a):
            return np.zeros_like(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            partial = np.where(i > 0, np.log(np.maximum(np.minimum(x, b[safe]), a[safe]) / a[safe]),
                               0.0)
        return np.where(i > 0, lengths[safe] + partial, 0.0)

    # --- serialisation ---------------------------------------------------------
    def to_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self.intervals]

    def to_json(self) -> str:
        return json.dumps(self.to_list())


@dataclass
class DensityReport:
    """Measures and upper-density proxies of a set, evaluated up to a horizon R.

    ``upper_linear_density`` and ``upper_log_density`` are suprema over
    r in [R/10, R] of the one-decade window quotients

        |E ∩ [r/10, r)| / (0.9 r)      and      (1/log 10) ∫_{E ∩ [r/10, r)} dt/t,

    which discard the initial segment of E.  The cumulative quotients
    |E ∩ [0, r)| / r and ∫_{E ∩ [1, r)} dt/t / log r are reported alongside.
    """

    R: float
    linear_measure: float
    log_measure: float
    upper_linear_density: float
    upper_log_density: float
    cumulative_linear_density: float
    cumulative_log_density: float

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "window": [self.R / 10.0, self.R],
            "linear_measure": self.linear_measure,
            "log_measure": self.log_measure,
            "upper_linear_density": self.upper_linear_density,
            "upper_log_density": self.upper_log_density,
            "cumulative_linear_density": self.cumulative_linear_density,
            "cumulative_log_density": self.cumulative_log_density,
        }


def _candidates(E: IntervalUnion, lo: float, hi: float) -> np.ndarray:
    """Points where a window quotient can attain its sup over [lo, hi].

    Between consecutive candidates every numerator is affine in r (or in
    log r) and so each quotient is monotone there.
    """
    pts = [np.array([lo, hi])]
    for edges in (E.starts, E.ends):
        pts.append(edges)
        pts.append(10.0 * edges)
    c = np.concatenate(pts)
    return np.unique(c[(c >= lo) & (c <= hi)])


def measures(E: IntervalUnion, R: float) -> DensityReport:
    if not R > 0:
        raise InputError("horizon R must be positive")
    lo = R / 10.0
    r = _candidates(E, lo, R)
    lin_win = (E.measure_upto(r) - E.measure_upto(r / 10.0)) / (0.9 * r)
    log_win = (E.log_measure_upto(r) - E.log_measure_upto(r / 10.0)) / LOG_TEN
    lin_cum = E.measure_upto(r) / r
    with np.errstate(divide="ignore", invalid="ignore"):
        log_cum = np.where(r > 1, E.log_measure_upto(r) / np.log(r), 0.0)
    clamp = lambda v: float(min(1.0, max(0.0, np.max(v))))   # noqa: E731  roundoff guard
    return DensityReport(
        R=float(R),
        linear_measure=E.measure(0.0, R),
        log_measure=E.log_measure(1.0, R),
        upper_linear_density=clamp(lin_win),
        upper_log_density=clamp(log_win) if R > 1 else 0.0,
        cumulative_linear_density=clamp(lin_cum),
        cumulative_log_density=clamp(log_cum),
    )


# ---------------------------------------------------------------------------
# generators


def comb(period: float, width: float, R: float, start: float | None = None) -> IntervalUnion:
    """Union of [s + k*period, s + k*period + width) up to R (s defaults to period)."""
    if period <= 0 or width < 0:
        raise InputError("comb needs period > 0 and width >= 0")
    s = period if start is None else start
    k = np.arange(0, int(math.floor((R - s) / period)) + 1)
    a = s + k * period
    return IntervalUnion.from_arrays(a, np.minimum(a + min(width, period), R))


def decay(base: float, R: float) -> IntervalUnion:
    """Union of [n, n + base**-n) for n = 1, 2, ... up to R."""
    if base <= 1:
        raise InputError("decay base must exceed 1")
    n = np.arange(1, int(math.floor(R)) + 1, dtype=float)
    with np.errstate(over="ignore"):
        w = np.power(float(base), -n)
    keep = w > 0
    return IntervalUnion.from_arrays(n[keep], n[keep] + w[keep])


def parse_generator(spec: str, R: float) -> IntervalUnion:
    """'comb <period> <width>', 'decay <b>^-n', 'interval <a> <b>' or 'empty'."""
    words = spec.split()
    if not words:
        raise InputError("empty generator spec")
    kind = words[0].lower()
    try:
        if kind == "comb" and len(words) == 3:
            return comb(float(words[1]), float(words[2]), R)
        if kind == "decay" and len(words) == 2:
            m = re.fullmatch(r"([0-9.]+)\^-n", words[1])
            if not m:
                raise InputError("decay expects '<base>^-n', e.g. 'decay 2^-n'")
            return decay(float(m.group(1)), R)
        if kind == "interval" and len(words) == 3:
            return IntervalUnion([(float(words[1]), float(words[2]))])
        if kind == "empty" and len(words) == 1:
            return IntervalUnion()
    except ValueError as exc:
        raise InputError(f"bad generator spec {spec!r}: {exc}") from exc
    raise InputError(f"unknown generator spec {spec!r}")

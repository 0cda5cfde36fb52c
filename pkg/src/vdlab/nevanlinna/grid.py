"""Radius grids and sampled growth curves, with CSV/JSON serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError

INF = math.inf


def is_infinity(a) -> bool:
    if a is None:
        return True
    if isinstance(a, str):
        return a.strip().lower() in ("inf", "infinity", "oo", "∞")
    try:
        return math.isinf(abs(complex(a)))
    except (TypeError, ValueError):
        return False


def normalize_target(a):
    """Map user targets onto ``math.inf`` or a Python complex."""
    if is_infinity(a):
        return INF
    if isinstance(a, str):
        from ..expr import parse

        f = parse(a)
        if not f.is_constant:
            raise InputError(f"target {a!r} is not a constant")
        return complex(f.evaluate(0))
    return complex(a)


def target_label(a) -> str:
    a = normalize_target(a)
    if a == INF:
        return "inf"
    if a.imag == 0:
        return repr(a.real)
    return f"{a.real!r}{a.imag:+}i"


@dataclass(frozen=True)
class RadiusGrid:
    radii: tuple
    spacing: str = "geometric"

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or len(r) == 0:
            raise InputError("a radius grid needs at least one radius")
        if np.any(r <= 0):
            raise InputError("radii must be positive")
        if np.any(np.diff(r) <= 0):
            raise InputError("radii must be strictly increasing")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))

    @classmethod
    def geometric(cls, r_min=1.0, r_max=50.0, per_decade=200) -> "RadiusGrid":
        if not (0 < r_min < r_max):
            raise InputError("need 0 < r_min < r_max")
        n = max(2, int(math.ceil(per_decade * math.log10(r_max / r_min))) + 1)
        return cls(tuple(np.geomspace(r_min, r_max, n)), "geometric")

    @classmethod
    def linear(cls, r_min=1.0, r_max=50.0, n=200) -> "RadiusGrid":
        if not (0 < r_min < r_max):
            raise InputError("need 0 < r_min < r_max")
        return cls(tuple(np.linspace(r_min, r_max, int(n))), "linear")

    @classmethod
    def from_points(cls, radii) -> "RadiusGrid":
        return cls(tuple(radii), "explicit")

    @property
    def r(self) -> np.ndarray:
        return np.asarray(self.radii)

    def __len__(self):
        return len(self.radii)

    @property
    def r_min(self) -> float:
        return self.radii[0]

    @property
    def r_max(self) -> float:
        return self.radii[-1]

    def refined(self) -> "RadiusGrid":
        """Same span with doubled point density (old points kept)."""
        r = self.r
        if self.spacing == "geometric":
            mids = np.sqrt(r[:-1] * r[1:])
        else:
            mids = 0.5 * (r[:-1] + r[1:])
        out = np.empty(2 * len(r) - 1)
        out[0::2] = r
        out[1::2] = mids
        return RadiusGrid(tuple(out), self.spacing)

    def truncated(self, r_max: float) -> "RadiusGrid":
        r = self.r[self.r <= r_max]
        return RadiusGrid(tuple(r), self.spacing)

    def tail_indices(self, fraction: float) -> np.ndarray:
        if not (0 < fraction < 1):
            raise InputError("tail fraction must lie in (0, 1)")
        n = len(self.radii)
        k = max(1, int(math.ceil(fraction * n)))
        return np.arange(n - k, n)

    def to_dict(self) -> dict:
        return {"spacing": self.spacing, "radii": list(self.radii)}


@dataclass
class GrowthCurve:
    """A functional sampled on a radius grid (values in nats)."""

    grid: RadiusGrid
    values: np.ndarray
    label: str
    target: object = INF
    flags: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.grid),):
            raise ValueError("values must match the grid")
        if self.flags is None:
            self.flags = np.ones(len(self.grid), dtype=bool)
        self.flags = np.asarray(self.flags, dtype=bool)

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    @property
    def accurate(self) -> bool:
        return bool(np.all(self.flags))

    def ratio(self, other: "GrowthCurve", label: str | None = None) -> "GrowthCurve":
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self.values / other.values
        return GrowthCurve(
            self.grid, v, label or f"{self.label}/{other.label}", self.target,
            self.flags & other.flags,
        )

    def tail(self, fraction: float) -> np.ndarray:
        return self.values[self.grid.tail_indices(fraction)]

    # --- serialisation -----------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "value", "label", "accuracy_flag"])
        label = f"{self.label}[{target_label(self.target)}]"
        for r, v, ok in zip(self.grid.radii, self.values, self.flags):
            w.writerow([repr(float(r)), repr(float(v)), label, "ok" if ok else "unconverged"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "target": target_label(self.target),
            "grid": self.grid.to_dict(),
            "values": [float(v) for v in self.values],
            "accuracy_flags": ["ok" if ok else "unconverged" for ok in self.flags],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthCurve":
        grid = RadiusGrid(tuple(d["grid"]["radii"]), d["grid"].get("spacing", "explicit"))
        flags = [f == "ok" for f in d.get("accuracy_flags", ["ok"] * len(grid))]
        return cls(grid, np.array(d["values"]), d["label"], normalize_target(d["target"]),
                   np.array(flags), dict(d.get("meta", {})))

    @classmethod
    def from_csv(cls, text: str) -> "GrowthCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        grid = RadiusGrid.from_points(float(row["r"]) for row in rows)
        raw = rows[0]["label"]
        label, _, tgt = raw.partition("[")
        return cls(grid, np.array([float(row["value"]) for row in rows]), label,
                   normalize_target(tgt.rstrip("]") or "inf"),
                   np.array([row["accuracy_flag"] == "ok" for row in rows]))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON used for every document the package emits."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True)

"""Run configuration shared by the command-line verbs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import InputError
from .nevanlinna import CircleQuadrature, RadiusGrid

MIN_RADIUS = 0.1


@dataclass(frozen=True)
class RunConfig:
    r_min: float = 1.0
    r_max: float = 50.0
    per_decade: int = 200
    spacing: str = "geometric"
    rtol: float = 1e-10
    atol: float = 1e-12
    tail_fraction: float = 0.25
    m: float = 1.5
    out: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.r_min < MIN_RADIUS:
            raise InputError(f"r_min must be at least {MIN_RADIUS}")
        if not self.r_max > self.r_min:
            raise InputError("r_max must exceed r_min")
        if self.per_decade < 1:
            raise InputError("points per decade must be positive")
        if self.spacing not in ("geometric", "linear"):
            raise InputError("spacing is 'geometric' or 'linear'")
        if not (self.rtol > 0 and self.atol > 0):
            raise InputError("tolerances must be positive")
        if not 0 < self.tail_fraction < 1:
            raise InputError("tail fraction must lie in (0, 1)")
        if not self.m > 1:
            raise InputError("the log-power exponent m must exceed 1")

    @classmethod
    def parse_grid(cls, text: str) -> dict:
        """'r_min:r_max[:points_per_decade[:spacing]]' -> keyword arguments."""
        parts = text.split(":")
        if not 2 <= len(parts) <= 4:
            raise InputError(f"grid spec {text!r} is not r_min:r_max[:per_decade[:spacing]]")
        try:
            out = {"r_min": float(parts[0]), "r_max": float(parts[1])}
            if len(parts) > 2 and parts[2]:
                out["per_decade"] = int(parts[2])
        except ValueError as exc:
            raise InputError(f"bad grid spec {text!r}: {exc}") from exc
        if len(parts) > 3:
            out["spacing"] = parts[3]
        return out

    @property
    def grid(self) -> RadiusGrid:
        if self.spacing == "geometric":
            return RadiusGrid.geometric(self.r_min, self.r_max, self.per_decade)
        # linear grids keep the point count the geometric one would have
        n = max(2, int(math.ceil(self.per_decade * math.log10(self.r_max / self.r_min))) + 1)
        return RadiusGrid.linear(self.r_min, self.r_max, n)

    @property
    def quad(self) -> CircleQuadrature:
        return CircleQuadrature(rtol=self.rtol, atol=self.atol)

    def to_dict(self) -> dict:
        return asdict(self)

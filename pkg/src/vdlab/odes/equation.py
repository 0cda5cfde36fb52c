"""Linear differential equations f^(n) + A_{n-1} f^(n-1) + ... + A_0 f = 0.

Equation files are line oriented::

    # comment
    param P: z^2 + 1          named polynomial usable in later lines
    order: 2
    A0: -2*P*exp(z)
    A1: P*exp(z) + P*exp(-z) - 2
    solution: exp(2z) + 1
    jet: 1, 0 @ 0             initial values f(z0), f'(z0), ...

Coefficients that are not listed are zero.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, ParseError
from ..expr import ZERO, ComplexFunc, LogComplex, logsum, parse


@dataclass(frozen=True)
class Jet:
    """Initial values (f, f', ..., f^(n-1)) at ``z0``."""

    values: tuple
    z0: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        object.__setattr__(self, "z0", complex(self.z0))

    @classmethod
    def of(cls, f: ComplexFunc, n: int, z0=0j) -> "Jet":
        """Jet of an expression at z0 (used to cross-check integration)."""
        vals, g = [], f
        for _ in range(n):
            vals.append(complex(g.evaluate(z0)))
            g = g.diff()
        return cls(tuple(vals), z0)


@dataclass
class LinearODE:
    coefficients: tuple                  # A_0, ..., A_{n-1}
    solutions: tuple = ()
    jets: tuple = ()
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.coefficients = tuple(self.coefficients)
        if not self.coefficients:
            raise InputError("an equation needs order >= 1")
        self.solutions = tuple(self.solutions)
        self.jets = tuple(self.jets)
        for jet in self.jets:
            if len(jet.values) != self.order:
                raise InputError(f"jet has {len(jet.values)} values, order is {self.order}")

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def entire_coefficients(self) -> bool:
        return all(a.is_entire for a in self.coefficients)

    @property
    def polynomial_coefficients(self) -> bool:
        return all(a.is_polynomial for a in self.coefficients)

    @property
    def transcendental_coefficients(self) -> list[int]:
        return [j for j, a in enumerate(self.coefficients) if a.is_transcendental]

    def terms(self, f: ComplexFunc, z) -> list[LogComplex]:
        """Log-domain values of f^(n) and A_j f^(j), j < n."""
        derivs = [f]
        for _ in range(self.order):
            derivs.append(derivs[-1].diff())
        out = [derivs[-1].eval_log(z)]
        for j, a in enumerate(self.coefficients):
            if a == ZERO:
                continue
            out.append(a.eval_log(z) * derivs[j].eval_log(z))
        return out

    # --- parsing -------------------------------------------------------------
    @classmethod
    def from_text(cls, text: str, name: str = "") -> "LinearODE":
        params: dict = {}
        coeffs: dict = {}
        solutions, jets = [], []
        order = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            if not sep:
                raise InputError(f"line {lineno}: expected 'key: value', got {raw!r}")
            key, value = key.strip(), value.strip()
            try:
                if key == "order":
                    order = int(value)
                    if order < 1:
                        raise InputError(f"line {lineno}: order must be >= 1")
                elif key.startswith("param "):
                    pname = key[len("param "):].strip()
                    expr = parse(value, params)
                    if not expr.is_polynomial:
                        raise InputError(f"line {lineno}: parameter {pname} must be a polynomial")
                    params[pname] = expr
                elif re.fullmatch(r"A\d+", key):
                    coeffs[int(key[1:])] = parse(value, params)
                elif key == "solution":
                    solutions.append(parse(value, params))
                elif key == "jet":
                    jets.append(_parse_jet(value, params))
                else:
                    raise InputError(f"line {lineno}: unknown key {key!r}")
            except ParseError as exc:
                raise ParseError(f"line {lineno}: {exc.message}", exc.position, exc.text) from exc
        if order is None:
            raise InputError("equation file lacks an 'order:' line")
        extra = [j for j in coeffs if j >= order]
        if extra:
            raise InputError(f"coefficient A{extra[0]} exceeds order {order}")
        return cls(tuple(coeffs.get(j, ZERO) for j in range(order)),
                   tuple(solutions), tuple(jets), params, name)

    @classmethod
    def from_file(cls, path) -> "LinearODE":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), name=str(path))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "order": self.order,
            "coefficients": {f"A{j}": str(a) for j, a in enumerate(self.coefficients)},
            "solutions": [str(s) for s in self.solutions],
            "jets": [{"values": [[v.real, v.imag] for v in j.values],
                      "z0": [j.z0.real, j.z0.imag]} for j in self.jets],
        }


def _parse_jet(value: str, params) -> Jet:
    vals, at, z0 = value.partition("@")
    if not at:
        z0 = "0"
    out = []
    for piece in vals.split(","):
        c = parse(piece.strip(), params)
        if not c.is_constant:
            raise InputError(f"jet entry {piece.strip()!r} is not a constant")
        out.append(complex(c.evaluate(0)))
    z = parse(z0.strip(), params)
    if not z.is_constant:
        raise InputError("jet anchor must be a constant")
    return Jet(tuple(out), complex(z.evaluate(0)))


def residual(ode: LinearODE, f: ComplexFunc, samples) -> float:
    """Largest log relative residual over ``samples``.

    At each point the terms f^(n), A_j f^(j) are summed in the log domain
    and the log-modulus of the sum is compared with the largest term; a
    value <= log(1e-9) means the terms cancel to nine digits.
    """
    z = np.atleast_1d(np.asarray(samples, dtype=complex))
    terms = ode.terms(f, z)
    total = logsum(terms)
    biggest = np.max(np.stack([np.broadcast_to(t.logmod, z.shape) for t in terms]), axis=0)
    with np.errstate(invalid="ignore"):
        rel = np.asarray(total.logmod) - biggest
    rel = np.where(biggest == -np.inf, -np.inf, rel)     # f vanishes to all orders
    return float(np.max(rel))


def disc_samples(n: int, radius: float, seed: int) -> np.ndarray:
    """``n`` seeded points uniformly distributed in |z| <= radius."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    t = 2 * np.pi * rng.random(n)
    return r * np.exp(1j * t)

"""Expression trees for entire and meromorphic functions of z.

Nodes are immutable; build them with the module-level constructors
(``add``, ``mul``, ``div``, ``power``, ``exp``, ``poly``) or with the
arithmetic operators, which apply a few local simplification rules.
Three evaluation routes exist:

* ``evaluate``  -- plain complex arithmetic (overflows where the value does),
* ``eval_log``  -- log-domain evaluation, total for values like exp(e^50),
* ``taylor``    -- truncated power series at a point (Taylor-mode AD).

Every route memoises on node identity, so the shared subtrees produced by
``diff`` are evaluated once per call.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import NotMeromorphic, PoleHit, Undefined
from .logcomplex import LogComplex, logsum, wrap_angle

# exp(w) with Re(w) beyond this cannot be decoded, but its log can
_MAX_EXP_LOGMOD = 709.0


class ComplexFunc:
    """Base class of all expression nodes."""

    # --- operators -------------------------------------------------------
    def __add__(self, other):
        return add(self, as_func(other))

    def __radd__(self, other):
        return add(as_func(other), self)

    def __sub__(self, other):
        return add(self, neg(as_func(other)))

    def __rsub__(self, other):
        return add(as_func(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_func(other))

    def __rmul__(self, other):
        return mul(as_func(other), self)

    def __truediv__(self, other):
        return div(self, as_func(other))

    def __rtruediv__(self, other):
        return div(as_func(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        return power(self, int(n))

    # --- public evaluation ------------------------------------------------
    def evaluate(self, z):
        """Naive complex evaluation (vectorised over ``z``)."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = self._eval(z, {})
        out = np.broadcast_to(out, z.shape).astype(complex)
        return out if out.ndim else complex(out)

    __call__ = evaluate

    def eval_log(self, z) -> LogComplex:
        """Log-domain value at ``z``; raises PoleHit where a denominator vanishes."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = self._log(z, {})
        lm = np.broadcast_to(np.asarray(out.logmod, dtype=float), z.shape)
        ar = np.broadcast_to(np.asarray(out.arg, dtype=float), z.shape)
        if lm.ndim == 0:
            return LogComplex(float(lm), float(ar))
        return LogComplex(lm.copy(), ar.copy())

    def taylor(self, z0, order: int):
        """Coefficients c[k] of f(z0 + t) = sum c[k] t^k, k = 0..order.

        Returns an array of shape ``(order + 1,) + shape(z0)``.
        """
        z0 = np.asarray(z0, dtype=complex)
        with np.errstate(all="ignore"):
            out = self._taylor(z0, order, {})
        return np.broadcast_to(out, (order + 1,) + z0.shape).copy()

    def diff(self) -> "ComplexFunc":
        raise NotImplementedError

    def nth_diff(self, k: int) -> "ComplexFunc":
        f = self
        for _ in range(k):
            f = f.diff()
        return f

    # --- structure ----------------------------------------------------------
    @cached_property
    def split(self) -> tuple["ComplexFunc", "ComplexFunc"]:
        """(g, h), both entire, with self == g / h."""
        return self._split()

    @property
    def is_entire(self) -> bool:
        return isinstance(self.split[1], Const)

    @property
    def is_constant(self) -> bool:
        return not any(isinstance(n, Var) for n in self.walk())

    @property
    def is_polynomial(self) -> bool:
        for n in self.walk():
            if isinstance(n, Exp) and not n.arg.is_constant:
                return False
            if isinstance(n, Div) and not n.den.is_constant:
                return False
            if isinstance(n, Pow) and n.n < 0 and not n.base.is_constant:
                return False
        return True

    @property
    def is_transcendental(self) -> bool:
        """Structural test: some exp(.) of a non-constant argument survives."""
        return any(isinstance(n, Exp) and not n.arg.is_constant for n in self.walk())

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def children(self):
        return ()

    # --- memoised internals -------------------------------------------------
    def _eval(self, z, memo):
        key = ("value", id(self))        # distinct from the log-domain entries
        if key not in memo:
            memo[key] = self._eval_impl(z, memo)
        return memo[key]

    def _log(self, z, memo):
        key = id(self)
        if key not in memo:
            memo[key] = self._log_impl(z, memo)
        return memo[key]

    def _taylor(self, z0, order, memo):
        key = id(self)
        if key not in memo:
            memo[key] = self._taylor_impl(z0, order, memo)
        return memo[key]


# ---------------------------------------------------------------------------
# series helpers


def _series_mul(a, b):
    order = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for k in range(order + 1):
        out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return out


def _series_div(a, b):
    order = a.shape[0] - 1
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=complex)
    a = np.broadcast_to(a, shape)
    b = np.broadcast_to(b, shape)
    for k in range(order + 1):
        acc = a[k] - np.sum(out[:k] * b[k:0:-1], axis=0) if k else a[0]
        out[k] = acc / b[0]
    return out


def _series_exp(u):
    order = u.shape[0] - 1
    w = np.zeros(u.shape, dtype=complex)
    w[0] = np.exp(u[0])
    j = np.arange(1, order + 1).reshape((-1,) + (1,) * (u.ndim - 1))
    for k in range(1, order + 1):
        w[k] = np.sum(j[:k] * u[1 : k + 1] * w[k - 1 :: -1][:k], axis=0) / k
    return w


def _series_const(c, order, shape):
    out = np.zeros((order + 1,) + shape, dtype=complex)
    out[0] = c
    return out


# ---------------------------------------------------------------------------
# node types


@dataclass(frozen=True, eq=True)
class Const(ComplexFunc):
    value: complex

    def diff(self):
        return ZERO

    def _eval_impl(self, z, memo):
        return np.full(z.shape, self.value, dtype=complex)

    def _log_impl(self, z, memo):
        lc = LogComplex.from_complex(self.value)
        return LogComplex(np.full(z.shape, lc.logmod), np.full(z.shape, lc.arg))

    def _taylor_impl(self, z0, order, memo):
        return _series_const(self.value, order, z0.shape)

    def _split(self):
        return self, ONE

    def __str__(self):
        return _fmt_complex(self.value)


@dataclass(frozen=True, eq=True)
class Var(ComplexFunc):
    def diff(self):
        return ONE

    def _eval_impl(self, z, memo):
        return z

    def _log_impl(self, z, memo):
        return LogComplex.from_complex(z)

    def _taylor_impl(self, z0, order, memo):
        out = _series_const(0, order, z0.shape)
        out[0] = z0
        if order >= 1:
            out[1] = 1.0
        return out

    def _split(self):
        return self, ONE

    def __str__(self):
        return "z"


@dataclass(frozen=True, eq=True)
class Add(ComplexFunc):
    terms: tuple

    def children(self):
        return self.terms

    def diff(self):
        return add(*(t.diff() for t in self.terms))

    def _eval_impl(self, z, memo):
        return sum(t._eval(z, memo) for t in self.terms)

    def _log_impl(self, z, memo):
        return logsum([t._log(z, memo) for t in self.terms])

    def _taylor_impl(self, z0, order, memo):
        return sum(t._taylor(z0, order, memo) for t in self.terms)

    def _split(self):
        g, h = self.terms[0].split
        for t in self.terms[1:]:
            g2, h2 = t.split
            if h2 == h:
                g = add(g, g2)
            else:
                g, h = add(mul(g, h2), mul(g2, h)), mul(h, h2)
        return g, h

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")"


@dataclass(frozen=True, eq=True)
class Mul(ComplexFunc):
    factors: tuple

    def children(self):
        return self.factors

    def diff(self):
        parts = []
        for i, f in enumerate(self.factors):
            d = f.diff()
            if d == ZERO:
                continue
            others = self.factors[:i] + self.factors[i + 1 :]
            parts.append(mul(d, *others))
        return add(*parts)

    def _eval_impl(self, z, memo):
        out = self.factors[0]._eval(z, memo)
        for f in self.factors[1:]:
            out = out * f._eval(z, memo)
        return out

    def _log_impl(self, z, memo):
        out = self.factors[0]._log(z, memo)
        for f in self.factors[1:]:
            out = out * f._log(z, memo)
        return out

    def _taylor_impl(self, z0, order, memo):
        out = self.factors[0]._taylor(z0, order, memo)
        for f in self.factors[1:]:
            out = _series_mul(out, f._taylor(z0, order, memo))
        return out

    def _split(self):
        gs, hs = zip(*(f.split for f in self.factors))
        return mul(*gs), mul(*hs)

    def __str__(self):
        return "*".join(_paren(f) for f in self.factors)


@dataclass(frozen=True, eq=True)
class Div(ComplexFunc):
    num: ComplexFunc
    den: ComplexFunc

    def children(self):
        return (self.num, self.den)

    def diff(self):
        top = add(mul(self.num.diff(), self.den), neg(mul(self.num, self.den.diff())))
        return div(top, power(self.den, 2))

    def _eval_impl(self, z, memo):
        return self.num._eval(z, memo) / self.den._eval(z, memo)

    def _log_impl(self, z, memo):
        d = self.den._log(z, memo)
        if np.any(np.asarray(d.logmod) == -np.inf):
            raise PoleHit(f"denominator {self.den} vanishes")
        return self.num._log(z, memo) / d

    def _taylor_impl(self, z0, order, memo):
        d = self.den._taylor(z0, order, memo)
        if np.any(d[0] == 0):
            raise PoleHit(f"denominator {self.den} vanishes")
        return _series_div(self.num._taylor(z0, order, memo), d)

    def _split(self):
        g1, h1 = self.num.split
        g2, h2 = self.den.split
        return mul(g1, h2), mul(h1, g2)

    def __str__(self):
        return f"{_paren(self.num)}/{_paren(self.den)}"


@dataclass(frozen=True, eq=True)
class Pow(ComplexFunc):
    base: ComplexFunc
    n: int

    def children(self):
        return (self.base,)

    def diff(self):
        return mul(Const(complex(self.n)), power(self.base, self.n - 1), self.base.diff())

    def _eval_impl(self, z, memo):
        return self.base._eval(z, memo) ** self.n

    def _log_impl(self, z, memo):
        b = self.base._log(z, memo)
        if self.n < 0 and np.any(np.asarray(b.logmod) == -np.inf):
            raise PoleHit(f"negative power of vanishing {self.base}")
        return b ** self.n

    def _taylor_impl(self, z0, order, memo):
        b = self.base._taylor(z0, order, memo)
        out = _series_const(1.0, order, z0.shape)
        for _ in range(abs(self.n)):
            out = _series_mul(out, b)
        if self.n < 0:
            if np.any(out[0] == 0):
                raise PoleHit(f"negative power of vanishing {self.base}")
            out = _series_div(_series_const(1.0, order, z0.shape), out)
        return out

    def _split(self):
        g, h = self.base.split
        if self.n >= 0:
            return power(g, self.n), power(h, self.n)
        return power(h, -self.n), power(g, -self.n)

    def __str__(self):
        return f"{_paren(self.base)}^{self.n}"


@dataclass(frozen=True, eq=True)
class Exp(ComplexFunc):
    arg: ComplexFunc

    def __post_init__(self):
        if not self.arg.is_entire:
            raise NotMeromorphic(
                f"exp({self.arg}) has an essential singularity at a pole of its argument"
            )

    def children(self):
        return (self.arg,)

    def diff(self):
        return mul(self, self.arg.diff())

    def _eval_impl(self, z, memo):
        return np.exp(self.arg._eval(z, memo))

    def _log_impl(self, z, memo):
        u = self.arg._log(z, memo)
        lm = np.asarray(u.logmod, dtype=float)
        if np.any(lm > _MAX_EXP_LOGMOD):
            raise Undefined("exp argument beyond double range; exponent tower too tall")
        mod = np.exp(lm)
        re = mod * np.cos(u.arg)
        im = mod * np.sin(u.arg)
        # where w itself is representable use it directly: decoding from
        # (log|w|, arg w) would cost a few ulps
        w = np.broadcast_to(self.arg._eval(z, memo), np.shape(re))
        direct = np.isfinite(w)
        re = np.where(direct, w.real, re)
        im = np.where(direct, w.imag, im)
        re = np.where(lm == -np.inf, 0.0, re)
        im = np.where(lm == -np.inf, 0.0, im)
        # log|exp(w)| = Re(w); exp(w) itself is never formed
        return LogComplex(re if re.ndim else float(re), wrap_angle(im))

    def _taylor_impl(self, z0, order, memo):
        return _series_exp(self.arg._taylor(z0, order, memo))

    def _split(self):
        return self, ONE

    def __str__(self):
        return f"exp({self.arg})"


@dataclass(frozen=True, eq=True)
class Poly(ComplexFunc):
    """sum(coeffs[k] * inner**k); coefficients in increasing degree."""

    coeffs: tuple
    inner: ComplexFunc

    def children(self):
        return (self.inner,)

    def diff(self):
        dc = tuple(k * c for k, c in enumerate(self.coeffs))[1:]
        return mul(poly(dc, self.inner), self.inner.diff())

    def _eval_impl(self, z, memo):
        u = self.inner._eval(z, memo)
        out = np.zeros(np.shape(u), dtype=complex) + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            out = out * u + c
        return out

    def _log_impl(self, z, memo):
        u = self.inner._log(z, memo)
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(LogComplex.from_complex(c) * (u ** k))
        return logsum(terms)

    def _taylor_impl(self, z0, order, memo):
        u = self.inner._taylor(z0, order, memo)
        out = _series_const(self.coeffs[-1], order, z0.shape)
        for c in reversed(self.coeffs[:-1]):
            out = _series_mul(out, u)
            out[0] = out[0] + c
        return out

    def _split(self):
        g, h = self.inner.split
        if isinstance(h, Const):
            return self, ONE
        d = len(self.coeffs) - 1
        terms = [
            mul(Const(c), power(g, k), power(h, d - k))
            for k, c in enumerate(self.coeffs)
            if c != 0
        ]
        return add(*terms), power(h, d)

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(_fmt_complex(c))
            elif k == 1:
                parts.append(f"{_fmt_complex(c)}*{_paren(self.inner)}")
            else:
                parts.append(f"{_fmt_complex(c)}*{_paren(self.inner)}^{k}")
        return "(" + " + ".join(parts) + ")" if parts else "0"


ZERO = Const(0j)
ONE = Const(1 + 0j)
Z = Var()


# ---------------------------------------------------------------------------
# simplifying constructors


def as_func(x) -> ComplexFunc:
    if isinstance(x, ComplexFunc):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return Const(complex(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def const(c) -> Const:
    return Const(complex(c))


def add(*terms) -> ComplexFunc:
    flat = []
    c = 0j
    for t in terms:
        t = as_func(t)
        items = t.terms if isinstance(t, Add) else (t,)
        for s in items:
            if isinstance(s, Const):
                c += s.value
            else:
                flat.append(s)
    if c != 0 or not flat:
        flat.append(Const(c))
    return flat[0] if len(flat) == 1 else Add(tuple(flat))


def mul(*factors) -> ComplexFunc:
    flat = []
    c = 1 + 0j
    for f in factors:
        f = as_func(f)
        items = f.factors if isinstance(f, Mul) else (f,)
        for s in items:
            if isinstance(s, Const):
                c *= s.value
            else:
                flat.append(s)
    if c == 0:
        return ZERO
    if c != 1 or not flat:
        flat.insert(0, Const(c))
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))


def neg(f) -> ComplexFunc:
    return mul(Const(-1 + 0j), f)


def div(num, den) -> ComplexFunc:
    num, den = as_func(num), as_func(den)
    if isinstance(den, Const):
        if den.value == 0:
            raise ZeroDivisionError("division by the zero constant")
        return mul(Const(1 / den.value), num)
    if num == ZERO:
        return ZERO
    return Div(num, den)


def power(base, n: int) -> ComplexFunc:
    base = as_func(base)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value ** n)
    if isinstance(base, Pow):
        return power(base.base, base.n * n)
    return Pow(base, int(n))


def exp(arg) -> ComplexFunc:
    arg = as_func(arg)
    if isinstance(arg, Const):
        return Const(complex(np.exp(arg.value)))
    return Exp(arg)


def poly(coeffs, inner=Z) -> ComplexFunc:
    """Polynomial in ``inner`` with coefficients in increasing degree."""
    cs = [complex(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    if not cs:
        return ZERO
    if len(cs) == 1:
        return Const(cs[0])
    inner = as_func(inner)
    if isinstance(inner, Const):
        return Const(complex(np.polyval(cs[::-1], inner.value)))
    return Poly(tuple(cs), inner)


def poly_from_roots(roots, normalize_at_zero=True) -> ComplexFunc:
    """prod(1 - z/a_k) (or prod(z - a_k) when ``normalize_at_zero`` is False)."""
    roots = [complex(a) for a in roots]
    coeffs = np.poly(roots)[::-1] if roots else np.array([1.0])
    if normalize_at_zero:
        if any(a == 0 for a in roots):
            raise ValueError("cannot normalise a polynomial with a root at 0")
        coeffs = coeffs / coeffs[0]
    return poly(coeffs)


# ---------------------------------------------------------------------------
# module-level operations


def diff(f: ComplexFunc) -> ComplexFunc:
    return f.diff()


def eval_log(f: ComplexFunc, z) -> LogComplex:
    return f.eval_log(z)


def spherical_deriv_log(f: ComplexFunc, z):
    """log f#(z) where f# = |f'| / (1 + |f|^2).

    Computed from the entire split f = g/h as
    |g'h - gh'| / (|g|^2 + |h|^2), which is continuous through poles and
    never forms |f| itself, so exp(exp(z)) stays finite.
    """
    g, h = f.split
    gl, hl = g.eval_log(z), h.eval_log(z)
    dg, dh = _cached_diff(g).eval_log(z), _cached_diff(h).eval_log(z)
    cross = logsum([dg * hl, -(gl * dh)])
    denom = np.logaddexp(2 * np.asarray(gl.logmod), 2 * np.asarray(hl.logmod))
    if np.any(denom == -np.inf):
        raise Undefined("numerator and denominator vanish together")
    out = np.asarray(cross.logmod) - denom
    return out if out.ndim else float(out)


_DIFF_CACHE: dict = {}


def _cached_diff(f: ComplexFunc) -> ComplexFunc:
    key = id(f)
    hit = _DIFF_CACHE.get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    d = f.diff()
    if len(_DIFF_CACHE) > 4096:
        _DIFF_CACHE.clear()
    _DIFF_CACHE[key] = (f, d)
    return d


def _paren(f: ComplexFunc) -> str:
    s = str(f)
    if isinstance(f, (Var, Exp, Add, Poly)) or (isinstance(f, Const) and s[0] == "("):
        return s
    if isinstance(f, Const):
        return s if not s.startswith("-") else f"({s})"
    return f"({s})"


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_complex(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return _fmt_num(c.real)
    if c.real == 0:
        return f"{_fmt_num(c.imag)}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_num(c.real)}{sign}{_fmt_num(abs(c.imag))}i)"


def log_derivative(f) -> ComplexFunc:
    """f'/f built structurally, so exp factors contribute arg' with no huge phases."""
    f = as_func(f)
    if isinstance(f, Const):
        return ZERO
    if isinstance(f, Exp):
        return f.arg.diff()
    if isinstance(f, Mul):
        return add(*(log_derivative(x) for x in f.factors))
    if isinstance(f, Pow):
        return mul(Const(complex(f.n)), log_derivative(f.base))
    if isinstance(f, Div):
        return add(log_derivative(f.num), neg(log_derivative(f.den)))
    return div(f.diff(), f)

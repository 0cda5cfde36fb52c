import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vdlab.errors import NotMeromorphic, ParseError, PoleHit
from vdlab.expr import (
    Z,
    LogComplex,
    diff,
    div,
    exp,
    log_derivative,
    logsum,
    mul,
    parse,
    poly,
    power,
    spherical_deriv_log,
)

EXPRESSIONS = [
    "exp(z)", "exp(exp(z))", "1 + exp(z)", "exp(z + exp(-z))", "exp(2z) + 1",
    "(z - 1)/(z + 1)", "z^3 - 2z + 1", "(exp(z) - 1)/z", "exp(z)/(z - 2)",
    "(2+3i)*z*exp(-z^2)", "(z^2 + 1)/(z - 3)", "exp(z)*exp(-z) + z",
]


def disc_points(seed, n=200, radius=5.0):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


# --- eval_log ---------------------------------------------------------------

def test_exp_logmod_is_exact():
    v = parse("exp(z)").eval_log(10.0)
    assert v.logmod == 10.0 and v.arg == 0.0


def test_exp_tower_logmod_never_overflows():
    for r in (5.0, 50.0, 700.0):
        assert parse("exp(exp(z))").eval_log(r).logmod == pytest.approx(math.exp(r), rel=1e-14)


def test_zero_of_numerator_gives_minus_infinity():
    assert parse("(z-1)/(z+1)").eval_log(1.0).logmod == -np.inf


def test_pole_raises():
    with pytest.raises(PoleHit):
        parse("(z-1)/(z+1)").eval_log(-1.0)


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_eval_log_matches_naive_evaluation(text):
    f = parse(text)
    z = disc_points(7)
    naive = f.evaluate(z)
    ok = np.isfinite(naive) & (np.abs(naive) > 1e-200)
    decoded = f.eval_log(z[ok]).to_complex()
    assert np.max(np.abs(decoded - naive[ok]) / np.abs(naive[ok])) <= 1e-10


@given(st.complex_numbers(max_magnitude=1e100, allow_nan=False, allow_infinity=False))
def test_logcomplex_round_trip(w):
    back = LogComplex.from_complex(w).to_complex()
    assert abs(back - w) <= 1e-12 * abs(w)


@given(st.complex_numbers(min_magnitude=1e-50, max_magnitude=1e50, allow_nan=False),
       st.complex_numbers(min_magnitude=1e-50, max_magnitude=1e50, allow_nan=False))
def test_logcomplex_arithmetic_matches_complex(a, b):
    la, lb = LogComplex.from_complex(a), LogComplex.from_complex(b)
    assert abs((la * lb).to_complex() - a * b) <= 1e-12 * abs(a * b)
    assert abs((la / lb).to_complex() - a / b) <= 1e-12 * abs(a / b)
    s = logsum([la, lb]).to_complex()
    assert abs(s - (a + b)) <= 1e-12 * (abs(a) + abs(b))


def test_logsum_of_huge_values():
    big = LogComplex(1e5, 0.0)
    assert logsum([big, big]).logmod == pytest.approx(1e5 + math.log(2), rel=1e-15)


# --- diff ------------------------------------------------------------------

def test_diff_examples():
    z = disc_points(1, 50)
    assert np.allclose(diff(parse("exp(z)")).evaluate(z), np.exp(z), rtol=1e-14)
    d = diff(parse("z + exp(-z)")).evaluate(z)
    assert np.allclose(d, 1 - np.exp(-z), rtol=1e-13)
    assert diff(parse("exp(exp(z))")).evaluate(0.0) == pytest.approx(math.e, rel=1e-15)


@pytest.mark.parametrize("a,b", [("exp(z)", "z^2 + 1"), ("(z-1)/(z+2)", "exp(-z)"),
                                 ("exp(exp(z))", "exp(z + exp(-z))")])
def test_product_rule(a, b):
    f, g = parse(a), parse(b)
    z = disc_points(3, 100, 2.0)
    lhs = diff(mul(f, g)).evaluate(z)
    rhs = (diff(f) * g + f * diff(g)).evaluate(z)
    assert np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)) <= 1e-10


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_higher_derivatives_match_finite_differences(text):
    f = parse(text)
    z0 = 0.3 + 0.4j
    h = 1e-4
    d2 = f.nth_diff(2).evaluate(z0)
    fd = (f.evaluate(z0 + h) - 2 * f.evaluate(z0) + f.evaluate(z0 - h)) / h ** 2
    assert abs(d2 - fd) <= 1e-5 * max(1.0, abs(d2))


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_taylor_coefficients_match_derivatives(text):
    f = parse(text)
    z0 = 0.5 - 0.2j
    c = f.taylor(z0, 4)
    g = f
    for k in range(5):
        assert c[k] == pytest.approx(g.evaluate(z0) / math.factorial(k), rel=1e-10, abs=1e-12)
        g = g.diff()


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_log_derivative(text):
    f = parse(text)
    z = disc_points(5, 50, 3.0)
    fz = f.evaluate(z)
    ok = np.abs(fz) > 1e-6
    want = f.diff().evaluate(z[ok]) / fz[ok]
    got = log_derivative(f).evaluate(z[ok])
    assert np.allclose(got, want, rtol=1e-9, atol=1e-12)


# --- split -----------------------------------------------------------------

@pytest.mark.parametrize("text", EXPRESSIONS)
def test_split_reproduces_the_function(text):
    f = parse(text)
    g, h = f.split
    assert g.is_entire and h.is_entire
    z = disc_points(11, 100)
    hz = h.evaluate(z)
    ok = np.abs(hz) > 1e-8
    assert np.allclose(g.evaluate(z[ok]) / hz[ok], f.evaluate(z[ok]), rtol=1e-10)


def test_structure_flags():
    assert parse("exp(z)").is_entire and parse("exp(z)").is_transcendental
    assert parse("z^2+1").is_polynomial and not parse("z^2+1").is_transcendental
    assert not parse("1/(z-1)").is_entire
    assert parse("5").is_constant


# --- spherical derivative --------------------------------------------------

def test_spherical_derivative_examples():
    assert spherical_deriv_log(Z, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert spherical_deriv_log(exp(Z), 2.7j) == pytest.approx(math.log(0.5), abs=1e-14)
    # log of e^3 exp(e^3) / (1 + exp(2 e^3)), evaluated with mpmath at 30 digits
    assert spherical_deriv_log(parse("exp(exp(z))"), 3.0) == pytest.approx(
        -17.0855369231876677, rel=1e-13)


@pytest.mark.parametrize("text", ["exp(z)", "(z-1)/(z+2)", "z^2 + exp(z)", "exp(z)/(z-2)"])
def test_spherical_derivative_invariant_under_reciprocal(text):
    f = parse(text)
    z = disc_points(13, 100, 3.0)
    fz = f.evaluate(z)
    ok = (np.abs(fz) > 1e-8) & (np.abs(fz) < 1e8)
    a = spherical_deriv_log(f, z[ok])
    b = spherical_deriv_log(div(1, f), z[ok])
    assert np.allclose(a, b, rtol=1e-10, atol=1e-10)


def test_spherical_derivative_through_a_pole():
    # f = 1/z has f# = 1/(1 + |z|^2), which is 1/2 on the unit circle
    assert spherical_deriv_log(parse("1/z"), 1.0) == pytest.approx(math.log(0.5), abs=1e-14)
    assert np.isfinite(spherical_deriv_log(parse("1/(z-1)"), 1.0))


# --- parser ----------------------------------------------------------------

def test_parser_grammar():
    f = parse("(2+3i)*z^2 - exp(-z)/2")
    z0 = 0.7 - 0.1j
    assert f.evaluate(z0) == pytest.approx((2 + 3j) * z0 ** 2 - cmath.exp(-z0) / 2, rel=1e-14)
    assert parse("2z").evaluate(3.0) == pytest.approx(6.0)
    P = parse("z^2 + 1")
    assert parse("P*exp(z)", {"P": P}).evaluate(1.0) == pytest.approx(2 * math.e)


@pytest.mark.parametrize("bad,pos", [("exp(", 4), ("z +* 2", 3), ("sin(z)", 0), ("", 0)])
def test_parse_errors_carry_position(bad, pos):
    with pytest.raises(ParseError) as info:
        parse(bad)
    assert info.value.position == pos


def test_essential_singularity_is_refused():
    with pytest.raises(NotMeromorphic):
        exp(div(1, Z))
    with pytest.raises(ParseError, match="essential singularity"):
        parse("exp(1/z)")


def test_power_and_poly_constructors():
    f = power(poly([1, 1]), 3)
    assert f.evaluate(2.0) == pytest.approx(27.0)
    assert diff(f).evaluate(2.0) == pytest.approx(27.0)

import math

import numpy as np
import pytest

from vdlab.errors import InputError, MissingSolutionBase, NoneSatisfied, ParseError, StepUnderflow
from vdlab.expr import Z, const, logsum, parse
from vdlab.nevanlinna import RadiusGrid
from vdlab.odes import (
    Jet,
    LinearODE,
    check_2LM2,
    check_coefficient_bound,
    comparable,
    disc_samples,
    integrate_base,
    integrate_ray,
    little_o,
    residual,
    solution_count_check,
    standardness_verdicts,
    wittich_admissible,
)

NINE_DIGITS = math.log(1e-9)
SIN = parse("(exp(i*z) - exp(-i*z))/(2i)")


@pytest.fixture(scope="module")
def frei(equations_dir):
    return LinearODE.from_file(equations_dir / "frei.ode")


@pytest.fixture(scope="module")
def sharp(equations_dir):
    return LinearODE.from_file(equations_dir / "wittich_sharp.ode")


@pytest.fixture(scope="module")
def airy(equations_dir):
    return LinearODE.from_file(equations_dir / "airy.ode")


# --- residuals --------------------------------------------------------------------

def test_frei_solutions_have_tiny_residuals(frei):
    zs = disc_samples(1000, 10.0, seed=0)
    for f in frei.solutions:
        assert residual(frei, f, zs) <= math.log(1e-10)


def test_sharpness_example_residual(sharp):
    assert residual(sharp, sharp.solutions[0], disc_samples(1000, 10.0, seed=0)) <= math.log(1e-10)


def test_non_solution_has_large_residual(frei):
    assert residual(frei, parse("exp(2z)"), disc_samples(100, 5.0, seed=0)) > -1


def _log_abs_residual(ode, f, zs):
    """log|f^(n) + sum A_j f^(j)| and log of the largest term, per point."""
    terms = ode.terms(f, zs)
    biggest = np.max(np.stack([np.broadcast_to(t.logmod, zs.shape) for t in terms]), axis=0)
    return np.asarray(logsum(terms).logmod), biggest


def test_residual_is_linear(frei):
    f1, f2 = frei.solutions
    zs = disc_samples(1000, 10.0, seed=1)
    _, scale1 = _log_abs_residual(frei, f1, zs)
    _, scale2 = _log_abs_residual(frei, f2, zs)
    for alpha, beta in ((2, 3 - 1j), (1, -1)):
        combo, _ = _log_abs_residual(frei, alpha * f1 + beta * f2, zs)
        scale = np.logaddexp(math.log(abs(alpha)) + scale1, math.log(abs(beta)) + scale2)
        # cancellation inside the combination costs a few digits, never nine
        assert np.max(combo - scale) <= NINE_DIGITS


def test_disc_samples_are_seeded_and_inside():
    a, b = disc_samples(500, 3.0, 7), disc_samples(500, 3.0, 7)
    assert np.array_equal(a, b) and np.all(np.abs(a) <= 3.0)


# --- integration ------------------------------------------------------------------

def test_exponential_along_the_real_axis():
    sol = integrate_ray(LinearODE((const(-1),)), Jet((1,)), 0.0, 20.0)
    assert np.max(np.abs(sol.logf[:, 0] - sol.radii)) <= 1e-9


def test_frei_second_solution_along_the_real_axis(frei):
    f2 = frei.solutions[1]
    sol = integrate_ray(frei, Jet.of(f2, 2), 0.0, 10.0)
    s = sol.radii
    assert np.max(np.abs(sol.logf[:, 0] - (s + np.exp(-s)))) <= 1e-8


def test_sine_along_the_imaginary_axis():
    ode = LinearODE((const(1), const(0)))
    s = np.array([0.0, 5.0, 15.0, 30.0])
    sol = integrate_ray(ode, Jet((0, 1)), math.pi / 2, 30.0, points=s)
    assert sol.logf[-1, 0] == pytest.approx(30 - math.log(2), abs=1e-9)
    assert sol.logf[1, 0] == pytest.approx(math.log(math.sinh(5.0)), abs=1e-12)


def test_airy_against_extended_precision(airy):
    # log|y| for the canonical solutions y(0)=1,y'(0)=0 and y(0)=0,y'(0)=1 (mpmath)
    expected = {
        (0.0, 3.0): (2.43563822146349936, 2.75007794957838458),
        (math.pi / 2, 3.0): (1.40619037000449715, 1.72027302627673443),
        (math.pi, 5.0): (-0.963691878701700018, -0.183985582507043496),
    }
    for (theta, R), want in expected.items():
        got = [integrate_ray(airy, jet, theta, R, points=np.array([0.0, R])).logf[-1, 0]
               for jet in airy.jets]
        assert got == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("name", ["frei", "wittich_sharp"])
def test_closed_forms_match_their_own_integration(equations_dir, name):
    ode = LinearODE.from_file(equations_dir / f"{name}.ode")
    for f in ode.solutions:
        for theta in (0.0, 2 * math.pi / 3, 4 * math.pi / 3):
            sol = integrate_ray(ode, Jet.of(f, ode.order), theta, 4.0)
            z = sol.radii[1:] * np.exp(1j * theta)
            assert np.max(np.abs(sol.logf[1:, 0] - f.eval_log(z).logmod)) <= 1e-7


def test_pole_on_the_ray_underflows():
    ode = LinearODE((parse("1/(z-1)"),))
    with pytest.raises(StepUnderflow):
        integrate_ray(ode, Jet((1,)), 0.0, 2.0)
    # off the pole the solution 1/(1-z) is recovered
    sol = integrate_ray(ode, Jet((1,)), math.pi / 2, 2.0)
    assert sol.logf[-1, 0] == pytest.approx(-0.5 * math.log(5), abs=1e-9)


def test_integration_input_errors():
    ode = LinearODE((const(1), const(0)))
    with pytest.raises(InputError):
        integrate_ray(ode, Jet((1,)), 0.0, 1.0)
    with pytest.raises(InputError):
        integrate_ray(ode, Jet((0, 0)), 0.0, 1.0)


def test_jet_of_expression():
    jet = Jet.of(parse("exp(2z)"), 3, 0.5)
    e = math.exp(1.0)
    assert jet.values == pytest.approx((e, 2 * e, 4 * e)) and jet.z0 == 0.5


# --- equation files ------------------------------------------------------------------

def test_equation_file_round_trip(frei, sharp):
    assert frei.order == 2 and len(frei.solutions) == 2
    assert frei.to_dict()["coefficients"]["A0"] == "-1"
    assert sharp.params["P"].is_polynomial


@pytest.mark.parametrize("text", [
    "A0: 1",                                   # no order
    "order: 1\nA3: z",                         # coefficient beyond the order
    "order: 1\nfoo: z",                        # unknown key
    "order: 1\nparam P: exp(z)",               # parameters are polynomials
    "order: 2\njet: 1 @ 0",                    # jet too short
    "order: 1\nA0 z",                          # missing colon
])
def test_malformed_equation_files(text):
    with pytest.raises(InputError):
        LinearODE.from_text(text)


def test_essential_singularity_in_a_coefficient_is_refused(equations_dir):
    with pytest.raises(ParseError):
        LinearODE.from_file(equations_dir / "exp_inverse.ode")


# --- ratio predicates ----------------------------------------------------------------

def test_little_o_classification():
    r = np.linspace(1, 50, 200)
    assert little_o(1 / r)["status"] == "supported"
    assert little_o(np.full(200, 0.7))["status"] == "violated"
    assert little_o(np.full(200, 0.1))["status"] == "inconclusive"
    rising = 0.04 * r / 50
    assert little_o(rising)["status"] == "inconclusive"


def test_comparable_classification():
    assert comparable(np.full(100, 3.0))["status"] == "supported"
    assert comparable(np.linspace(1, 1e-3, 100))["status"] == "violated"


# --- hypothesis verdicts -------------------------------------------------------------

@pytest.fixture(scope="module")
def verdict_grid():
    return RadiusGrid.geometric(1.0, 30.0, 60)


def test_2LM2_picks_the_dominant_coefficient(verdict_grid):
    res = check_2LM2(LinearODE((parse("exp(exp(z))"), parse("exp(z)"))), verdict_grid)
    # log M(A1)/log M(A0) = r e^{-r}, largest at the start of the tail
    r0 = verdict_grid.r[verdict_grid.tail_indices(0.25)[0]]
    assert res["p"] == 0 and res["tail_limsup"] == pytest.approx(r0 * math.exp(-r0), rel=1e-6)


def test_2LM2_reports_the_smallest_admissible_index(verdict_grid):
    res = check_2LM2(LinearODE((parse("exp(z)"), parse("exp(2z)"))), verdict_grid)
    assert res["p"] == 1 and res["tried"][0] > 1
    assert res["lower_ratios"]["log+M(A0)/log+M(A1)"] == pytest.approx(0.5, abs=1e-3)


def test_2LM2_needs_a_transcendental_coefficient(verdict_grid):
    with pytest.raises(NoneSatisfied):
        check_2LM2(LinearODE((Z, const(1))), verdict_grid)


def test_integrated_base_meets_the_solution_count():
    ode = LinearODE((parse("-exp(z)"),))
    g = RadiusGrid.geometric(1.0, 6.0, 60)
    p = check_2LM2(ode, g)["p"]
    report = solution_count_check(ode, integrate_base(ode, g.r, n_rays=128), p, g)
    assert report["pass"] and report["count"] >= ode.order - p
    assert all(m["c"] > 0 for m in report["members"])


def test_wittich_verdicts(frei, sharp):
    g = RadiusGrid.geometric(1.0, 50.0, 60)
    assert wittich_admissible(frei.solutions[0], frei, g).verdict == "violated"
    v = wittich_admissible(sharp.solutions[0], sharp, g)
    assert v.verdict == "violated"
    for ratio in v.measurements.values():
        assert 0.1 <= ratio["tail_liminf"] <= ratio["tail_limsup"] <= 10
    rational = LinearODE((parse("-(1/(z+1) + 3z^2)"),))
    assert wittich_admissible(parse("(z+1)*exp(z^3)"), rational, g).verdict == "supported"
    # 2 log r against r/pi is o(1) but still far from small at r = 50
    slow = LinearODE((parse("1/(z^2+1)"), const(0)))
    assert wittich_admissible(parse("exp(z)"), slow, g).verdict == "inconclusive"


def test_growth_condition_on_the_base_fails_for_frei(frei, verdict_grid):
    (v,) = standardness_verdicts(frei, frei.solutions[0], verdict_grid, theorems=("T2.2",))
    assert v.verdict == "violated"


def test_missing_base_makes_verdict_inconclusive(verdict_grid):
    ode = LinearODE((const(1), const(0)))
    (v,) = standardness_verdicts(ode, SIN, verdict_grid, theorems=("T2.2",))
    assert v.verdict == "inconclusive" and "MissingSolutionBase" in v.notes[0]


def test_sine_is_corroborated_as_standard(verdict_grid):
    ode = LinearODE((const(1), const(0)))
    verdicts = standardness_verdicts(ode, SIN, verdict_grid, theorems=("T3.3", "C2.4"))
    for v in verdicts:
        assert v.verdict == "supported" and v.corroboration["corroborated"]
        assert all(x <= 0.05 for x in v.corroboration["estimates"].values())


def test_verdicts_do_not_flip_under_grid_doubling(frei):
    thms = ("T1.1", "T2.3", "C2.4", "T3.3")
    for f in (SIN, parse("exp(z)")):
        ode = LinearODE((const(1), const(0))) if f is SIN else frei
        coarse = standardness_verdicts(ode, f, RadiusGrid.geometric(1.0, 30.0, 40), theorems=thms)
        fine = standardness_verdicts(ode, f, RadiusGrid.geometric(1.0, 30.0, 80), theorems=thms)
        for a, b in zip(coarse, fine):
            assert not (a.verdict == "supported" and b.verdict == "violated")


def test_coefficient_bound(frei, verdict_grid):
    first_order = LinearODE((const(-1),))
    rep = check_coefficient_bound([parse("exp(z)")], first_order, verdict_grid)
    assert rep["pass"] and rep["coefficients"]["A0"]["tail_max"] == 0
    rep = check_coefficient_bound(frei.solutions, frei, verdict_grid)
    assert rep["pass"] and rep["coefficients"]["A1"]["tail_max"] == pytest.approx(1, abs=0.1)
    with pytest.raises(MissingSolutionBase):
        check_coefficient_bound([], frei, verdict_grid)

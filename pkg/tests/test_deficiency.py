import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vdlab.deficiency import (
    ESTIMATE_CAP,
    bergweiler_bock_check,
    estimate,
    log_order_estimate,
    marchenko_bound_check,
    order_estimate,
    ratio_estimate,
    sum_check,
)
from vdlab.errors import DegenerateDenominator, MixedKinds, PreconditionError, TailTooShort
from vdlab.expr import parse
from vdlab.nevanlinna import INF, GrowthCurve, RadiusGrid, characteristic

EXP = parse("exp(z)")
ONE_PLUS_EXP = parse("1 + exp(z)")


@pytest.fixture(scope="module")
def grid():
    return RadiusGrid.geometric(1.0, 50.0, 200)


def test_nevanlinna_deficiency_of_one_plus_exp(grid):
    est = estimate("N", ONE_PLUS_EXP, 1, grid)
    assert est.estimate == pytest.approx(1.0, abs=0.01)


def test_petrenko_deviation_of_one_plus_exp(grid):
    est = estimate("P", ONE_PLUS_EXP, 1, grid)
    assert est.estimate == pytest.approx(math.pi, abs=0.03)


def test_finite_nonzero_target_of_exp_is_not_deviated(grid):
    assert estimate("P", EXP, 2, grid).estimate <= 0.05


@pytest.mark.parametrize("a", [0, 1, 2, INF])
def test_tail_window_statistics_are_ordered(grid, a):
    for kind in "NPEV":
        est = estimate(kind, ONE_PLUS_EXP, a, grid)
        assert est.tail_liminf <= est.tail_limsup
        if kind == "N":
            assert est.tail_limsup <= 1 + 0.01


@pytest.mark.parametrize("f,a", [(ONE_PLUS_EXP, 1), (EXP, 0), (EXP, 2), (EXP, 1j)])
def test_petrenko_dominates_nevanlinna(grid, f, a):
    n = estimate("N", f, a, grid)
    p = estimate("P", f, a, grid)
    assert n.estimate <= p.estimate + 1e-9
    assert np.all(p.ratio_curve.values >= n.ratio_curve.values - 1e-9)


def test_valiron_reports_the_tail_maximum(grid):
    v = estimate("V", ONE_PLUS_EXP, 1, grid)
    assert v.estimate == v.tail_limsup
    assert estimate("N", ONE_PLUS_EXP, 1, grid).estimate == v.tail_liminf


def test_estimate_is_coherent_under_grid_refinement():
    coarse = RadiusGrid.geometric(1.0, 50.0, 60)
    fine = coarse.refined()
    for kind in "NP":
        a = estimate(kind, ONE_PLUS_EXP, 1, coarse)
        b = estimate(kind, ONE_PLUS_EXP, 1, fine)
        # shared radii carry identical ratios; new midpoints can only widen the window
        assert np.allclose(b.ratio_curve.values[::2], a.ratio_curve.values, rtol=0, atol=1e-9)
        assert b.tail_liminf <= a.tail_liminf + 1e-9
        assert abs(a.estimate - b.estimate) <= a.tail_limsup - a.tail_liminf + 1e-9


def test_short_tail_is_rejected():
    with pytest.raises(TailTooShort):
        estimate("N", EXP, 0, RadiusGrid.geometric(1.0, 5.0, 20))


def test_nonpositive_denominator_is_rejected():
    g = RadiusGrid.geometric(1.0, 10.0, 100)
    num = characteristic(EXP, g)
    den = GrowthCurve(g, np.zeros(len(g)), "T")
    with pytest.raises(DegenerateDenominator):
        ratio_estimate("N", num, den, INF)


def test_constant_function_has_no_deviation_to_estimate(grid):
    with pytest.raises(PreconditionError):
        estimate("N", parse("5"), 1, grid)
    with pytest.raises(PreconditionError):
        estimate("Q", EXP, 1, grid)


def test_unbounded_deviation_is_flagged():
    g = RadiusGrid.geometric(1.0, 12.0, 100)
    est = estimate("P", parse("exp(exp(z))"), INF, g)
    assert "unbounded?" in est.flags
    assert est.estimate <= ESTIMATE_CAP


def test_estimate_document_shape(grid):
    doc = estimate("N", EXP, 0, grid).to_dict()
    assert set(doc) >= {"kind", "a", "estimate", "tail_liminf", "tail_limsup", "flags"}
    assert doc["a"] == "0.0" and doc["kind"] == "N"


# --- sums and bounds --------------------------------------------------------------

def test_nevanlinna_sum_for_exp_is_extremal(grid):
    report = sum_check([estimate("N", EXP, a, grid) for a in (0, INF)])
    assert report["sum"] == pytest.approx(2.0, abs=0.05) and report["pass"]


def test_eremenko_sum_for_exp(grid):
    report = sum_check([estimate("E", EXP, a, grid) for a in (0, INF)])
    assert report["sum"] <= 2 * math.pi + 0.1 and report["pass"]


def test_empty_sum_is_vacuous():
    report = sum_check([])
    assert report["pass"] and report["note"] == "vacuous"


def test_mixed_kinds_cannot_be_summed(grid):
    with pytest.raises(MixedKinds):
        sum_check([estimate("N", EXP, 0, grid), estimate("P", EXP, 0, grid)])


def test_sum_law_failure_is_reported(grid):
    est = estimate("N", EXP, 0, grid)
    report = sum_check([est, est, est])
    assert not report["pass"] and report["margin"] < 0


@pytest.mark.parametrize("a", [0, INF])
def test_bergweiler_bock_for_exp(grid, a):
    report = bergweiler_bock_check(EXP, a, grid)
    assert report["applicable"] and report["pass"]
    assert report["estimate"]["estimate"] <= math.pi + 0.05


def test_bergweiler_bock_not_applicable_to_constants(grid):
    report = bergweiler_bock_check(parse("5"), INF, grid)
    assert not report["applicable"] and report["pass"]


def test_marchenko_bound_for_exp(grid):
    at_two = marchenko_bound_check(EXP, 2, grid)
    assert at_two["pass"] and at_two["delta_E"]["estimate"] <= 0.05 and at_two["bound"] <= 0.3
    at_zero = marchenko_bound_check(EXP, 0, grid)
    assert at_zero["bound"] == pytest.approx(math.pi, abs=1e-6) and at_zero["pass"]
    with pytest.raises(PreconditionError):
        marchenko_bound_check(parse("5"), 0, grid)


# --- growth indicators ------------------------------------------------------------

@given(st.floats(0.3, 4.0), st.floats(0.5, 20.0))
def test_order_of_a_power_curve(rho, scale):
    g = RadiusGrid.geometric(1.0, 100.0, 40)
    T = GrowthCurve(g, scale * g.r ** rho, "T")
    assert order_estimate(T) == pytest.approx(rho, rel=1e-9)


def test_log_order_of_a_log_power_curve():
    g = RadiusGrid.geometric(2.0, 1e4, 40)
    T = GrowthCurve(g, 3 * np.log(g.r) ** 2.5, "T")
    assert log_order_estimate(T) == pytest.approx(2.5, rel=1e-9)
    assert order_estimate(characteristic(EXP, RadiusGrid.geometric(1, 50, 40))) == pytest.approx(
        1.0, abs=0.02)

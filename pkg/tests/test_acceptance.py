"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line through the ``criterion``
fixture; the lines are repeated in the terminal summary.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdlab.deficiency import bergweiler_bock_check, estimate, sum_check
from vdlab.expr import parse
from vdlab.nevanlinna import (
    INF,
    RadiusGrid,
    ahlfors_shimizu,
    base_characteristic,
    characteristic,
    count,
    proximity,
    winding_number,
)
from vdlab.odes import (
    LinearODE,
    disc_samples,
    integrate_base,
    residual,
    standardness_verdicts,
    wittich_admissible,
)
from vdlab.sets import LogPowerXi, area_set, borel_exceptional, comb, decay, measures

EXP = parse("exp(z)")


def flat(diff, r, limit=0.01):
    """Least-squares slope of a difference curve against r, and whether it is ~0."""
    slope = float(np.polyfit(r, diff, 1)[0])
    return slope, abs(slope) <= limit


@pytest.fixture(scope="module")
def grid():
    return RadiusGrid.geometric(1.0, 50.0, 200)


def test_criterion_01_proximity_oracle(criterion):
    errs = [abs(proximity(EXP, INF, r) - r / math.pi) / (r / math.pi) for r in (5, 10, 20, 40)]
    ok = criterion(1, max(errs) <= 1e-6, f"m(r,inf,e^z) vs r/pi, max rel err {max(errs):.2e}")
    assert ok


def test_criterion_02_tower_asymptotic(criterion):
    radii = (10.0, 14.0, 18.0, 20.0)
    T = characteristic(parse("exp(exp(z))"), list(radii)).values
    asym = np.array([math.exp(r) / math.sqrt(2 * math.pi ** 3 * r) for r in radii])
    rel = np.abs(T - asym) / asym
    ok = rel[-1] <= 0.02 and bool(np.all(np.diff(rel) < 0))
    criterion(2, ok, "T(r,exp(e^z)) vs e^r/sqrt(2 pi^3 r), rel err "
                     + ", ".join(f"{r:g}:{e:.4f}" for r, e in zip(radii, rel)))
    assert ok


def test_criterion_03_frei_deviations(criterion, grid):
    f1 = parse("1 + exp(z)")
    dn = estimate("N", f1, 1, grid).estimate
    dp = estimate("P", f1, 1, grid).estimate
    ok = abs(dn - 1) <= 0.01 and abs(dp - math.pi) <= 0.03
    criterion(3, ok, f"delta_N(1,1+e^z) = {dn:.4f}, delta_P(1,1+e^z) = {dp:.4f}")
    assert ok


def test_criterion_04_frei_residuals(criterion, equations_dir):
    ode = LinearODE.from_file(equations_dir / "frei.ode")
    zs = disc_samples(1000, 10.0, seed=0)
    res = [math.exp(residual(ode, f, zs)) for f in ode.solutions]
    ok = max(res) <= 1e-9
    criterion(4, ok, "Frei max relative residuals " + ", ".join(f"{x:.1e}" for x in res))
    assert ok


def test_criterion_05_sharpness_example(criterion, equations_dir, grid):
    ode = LinearODE.from_file(equations_dir / "wittich_sharp.ode")
    f = ode.solutions[0]
    res = math.exp(residual(ode, f, disc_samples(1000, 10.0, seed=0)))
    tail = grid.tail_indices(0.25)
    ratios = {}
    for label, g in (("A0", ode.coefficients[0]), ("A1", ode.coefficients[1]), ("f", f)):
        vals = characteristic(g, grid).values[tail] / grid.r[tail]
        ratios[label] = (float(vals.min()), float(vals.max()))
    ok = res <= 1e-9 and all(0.1 <= lo and hi <= 10 for lo, hi in ratios.values())
    criterion(5, ok, f"residual {res:.1e}; tail T/r ranges "
                     + ", ".join(f"{k}:[{lo:.3f},{hi:.3f}]" for k, (lo, hi) in ratios.items()))
    assert ok


def test_criterion_06_bounded_difference_laws(criterion, grid):
    T0, A = ahlfors_shimizu(EXP, grid)
    diff = T0.values - characteristic(EXP, grid).values
    slope, level = flat(diff, grid.r)
    r = grid.r
    # T0(r) <= A(r) log r + T0(1)
    upper = A.values * np.log(r) + T0.values[0] - T0.values
    # A(r) <= T0(2r) / log 2
    T0_twice, _ = ahlfors_shimizu(EXP, list(2 * r))
    lower = T0_twice.values / math.log(2) - A.values
    ok = (np.max(np.abs(diff)) <= 2 and level and upper.min() >= 0 and lower.min() >= 0)
    criterion(6, ok, f"max|T0-T| {np.max(np.abs(diff)):.4f}, slope {slope:.1e}; "
                     f"sandwich slacks {upper.min():.3g}, {lower.min():.3g}")
    assert ok


def test_criterion_07_borel_lemma(criterion):
    xi = LogPowerXi(2)
    linear = borel_exceptional(lambda r: r, lambda r: r, xi, C=2, r0=2, R=100)
    const_phi = borel_exceptional(lambda r: r, lambda r: np.ones_like(r), xi, C=math.e,
                                  r0=2, R=100)
    ok = linear["lhs"] <= linear["rhs"] and const_phi["lhs"] <= const_phi["rhs"]
    criterion(7, ok, f"phi=r: {linear['lhs']:.4g} <= {linear['rhs']:.6g}; "
                     f"phi=1: {const_phi['lhs']:.4g} <= {const_phi['rhs']:.6g}")
    assert ok


def test_criterion_08_winding_counts(criterion):
    cubic = parse("(z-1)*(z-2)*(z-3)")
    n_cubic = count(cubic, 0, 2.5)
    n_exp = count(EXP, 1, 7.0)
    stable = all(winding_number(cubic, 2.5, pts) == 2 and
                 winding_number(parse("exp(z) - 1"), 7.0, pts) == 3 for pts in (64, 128, 256, 512))
    ok = n_cubic == 2 and n_exp == 3 and stable
    criterion(8, ok, f"n(2.5,0,cubic) = {n_cubic}, n(7,1,e^z) = {n_exp}, "
                     f"stable under doubling: {stable}")
    assert ok


def test_criterion_09_base_invariance(criterion):
    g = RadiusGrid.geometric(1.0, 30.0, 200)
    f1, f2 = parse("1 + exp(z)"), parse("exp(z + exp(-z))")
    T1 = base_characteristic([f1, f2], g).values
    T2 = base_characteristic([f1 + f2, f1 - f2], g).values
    diff = T1 - T2
    slope, level = flat(diff, g.r)
    ok = np.max(np.abs(diff)) <= 3 and level
    criterion(9, ok, f"max|T1-T2| {np.max(np.abs(diff)):.4f}, slope {slope:.1e}")
    assert ok


def test_criterion_10_deficiency_sums(criterion, grid):
    n_sum = sum_check([estimate("N", EXP, a, grid) for a in (0, INF)])
    e_sum = sum_check([estimate("E", EXP, a, grid) for a in (0, INF)])
    bb = [bergweiler_bock_check(EXP, a, grid) for a in (0, INF)]
    bb_vals = [b["estimate"]["estimate"] for b in bb]
    ok = (abs(n_sum["sum"] - 2) <= 0.05 and e_sum["sum"] <= 2 * math.pi + 0.1
          and all(v <= math.pi + 0.05 for v in bb_vals))
    criterion(10, ok, f"sum delta_N {n_sum['sum']:.4f}, sum delta_E {e_sum['sum']:.4f}, "
                      "delta_E per target " + ", ".join(f"{v:.4f}" for v in bb_vals))
    assert ok


def test_criterion_11_density_toolkit(criterion):
    comb_d = measures(comb(2, 1, 1000), 1000).upper_linear_density
    decay_d = measures(decay(2, 1000), 1000).upper_linear_density
    h1 = measures(area_set(parse("exp(exp(z))"), 1.0, 1.0, 30.0), 30.0)
    ok = abs(comb_d - 0.5) <= 0.02 and decay_d <= 0.01 and h1.upper_log_density >= 0.9
    criterion(11, ok, f"comb {comb_d:.4f}, summable {decay_d:.2e}, "
                      f"logdens(H1) {h1.upper_log_density:.4f} "
                      f"(cumulative {h1.cumulative_log_density:.4f})")
    assert ok


def test_criterion_12_hypothesis_predicates(criterion, equations_dir, grid):
    airy = LinearODE.from_file(equations_dir / "airy.ode")
    g = RadiusGrid.geometric(1.0, 50.0, 100)
    base = integrate_base(airy, g.r, jets=list(airy.jets))
    parts = []
    ok = True
    for k, sol in enumerate(base):
        (v,) = standardness_verdicts(airy, sol, g, base=base, theorems=("C2.4",),
                                     targets=(1, 1j))
        est = v.corroboration.get("estimates", {})
        ok &= v.verdict == "supported" and all(x <= 0.05 for x in est.values())
        parts.append(f"y{k + 1}: C2.4 {v.verdict}, delta_P "
                     + ", ".join(f"{a}:{x:.3f}" for a, x in est.items()))
    frei = LinearODE.from_file(equations_dir / "frei.ode")
    wittich = wittich_admissible(frei.solutions[0], frei, grid).verdict
    ok &= wittich == "violated"
    criterion(12, ok, "; ".join(parts) + f"; Frei f1 Wittich {wittich}")
    assert ok


# Sampled finite nonzero targets corroborate passing predicates.  L(r, a, e^z)
# stays near log(1/|a|) while T grows like r/pi, so the ratio decays like 1/r
# and small targets need a longer horizon than the default grid.
@settings(max_examples=15)
@given(st.floats(0.3, 5.0), st.floats(0, 2 * math.pi))
def test_passing_predicate_is_corroborated_at_sampled_targets(rho, theta):
    g = RadiusGrid.geometric(1.0, 400.0, 30)
    ode = LinearODE((parse("-1"),))
    (v,) = standardness_verdicts(ode, EXP, g, theorems=("C2.4",), targets=())
    assert v.verdict == "supported"
    a = rho * complex(math.cos(theta), math.sin(theta))
    assert estimate("P", EXP, a, g).estimate <= 0.05

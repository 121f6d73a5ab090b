"""Threshold formulas, level solvers, and throughput mappings."""

import math

import pytest
from scipy.optimize import brentq

from fblimits import (
    ConsistencyError,
    asymptotic_limits,
    solve_x_by_rate,
    solve_x_minus,
    solve_x_plus,
    thresholds,
    throughput,
)

LN2 = math.log(2.0)


def test_threshold_values():
    # r_max = (sqrt(b) - log(1 + sqrt(b))) / (b log 2), and for b < 1
    # r_min = (-log(1 - sqrt(b)) - sqrt(b)) / (b log 2).
    def r_max_formula(b):
        s = math.sqrt(b)
        return (s - math.log1p(s)) / (b * LN2)

    def r_min_formula(b):
        s = math.sqrt(b)
        return (-math.log1p(-s) - s) / (b * LN2)

    for beta in (0.25, 0.5, 1.0, 2.0, 4.0):
        r_min, r_max = thresholds(beta)
        assert r_max == pytest.approx(r_max_formula(beta), abs=1e-13)
        if beta < 1.0:
            assert r_min == pytest.approx(r_min_formula(beta), abs=1e-13)
        else:
            assert r_min is None
    # Frozen spot values.
    assert thresholds(0.25) == pytest.approx((1.114609918222073, 0.5455400788933021))
    assert thresholds(1.0)[1] == pytest.approx(0.44269504088896344, abs=1e-14)


def test_thresholds_small_beta_limit():
    # Both thresholds approach 1/(2 log 2) as beta -> 0.
    r_min, r_max = thresholds(1e-4)
    center = 1.0 / (2.0 * LN2)
    assert abs(r_min - center) < 0.01
    assert abs(r_max - center) < 0.01


def test_solve_x_minus_against_bisection_oracle():
    # Interior branch solves x - 1 - log x = beta r log 2; oracle by brentq
    # on that scalar equation directly.
    for beta, r in ((1.0, 1.0), (2.0, 1.0), (1.0, 0.3)):
        target = beta * r * LN2
        oracle = brentq(
            lambda x: x - 1.0 - math.log(x) - target, 1e-12, 1.0 - 1e-12, xtol=1e-15
        )
        x, branch = solve_x_minus(beta, r)
        assert branch == "fixed_point"
        assert x == pytest.approx(oracle, abs=1e-12)
    assert solve_x_minus(1.0, 1.0)[0] == pytest.approx(0.23196095298653446, abs=1e-12)


def test_solve_x_plus_explicit_value():
    # For beta = 1, r = 1 > r_max the endpoint branch is exact:
    # x = lambda_plus - e/2.
    x, branch = solve_x_plus(1.0, 1.0)
    assert branch == "explicit"
    assert x == pytest.approx(4.0 - math.e / 2.0, abs=1e-13)


def test_solver_residuals():
    # Each solved level must satisfy its defining equation.
    from fblimits import RateContext, mp_law, rate_zero

    for beta in (0.5, 1.0, 2.0):
        for r in (0.3, 1.0, 2.5):
            law = mp_law(beta)
            for x in (solve_x_minus(beta, r)[0], solve_x_plus(beta, r)[0]):
                got = rate_zero(RateContext(law, x)).value
                assert got == pytest.approx(r * LN2, abs=1e-9)


def test_branch_continuity_at_thresholds():
    eps = 1e-9
    r_min, _ = thresholds(0.25)
    lo = solve_x_minus(0.25, r_min - eps)[0]
    hi = solve_x_minus(0.25, r_min + eps)[0]
    assert lo == pytest.approx(hi, abs=1e-7)
    assert solve_x_minus(0.25, r_min)[0] == pytest.approx(0.5, abs=1e-9)
    for beta in (0.5, 1.0, 2.0):
        _, r_max = thresholds(beta)
        lo = solve_x_plus(beta, r_max - eps)[0]
        hi = solve_x_plus(beta, r_max + eps)[0]
        assert lo == pytest.approx(hi, abs=1e-7)
        assert solve_x_plus(beta, r_max)[0] == pytest.approx(
            1.0 + math.sqrt(beta), abs=1e-9
        )


def test_levels_monotone_in_rate():
    rs = [0.1 * k for k in range(1, 21)]
    for beta in (0.5, 1.0, 2.0):
        xm = [solve_x_minus(beta, r)[0] for r in rs]
        xp = [solve_x_plus(beta, r)[0] for r in rs]
        assert all(a > b for a, b in zip(xm, xm[1:]))
        assert all(a < b for a, b in zip(xp, xp[1:]))


def test_level_endpoints():
    # Tiny rate keeps both levels near the mean.
    assert abs(solve_x_minus(1.0, 1e-3)[0] - 1.0) < 0.1
    assert abs(solve_x_plus(1.0, 1e-3)[0] - 1.0) < 0.1
    # Large rate drives the levels to the support edges; at beta = 1, r = 8
    # the exact upper value is 4 - e/256.
    x = solve_x_plus(1.0, 8.0)[0]
    assert x == pytest.approx(4.0 - math.e / 256.0, abs=1e-12)
    assert abs(x - 4.0) < 0.02
    assert asymptotic_limits(4.0, 16.0).c_min_limit <= 0.01


def test_limits_collapse_at_tiny_rate():
    res = asymptotic_limits(2.0, 1e-4)
    assert res.c_min_limit == pytest.approx(0.5, abs=0.01)
    assert res.c_max_limit == pytest.approx(0.5, abs=0.01)
    assert res.c_min_limit < 0.5 < res.c_max_limit


def test_asymptotic_limits_fields_and_scaling():
    res = asymptotic_limits(2.0, 1.0)
    assert res.c_min_limit == pytest.approx(res.x_minus / 2.0, abs=1e-15)
    assert res.c_max_limit == pytest.approx(res.x_plus / 2.0, abs=1e-15)
    assert res.branch_minus == "fixed_point"
    assert res.r_min is None
    assert res.r_max == pytest.approx(0.38436279501498355, abs=1e-13)


def test_rate_inversion_agrees_with_branch_formulas():
    for beta in (0.5, 1.0, 2.0):
        for r in (0.3, 1.0, 3.0):
            assert solve_x_by_rate(beta, r, "minus") == pytest.approx(
                solve_x_minus(beta, r)[0], abs=1e-9
            )
            assert solve_x_by_rate(beta, r, "plus") == pytest.approx(
                solve_x_plus(beta, r)[0], abs=1e-9
            )


def test_rate_inversion_handles_extreme_rates():
    # Deep rates push x within rounding distance of the support edges; the
    # log-distance search must not lose the bracket.
    x = solve_x_by_rate(1.0, 64.0, "minus")
    assert 0.0 < x < 1e-10
    x = solve_x_by_rate(0.25, 40.0, "plus")
    assert 0.0 < 2.25 - x < 1e-6


def test_throughput_golden_points():
    assert throughput(0.0, 1.0, "mimo_max") == 0.0
    assert throughput(0.0, 1.0, "cdma_min") == pytest.approx(LN2, abs=1e-15)
    c = 4.0 - math.e / 2.0
    assert throughput(c, 1.0, "mimo_max") == pytest.approx(math.log(1.0 + c), abs=1e-15)
    with pytest.raises(ValueError):
        throughput(1.0, 0.0, "mimo_max")
    with pytest.raises(ValueError):
        throughput(1.0, 1.0, "nonsense")


def test_input_validation():
    with pytest.raises(ValueError):
        thresholds(0.0)
    with pytest.raises(ValueError):
        solve_x_minus(1.0, -0.5)
    with pytest.raises(ValueError):
        solve_x_by_rate(1.0, 1.0, "sideways")

import math

import numpy as np
import pytest

from iecpulse.errors import NoCrossing, UnphysicalSchedule
from iecpulse.poly import Polynomial
from iecpulse.schedule import (
    antedated_pair,
    critical_gamma_mid,
    fourth_order_pair,
    gamma_dot_zero_crossing,
    third_order_pair,
)

PI = math.pi


def _assert_endpoint_conditions(pair):
    g, b = pair.gamma, pair.beta
    dg = g.derivative()
    assert abs(g(0.0) - PI) < 1e-9
    assert abs(dg(0.0)) < 1e-9
    assert abs(dg(1.0)) < 1e-9
    assert abs(b(0.0) + PI / 2) < 1e-9
    end = pair.switch_fraction if pair.switch_fraction is not None else 1.0
    assert abs(g(end)) < 1e-9


@pytest.mark.parametrize(
    "pair_factory",
    [
        lambda: third_order_pair(1.0),
        lambda: fourth_order_pair(1.0, 2 * PI / 5),
        lambda: fourth_order_pair(1.0, 2 * PI / 6),
        lambda: antedated_pair(1.0, 0.5),
        lambda: antedated_pair(1.0, 1.0 / 3.0),
    ],
)
def test_defining_conditions(pair_factory):
    _assert_endpoint_conditions(pair_factory())


def test_third_order_coefficients():
    pair = third_order_pair(1.0)
    np.testing.assert_allclose(pair.gamma.coefficients, [PI, 0, -3 * PI, 2 * PI], atol=1e-12)
    np.testing.assert_allclose(
        pair.beta.coefficients, [-PI / 2, 1.5 * PI, -1.5 * PI, 0.0], atol=1e-12
    )


def test_third_order_beta_midpoint():
    # beta(s) = -pi/2 + (3pi/2) s (1-s), so beta(1/2) = -pi/8
    pair = third_order_pair(1.0)
    assert pair.beta(0.5) == pytest.approx(-PI / 8, abs=1e-12)


def test_third_order_gamma_strictly_decreasing():
    pair = third_order_pair(1.0)
    dg = pair.gamma.derivative()
    s = np.linspace(1e-4, 1 - 1e-4, 1001)
    assert np.all(dg(s) < 0.0)


def test_fourth_order_monotone_above_threshold():
    pair = fourth_order_pair(1.0, 2 * PI / 5)
    dg = pair.gamma.derivative()
    s = np.linspace(1e-4, 1 - 1e-4, 1001)
    assert np.all(dg(s) < 0.0)
    # decreases from pi to 0 through the imposed midpoint
    assert pair.gamma(0.5) == pytest.approx(2 * PI / 5, abs=1e-12)


def test_fourth_order_reproduces_own_midpoint_condition():
    pair = fourth_order_pair(1.0, PI / 2)
    assert pair.gamma(0.5) == pytest.approx(PI / 2, abs=1e-12)


def test_fourth_order_near_limit_accepted():
    fourth_order_pair(1.0, 2 * PI / 6)  # just above the limit 2 pi / 6.4


def test_fourth_order_below_limit_rejected():
    with pytest.raises(UnphysicalSchedule):
        fourth_order_pair(1.0, critical_gamma_mid() - 0.01)


def test_fourth_order_diagnostic_construction():
    pair = fourth_order_pair(1.0, 2 * PI / 7, enforce_range=False)
    assert pair.gamma(0.5) == pytest.approx(2 * PI / 7, abs=1e-12)


def test_antedated_half_gamma_coefficients():
    pair = antedated_pair(1.0, 0.5)
    np.testing.assert_allclose(
        pair.gamma.coefficients, [PI, 0, -11 * PI, 18 * PI, -8 * PI], atol=1e-10
    )


def test_antedated_half_beta_conditions():
    # the quintic beta for t_a = t_f/2: values at 0, t_a, 11/16, t_f and
    # rates at 0, t_f
    pair = antedated_pair(1.0, 0.5)
    b, db = pair.beta, pair.beta.derivative()
    assert b(0.0) == pytest.approx(-PI / 2, abs=1e-9)
    assert b(0.5) == pytest.approx(-PI / 2, abs=1e-9)
    assert abs(b(11.0 / 16.0)) < 1e-9
    assert b(1.0) == pytest.approx(PI / 2, abs=1e-9)
    assert db(0.0) == pytest.approx(PI / 2, abs=1e-9)
    assert db(1.0) == pytest.approx(-PI / 2, abs=1e-9)


def test_antedated_gamma_negative_dip():
    # evaluating the t_a = t_f/2 quartic at the rate-reversal point:
    # gamma(11/16) = pi (1 - 11 (11/16)^2 + 18 (11/16)^3 - 8 (11/16)^4)
    pair = antedated_pair(1.0, 0.5)
    s = 11.0 / 16.0
    expected = PI * (1 - 11 * s**2 + 18 * s**3 - 8 * s**4)
    assert expected == pytest.approx(-0.1373 * PI, abs=1e-3)
    assert pair.gamma(s) == pytest.approx(expected, abs=1e-9)


def test_antedated_third_ta_crossing_interval():
    pair = antedated_pair(1.0, 1.0 / 3.0)
    t_s = gamma_dot_zero_crossing(pair.gamma)
    assert 1.0 / 3.0 < t_s < 1.0
    # independent check: the rate changes sign across t_s
    dg = pair.gamma.derivative()
    assert dg(t_s - 1e-4) * dg(t_s + 1e-4) < 0


def test_gamma_dot_zero_crossing_at_11_16():
    pair = antedated_pair(1.0, 0.5)
    assert gamma_dot_zero_crossing(pair.gamma) == pytest.approx(11.0 / 16.0, abs=1e-9)


def test_gamma_dot_zero_crossing_monotone_cubic():
    with pytest.raises(NoCrossing):
        gamma_dot_zero_crossing(Polynomial([PI, 0, -3 * PI, 2 * PI]))


def test_antedated_default_beta_dot0():
    pair = antedated_pair(2.0, 1.0)
    assert pair.beta_dot0 == pytest.approx(PI / 4)  # pi / (2 t_f) with t_f = 2


def test_antedated_too_early_rejected():
    with pytest.raises(UnphysicalSchedule):
        antedated_pair(1.0, 0.25)


def test_antedated_too_early_diagnostic_construction():
    pair = antedated_pair(1.0, 0.25, enforce_range=False)
    s = np.linspace(0, 1, 4001)
    assert pair.gamma(s).min() < -PI  # the pathology the range check guards


def test_antedated_invalid_t_a():
    with pytest.raises(ValueError):
        antedated_pair(1.0, 1.5)


def test_critical_gamma_mid_value():
    # reported as 2 pi / 6.40175; the exact threshold is 5 pi / 16
    value = critical_gamma_mid()
    assert value == pytest.approx(2 * PI / 6.40175, rel=1e-3)
    assert value == pytest.approx(5 * PI / 16, abs=1e-6)


def test_critical_gamma_mid_is_positivity_threshold():
    s = np.linspace(0.0, 1.0, 20001)
    above = fourth_order_pair(1.0, critical_gamma_mid() + 0.01)
    assert above.gamma(s).min() >= -1e-12
    below = fourth_order_pair(1.0, critical_gamma_mid() - 0.01, enforce_range=False)
    assert below.gamma(s).min() < 0.0


@pytest.mark.parametrize("factory, kwargs", [
    (third_order_pair, {}),
    (fourth_order_pair, {"gamma_mid": 2 * PI / 5}),
    (antedated_pair, {"t_a_frac": 0.5}),
])
def test_coefficients_independent_of_t_f(factory, kwargs):
    def build(t_f):
        if "t_a_frac" in kwargs:
            return antedated_pair(t_f, kwargs["t_a_frac"] * t_f, 0.5 * PI / t_f)
        return factory(t_f, **kwargs)

    small, large = build(1.0), build(1000.0)
    np.testing.assert_allclose(small.gamma.coefficients, large.gamma.coefficients, atol=1e-12)
    np.testing.assert_allclose(small.beta.coefficients, large.beta.coefficients, atol=1e-12)

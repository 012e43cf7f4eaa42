import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.services.exceptions import BracketOverflow, InvalidYoungFunction, NonFiniteArgument
from src.services.young import (
    BesovVerdict,
    DoublingVerdict,
    YoungFunction,
    besov_summability,
    conjugate_eval,
    convexity_violation,
    derivative,
    doubling_report,
    evaluate,
    log_grid,
    n_function_report,
    young_identity_residual,
)

BUILT_INS = [
    YoungFunction.power(1.5),
    YoungFunction.power(2),
    YoungFunction.power_over_p(3),
    YoungFunction.exp_inverse_square(),
    YoungFunction.power_log(2, 1),
]
DOUBLING = [YoungFunction.power(2), YoungFunction.power_over_p(3), YoungFunction.power_log(2, 1)]


def test_power_values():
    phi = YoungFunction.power(2)
    assert evaluate(phi, 3.0) == 9.0
    assert evaluate(phi, -3.0) == 9.0
    assert isinstance(evaluate(phi, 3.0), float)
    np.testing.assert_allclose(evaluate(phi, np.array([1.0, -2.0])), [1.0, 4.0])


@pytest.mark.parametrize("phi", BUILT_INS, ids=lambda p: p.spec)
def test_zero_only_at_origin(phi):
    assert evaluate(phi, 0.0) == 0.0
    assert derivative(phi, 0.0) == 0.0
    assert evaluate(phi, 0.3) > 0.0


@given(st.floats(min_value=-5, max_value=5), st.floats(min_value=-5, max_value=5))
@hyp_settings(max_examples=200, deadline=None)
def test_even_and_midpoint_convex(x, y):
    for phi in BUILT_INS:
        assert evaluate(phi, x) == evaluate(phi, -x)
        mid = evaluate(phi, 0.5 * (x + y))
        avg = 0.5 * (evaluate(phi, x) + evaluate(phi, y))
        assert mid <= avg + 1e-12 * max(1.0, avg)


@pytest.mark.parametrize("phi", BUILT_INS, ids=lambda p: p.spec)
def test_convexity_on_grid(phi):
    assert convexity_violation(phi, np.linspace(-3, 3, 61)) <= 1e-12


def test_non_finite_argument():
    with pytest.raises(NonFiniteArgument):
        evaluate(YoungFunction.power(2), np.nan)
    with pytest.raises(NonFiniteArgument):
        derivative(YoungFunction.power(2), np.array([1.0, np.inf]))


@pytest.mark.parametrize("factory", [
    lambda: YoungFunction.power(0.5),
    lambda: YoungFunction.power_over_p(0.9),
    lambda: YoungFunction.power_log(2, -1),
    lambda: YoungFunction.exp_inverse_square(1.0),
])
def test_invalid_parameters(factory):
    with pytest.raises(InvalidYoungFunction):
        factory()


@pytest.mark.parametrize("phi", BUILT_INS, ids=lambda p: p.spec)
@pytest.mark.parametrize("t", [0.2, 0.5, 0.9, 1.7])
def test_derivative_matches_central_difference(phi, t):
    h = 1e-6
    numeric = (evaluate(phi, t + h) - evaluate(phi, t - h)) / (2 * h)
    exact = derivative(phi, t)
    assert exact == pytest.approx(numeric, rel=1e-5, abs=1e-12)
    assert derivative(phi, -t) == -exact


def test_exp_inverse_square_is_c1_at_splice():
    phi = YoungFunction.exp_inverse_square()
    splice = phi.params[0]
    below, above = splice * (1 - 1e-9), splice * (1 + 1e-9)
    assert evaluate(phi, below) == pytest.approx(evaluate(phi, above), rel=1e-7)
    assert derivative(phi, below) == pytest.approx(derivative(phi, above), rel=1e-6)


def test_custom_without_derivative_uses_finite_difference():
    phi = YoungFunction.custom(lambda a: a**2)
    assert derivative(phi, 3.0) == pytest.approx(6.0, rel=1e-6)
    assert derivative(phi, -3.0) == pytest.approx(-6.0, rel=1e-6)


def test_scaled():
    phi = YoungFunction.power(2).scaled(2.0)
    assert evaluate(phi, 3.0) == pytest.approx(18.0)
    assert derivative(phi, 3.0) == pytest.approx(12.0)
    with pytest.raises(InvalidYoungFunction):
        YoungFunction.power(2).scaled(0.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_conjugate_of_power_over_p(p):
    q = p / (p - 1)
    s = np.linspace(0.1, 10, 50)
    expected = s**q / q
    np.testing.assert_allclose(conjugate_eval(YoungFunction.power_over_p(p), s), expected, rtol=1e-6)


@given(st.floats(min_value=0, max_value=10), st.floats(min_value=0, max_value=10))
@hyp_settings(max_examples=300, deadline=None)
def test_fenchel_young_inequality(t, s):
    phi = YoungFunction.power_over_p(3)
    assert t * s <= evaluate(phi, t) + conjugate_eval(phi, s) + 1e-8 * (1 + t * s)


def test_conjugate_of_linear_function_overflows():
    with pytest.raises(BracketOverflow):
        conjugate_eval(YoungFunction.power(1), 2.0)


def test_conjugate_at_zero():
    assert conjugate_eval(YoungFunction.power(2), 0.0) == 0.0


def test_doubling_power():
    report = doubling_report(YoungFunction.power(2))
    assert report.verdict is DoublingVerdict.DOUBLING_ON_GRID
    assert report.max_ratio == pytest.approx(4.0)
    assert report.constant == pytest.approx(4.0)


def test_exp_inverse_square_is_not_doubling():
    report = doubling_report(YoungFunction.exp_inverse_square())
    assert report.verdict is DoublingVerdict.NOT_DOUBLING_ON_GRID
    assert report.constant is None


@pytest.mark.parametrize("phi", BUILT_INS, ids=lambda p: p.spec)
def test_doubling_ratio_at_least_two(phi):
    assert doubling_report(phi).max_ratio >= 2.0 - 1e-12


def test_doubling_rejects_bad_grid():
    with pytest.raises(InvalidYoungFunction):
        doubling_report(YoungFunction.power(2), grid=[1.0, 0.0])


@pytest.mark.parametrize("phi", DOUBLING, ids=lambda p: p.spec)
def test_young_identity(phi):
    worst = max(young_identity_residual(phi, t) for t in log_grid(1e-3, 1e3, 21))
    assert worst <= 1e-8


@pytest.mark.parametrize("p, verdicts", [
    (2.0, {BesovVerdict.DIVERGENT_LIKELY}),
    (2.5, {BesovVerdict.DIVERGENT_LIKELY}),
    (3.0, {BesovVerdict.DIVERGENT_LIKELY, BesovVerdict.INCONCLUSIVE}),
    (3.5, {BesovVerdict.CONVERGENT_LIKELY}),
    (4.0, {BesovVerdict.CONVERGENT_LIKELY}),
])
def test_besov_verdict_for_powers(p, verdicts):
    report = besov_summability(YoungFunction.power(p), 3)
    assert report.verdict in verdicts
    assert report.checkpoints[0] == 100
    assert list(report.partial_sums) == sorted(report.partial_sums)


def test_besov_rejects_small_dimension():
    with pytest.raises(InvalidYoungFunction):
        besov_summability(YoungFunction.power(4), 1)


def test_n_function():
    assert n_function_report(YoungFunction.power(2)).is_n_function
    assert not n_function_report(YoungFunction.power(1)).is_n_function
    assert math.isclose(n_function_report(YoungFunction.power(2)).unit_ratio, 1.0)

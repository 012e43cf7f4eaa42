import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.services.exceptions import InvalidParameter, ParseError
from src.services.orlicz import (
    WeightedVector,
    holder_check,
    load_weighted_vector,
    luxemburg_norm,
    luxemburg_solve,
    modular,
    modular_convergence_profile,
    save_weighted_vector,
    scaling_bounds_check,
)
from src.services.young import YoungFunction


def test_modular():
    assert modular(YoungFunction.power(2), WeightedVector([1.0, -2.0], [1.0, 0.5])) == pytest.approx(3.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_matches_p_norm(p, rng):
    phi = YoungFunction.power(p)
    for _ in range(100):
        size = int(rng.integers(1, 65))
        values = rng.normal(size=size)
        weights = rng.uniform(0.5, 2.0, size=size)
        expected = np.sum(weights * np.abs(values) ** p) ** (1 / p)
        assert luxemburg_norm(phi, WeightedVector(values, weights)) == pytest.approx(expected, rel=1e-10)


@given(st.lists(st.floats(min_value=-100, max_value=100), min_size=1, max_size=20),
       st.floats(min_value=0.01, max_value=100))
@hyp_settings(max_examples=100, deadline=None)
def test_homogeneous(values, c):
    phi = YoungFunction.power_log(2, 1)
    f = WeightedVector.uniform(values)
    scaled = f.with_values(c * f.values)
    assert luxemburg_norm(phi, scaled) == pytest.approx(c * luxemburg_norm(phi, f), rel=1e-9, abs=1e-300)


@given(st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=20),
       st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=20))
@hyp_settings(max_examples=100, deadline=None)
def test_triangle_inequality(a, b):
    size = min(len(a), len(b))
    phi = YoungFunction.power_over_p(3)
    f, g = WeightedVector.uniform(a[:size]), WeightedVector.uniform(b[:size])
    total = luxemburg_norm(phi, f.with_values(f.values + g.values))
    assert total <= (luxemburg_norm(phi, f) + luxemburg_norm(phi, g)) * (1 + 1e-9) + 1e-300


@pytest.mark.parametrize("phi", [YoungFunction.power(2), YoungFunction.exp_inverse_square()], ids=lambda p: p.spec)
def test_modular_at_norm_is_one(phi, rng):
    solution = luxemburg_solve(phi, WeightedVector.uniform(rng.uniform(-0.5, 0.5, size=16)))
    assert solution.norm > 0
    assert 1.0 - 1e-8 <= solution.modular_at_norm <= 1.0


def test_zero_vector():
    solution = luxemburg_solve(YoungFunction.power(2), WeightedVector.uniform(np.zeros(4)))
    assert solution.norm == 0.0
    assert solution.steps == 0


def test_weights_must_be_positive():
    with pytest.raises(InvalidParameter):
        WeightedVector([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(InvalidParameter):
        WeightedVector([1.0, 2.0], [1.0])


@pytest.mark.parametrize("phi", [YoungFunction.power(2), YoungFunction.power_over_p(3)], ids=lambda p: p.spec)
def test_holder(phi, rng):
    for _ in range(20):
        weights = rng.uniform(0.5, 2.0, size=12)
        lhs, rhs = holder_check(phi, WeightedVector(rng.normal(size=12), weights),
                                WeightedVector(rng.normal(size=12), weights))
        assert lhs <= rhs


def test_holder_needs_matching_weights():
    with pytest.raises(InvalidParameter):
        holder_check(YoungFunction.power(2), WeightedVector([1.0], [1.0]), WeightedVector([1.0], [2.0]))


@pytest.mark.parametrize("lam", [0.5, 2.0, 4.0])
def test_scaling_bounds(lam, rng):
    f = WeightedVector.uniform(rng.normal(size=10))
    base, scaled, constant = scaling_bounds_check(YoungFunction.power_over_p(3), lam, f)
    assert constant == max(lam, 1 / lam)
    assert base / constant <= scaled * (1 + 1e-9)
    assert scaled <= constant * base * (1 + 1e-9)


def test_modular_and_norm_vanish_together():
    profile = modular_convergence_profile(YoungFunction.power(2), WeightedVector.uniform([3.0, 4.0]), [1, 10, 100])
    assert profile[0][1] == pytest.approx(5.0)
    assert profile[-1][1] == pytest.approx(0.05)
    assert profile[-1][2] == pytest.approx(0.0025)


def test_weighted_vector_file(tmp_path):
    path = tmp_path / "f.csv"
    save_weighted_vector(WeightedVector([3.0, -4.0], [1.0, 2.0]), path)
    f = load_weighted_vector(path)
    np.testing.assert_array_equal(f.values, [3.0, -4.0])
    np.testing.assert_array_equal(f.weights, [1.0, 2.0])


@pytest.mark.parametrize("text, line, field", [
    ("1,1\n2,abc\n", 2, 2),
    ("1,1\n2\n", 2, 1),
    ("# comment\nnan,1\n", 2, 1),
])
def test_weighted_vector_parse_errors(tmp_path, text, line, field):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_weighted_vector(path)
    assert info.value.line == line
    assert info.value.field == field

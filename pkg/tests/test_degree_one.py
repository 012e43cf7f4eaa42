import math

import numpy as np
import pytest

from src.services.cochain import DenseCochain, coboundary, random_cochain, seminorm, to_dense
from src.services.degree_one import (
    NormBudget,
    as_cocycle,
    dist_to_coboundaries,
    extend_tree_cochain,
    f2_budget_sweep,
    f2_closed_form,
    f2_example,
    is_cocycle,
    norm_equivalence_check,
    primitive,
)
from src.services.exceptions import (
    InvalidParameter,
    NonConvergence,
    NotACocycle,
    ScaleTooSmall,
    TruncationTooSmall,
)
from src.services.spaces import build_path
from src.services.transfer import QuasiIsometry, ball_kernel, pullback, tightest_constants
from src.services.young import YoungFunction


@pytest.fixture
def exact(path11, rng):
    f = random_cochain(path11, 0, rng)
    return f, coboundary(f)


def test_coboundary_is_cocycle(exact):
    _, df = exact
    check = is_cocycle(df)
    assert check.ok
    assert check.exhaustive
    assert check.checked == 11 ** 3
    assert check.worst_triple is None


def test_random_cochain_is_not_cocycle(path11, rng):
    check = is_cocycle(random_cochain(path11, 1, rng))
    assert not check.ok
    assert check.worst_triple is not None
    assert check.worst_violation > 0


def test_sampled_cocycle_check(exact):
    check = is_cocycle(exact[1], max_triples=100)
    assert check.ok
    assert not check.exhaustive
    assert check.checked == 100


def test_primitive(exact):
    f, df = exact
    np.testing.assert_allclose(primitive(df).values, f.values - f.values[0], atol=1e-12)
    np.testing.assert_allclose(primitive(df, z0=4).values, f.values - f.values[4], atol=1e-12)
    with pytest.raises(InvalidParameter):
        primitive(df, z0=11)


def test_as_cocycle_rejects(path11, rng):
    with pytest.raises(NotACocycle):
        as_cocycle(random_cochain(path11, 1, rng))
    with pytest.raises(InvalidParameter):
        as_cocycle(random_cochain(path11, 0, rng))


def test_extend_tree_cochain(path11):
    edges = [(i, i + 1) for i in range(10)]
    omega = extend_tree_cochain(path11, edges, np.ones(10))
    assert omega.value(2, 7) == 5.0
    assert omega.value(7, 2) == -5.0
    assert is_cocycle(omega).ok


def test_extend_tree_cochain_inconsistent(path11):
    edges = [(0, 1), (1, 2), (0, 2)] + [(i, i + 1) for i in range(2, 10)]
    values = [1.0, 1.0, 5.0] + [1.0] * 8
    with pytest.raises(NotACocycle):
        extend_tree_cochain(path11, edges, values)


def test_extend_tree_cochain_unreached(path11):
    with pytest.raises(InvalidParameter):
        extend_tree_cochain(path11, [(0, 1)], [1.0])


def test_norm_equivalence(exact):
    report = norm_equivalence_check(exact[1], YoungFunction.power(2), 4.5, 9.0)
    assert report.t0 == 4.0
    assert report.r0 == 0.0
    assert report.steps == 2
    assert report.holds
    assert report.n1 <= report.n2


def test_norm_equivalence_scale_too_small(exact):
    with pytest.raises(ScaleTooSmall):
        norm_equivalence_check(exact[1], YoungFunction.power(2), 3.0, 9.0)


def test_distance_of_coboundary_vanishes(exact):
    result = dist_to_coboundaries(exact[1], YoungFunction.power(2), 1.0)
    assert result.converged
    assert result.dist <= 1e-8


def test_distance_of_random_cochain(path11, rng):
    phi = YoungFunction.power(2)
    u = random_cochain(path11, 1, rng)
    result = dist_to_coboundaries(u, phi, 1.0, strict=False)
    assert 0 < result.dist <= seminorm(u, phi, 1.0)
    assert result.argmin.degree == 0


def test_distance_is_attained_by_argmin(path11, rng):
    phi = YoungFunction.power_over_p(3)
    u = random_cochain(path11, 1, rng)
    result = dist_to_coboundaries(u, phi, 1.0, max_iter=50, strict=False)
    residual = u - to_dense(coboundary(result.argmin))
    assert seminorm(residual, phi, 1.0) == pytest.approx(result.dist, rel=1e-9)


def test_distance_energy_monotone_within_rounds(path11, rng):
    result = dist_to_coboundaries(random_cochain(path11, 1, rng), YoungFunction.power_over_p(3), 1.0, strict=False)
    for before, after in zip(result.log, result.log[1:]):
        if after.step == 0:
            continue
        assert after.energy <= before.energy * (1 + 1e-12) + 1e-12


def test_zero_budget_keeps_seminorm(path11, rng):
    phi = YoungFunction.power(2)
    u = random_cochain(path11, 1, rng)
    result = dist_to_coboundaries(u, phi, 1.0, constraint=NormBudget(0.0), strict=False)
    assert result.dist == pytest.approx(seminorm(u, phi, 1.0), rel=1e-12)
    np.testing.assert_array_equal(result.argmin.values, 0.0)


def test_budget_validation():
    with pytest.raises(InvalidParameter):
        NormBudget(-1.0)


def test_distance_strict_cap(path11, rng):
    u = random_cochain(path11, 1, rng)
    with pytest.raises(NonConvergence) as info:
        dist_to_coboundaries(u, YoungFunction.power_over_p(3), 1.0, max_iter=1, step_tol=0.0)
    assert info.value.best is not None
    assert info.value.best.dist <= seminorm(u, YoungFunction.power_over_p(3), 1.0) * (1 + 1e-12)


def test_f2_closed_form():
    assert f2_closed_form(0.5, 4) == pytest.approx(0.281946, rel=1e-5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_f2_edge_count_and_gap(n):
    example = f2_example(0.5, n, n + 1)
    assert example.exact_edge_count == 3 * (3**n - 1)
    assert example.exact_edge_count == example.analytic_edge_count
    assert 1.0 <= example.count_ratio < 1.5
    expected = 0.5 * math.sqrt(math.log(3 * (3**n - 1))) / n
    assert example.norm_gap == pytest.approx(expected, rel=1e-10)
    assert example.modular_at_gap == pytest.approx(example.analytic_modular_at_gap, abs=1e-10)
    assert example.modular_at_gap == pytest.approx(1.0, abs=1e-9)


def test_f2_gaps_decrease():
    examples = [f2_example(0.5, n, n + 1) for n in range(2, 7)]
    gaps = [example.norm_gap for example in examples]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    for example in examples:
        assert 0.5 <= example.alpha_closed_form / example.norm_gap <= 2.0


def test_f2_cochains():
    example = f2_example(0.5, 2, 3)
    assert example.omega[("1", "a")] == 0.5
    assert example.omega[("a", "1")] == -0.5
    assert example.omega_n[("1", "a")] == pytest.approx(0.5)
    assert example.f_n["a"] == 0.5
    assert example.f_n["ab"] == pytest.approx(0.25)
    assert "b" not in example.f_n
    assert example.omega_norm == f2_example(0.5, 2, 5).omega_norm


def test_f2_arguments():
    with pytest.raises(TruncationTooSmall):
        f2_example(0.5, 3, 3)
    with pytest.raises(InvalidParameter):
        f2_example(1.0, 2, 3)
    with pytest.raises(InvalidParameter):
        f2_example(0.5, 0, 3)
    with pytest.raises(TruncationTooSmall):
        f2_budget_sweep(0.5, [1, 4], 4)


def test_f2_budget_sweep():
    rows = f2_budget_sweep(0.5, [1, 2, 3], 4, max_iter=2000)
    assert [row.n for row in rows] == [1, 2, 3]
    dists = [row.dist for row in rows]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(dists, dists[1:]))
    budgets = [row.budget for row in rows]
    assert all(b > a for a, b in zip(budgets, budgets[1:]))
    for row in rows:
        assert 0 <= row.dist <= row.norm_gap


def test_quasi_inverses_agree_on_cohomology(rng):
    small, large = build_path(5), build_path(9)
    points = np.arange(9)
    kernel = ball_kernel(small, 1.5)
    u = coboundary(random_cochain(small, 0, rng))
    pulled = []
    for back in (points // 2, (points + 1) // 2):
        lam, eps = tightest_constants(large, small, back)
        pulled.append(pullback(QuasiIsometry(large, small, back, lam, eps), kernel, u))
    difference = pulled[0] - pulled[1]
    phi = YoungFunction.power(2)
    assert seminorm(difference, phi, 1.0) > 1e-6
    result = dist_to_coboundaries(difference, phi, 1.0)
    assert result.converged
    assert result.dist <= 1e-8

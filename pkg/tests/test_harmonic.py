import numpy as np
import pytest

from src.services.exceptions import (
    BoundaryViolation,
    DegenerateProblem,
    InvalidParameter,
    InvalidSpace,
    NonConvergence,
    ParseError,
)
from src.services.harmonic import (
    GeneratorStructure,
    conjugate_bound_check,
    dirichlet_modular,
    dirichlet_norm,
    energy,
    gateaux_gradient,
    harmonic_decompose,
    linear_dirichlet_solve,
    load_generator_structure,
    load_vertex_function,
    phi_laplacian,
    save_generator_structure,
    save_iteration_log,
    save_vertex_function,
    z_example,
)
from src.services.spaces import FreeGroup, enumerate_cayley_ball
from src.services.young import YoungFunction

K = np.arange(11, dtype=float)


def free_group_structure():
    return GeneratorStructure.from_cayley_ball(enumerate_cayley_ball(FreeGroup(2), 2))


def ring(n):
    idx = np.arange(n)
    neighbors = np.column_stack([(idx + 1) % n, (idx - 1) % n])
    return GeneratorStructure(neighbors, np.array([1, 0]), np.array([], dtype=np.int64), np.ones(n), np.ones(2))


def test_path_structure():
    gs = GeneratorStructure.path(11)
    np.testing.assert_array_equal(gs.interior, np.arange(1, 10))
    np.testing.assert_array_equal(gs.boundary, [0, 10])
    assert gs.exiting_edge_count == 2


def test_structure_validation():
    gs = GeneratorStructure.path(11)
    with pytest.raises(InvalidSpace):
        GeneratorStructure(gs.neighbors, gs.inverse, np.array([0]), gs.weights, gs.generator_weights)
    with pytest.raises(InvalidSpace):
        GeneratorStructure(gs.neighbors, np.array([0, 1]), gs.boundary, gs.weights, gs.generator_weights)
    with pytest.raises(InvalidParameter):
        GeneratorStructure.path(1)


def test_free_group_structure():
    gs = free_group_structure()
    assert gs.n_points == 17
    assert gs.boundary.size == 12
    assert gs.interior.size == 5


def test_dirichlet_modular_and_laplacian():
    gs = GeneratorStructure.path(11)
    phi = YoungFunction.power(2)
    assert dirichlet_modular(phi, K, gs) == 20.0
    assert dirichlet_norm(phi, K, gs) == pytest.approx(np.sqrt(20.0), rel=1e-10)
    np.testing.assert_allclose(phi_laplacian(phi, K, gs), 0.0)
    np.testing.assert_allclose(phi_laplacian(phi, K**2, gs), 4.0)


def test_energy_boundary():
    gs = GeneratorStructure.path(11)
    phi = YoungFunction.power(2)
    assert energy(phi, K, np.zeros(11), gs) == 20.0
    g = np.zeros(11)
    g[0] = 1.0
    with pytest.raises(BoundaryViolation):
        energy(phi, K, g, gs)
    with pytest.raises(BoundaryViolation):
        gateaux_gradient(phi, K, g, gs)


@pytest.mark.parametrize("gs", [GeneratorStructure.path(11), GeneratorStructure.grid(5, 5), free_group_structure()],
                         ids=["path", "grid", "f2"])
@pytest.mark.parametrize("phi", [YoungFunction.power(2), YoungFunction.power_over_p(3)], ids=lambda p: p.spec)
def test_gateaux_matches_finite_difference(gs, phi, rng):
    f = rng.normal(size=gs.n_points)
    g = rng.normal(size=gs.n_points)
    g[gs.boundary] = 0.0
    grad = gateaux_gradient(phi, f, g, gs)
    np.testing.assert_array_equal(grad.coefficients, -grad.gradient)
    np.testing.assert_array_equal(grad.gradient[gs.boundary], 0.0)
    h = 1e-6
    for _ in range(50):
        delta = rng.normal(size=gs.n_points)
        delta[gs.boundary] = 0.0
        numeric = (energy(phi, f, g + h * delta, gs) - energy(phi, f, g - h * delta, gs)) / (2 * h)
        exact = grad.directional(delta)
        assert abs(numeric - exact) <= 1e-5 * max(1.0, abs(exact))
        assert grad.functional(delta) == -exact


def test_gateaux_rejects_boundary_direction():
    gs = GeneratorStructure.path(11)
    grad = gateaux_gradient(YoungFunction.power(2), K, np.zeros(11), gs)
    with pytest.raises(BoundaryViolation):
        grad.directional(np.ones(11))


def test_power_two_path_is_linear():
    gs = GeneratorStructure.path(11)
    result = harmonic_decompose(YoungFunction.power(2), K**2, gs, tol=1e-10)
    assert result.converged
    np.testing.assert_allclose(result.h.values, 10.0 * K, atol=1e-8)
    np.testing.assert_allclose(result.u.values + result.h.values, K**2)
    assert result.u.values[0] == 0.0 and result.u.values[10] == 0.0
    assert result.harmonic_residual <= 1e-10


def test_power_two_grid_matches_linear_solve(rng):
    gs = GeneratorStructure.grid(5, 5)
    f = rng.normal(size=25)
    result = harmonic_decompose(YoungFunction.power(2), f, gs, tol=1e-10)
    np.testing.assert_allclose(result.h.values, linear_dirichlet_solve(gs, f), atol=1e-8)
    np.testing.assert_array_equal(result.h.values[gs.boundary], f[gs.boundary])


@pytest.mark.parametrize("gs", [
    GeneratorStructure.grid(22, 22),
    GeneratorStructure.from_cayley_ball(enumerate_cayley_ball(FreeGroup(2), 5)),
], ids=["grid 22x22", "f2 ball 5"])
def test_power_two_matches_linear_solve_at_scale(gs, rng):
    f = rng.normal(size=gs.n_points)
    result = harmonic_decompose(YoungFunction.power(2), f, gs, tol=1e-10)
    assert result.converged
    np.testing.assert_allclose(result.h.values, linear_dirichlet_solve(gs, f), atol=1e-8)


def test_empty_boundary_is_degenerate():
    with pytest.raises(DegenerateProblem):
        harmonic_decompose(YoungFunction.power(2), np.arange(6.0), ring(6))


def test_decomposition_is_unique(rng):
    gs = GeneratorStructure.grid(5, 5)
    phi = YoungFunction.power_log(2, 1)
    f = rng.normal(size=25)
    start = rng.normal(size=25)
    start[gs.boundary] = 0.0
    first = harmonic_decompose(phi, f, gs, tol=1e-10)
    second = harmonic_decompose(phi, f, gs, tol=1e-10, initial=start)
    np.testing.assert_allclose(first.h.values, second.h.values, atol=1e-6)


def test_decomposition_energy_monotone(rng):
    gs = GeneratorStructure.grid(5, 5)
    result = harmonic_decompose(YoungFunction.power_over_p(3), rng.normal(size=25), gs)
    energies = [record.energy for record in result.iterations]
    for before, after in zip(energies, energies[1:]):
        assert after <= before * (1 + 1e-12)
    assert result.energy == energies[-1]


def test_strict_cap_raises():
    gs = GeneratorStructure.path(11)
    with pytest.raises(NonConvergence) as info:
        harmonic_decompose(YoungFunction.power_over_p(3), K**2, gs, max_iter=1, strict=True)
    assert not info.value.best.converged
    flagged = harmonic_decompose(YoungFunction.power_over_p(3), K**2, gs, max_iter=1)
    assert not flagged.converged


def test_pop_three_path_has_constant_increments():
    gs = GeneratorStructure.path(11)
    result = harmonic_decompose(YoungFunction.power_over_p(3), K**2, gs)
    assert result.converged
    increments = np.diff(result.h.values)
    assert np.ptp(increments) <= 1e-6
    assert increments.mean() == pytest.approx(10.0, rel=1e-6)


def test_power_below_two_with_flat_harmonic_part():
    gs = GeneratorStructure.path(11)
    result = harmonic_decompose(YoungFunction.power(1.5), K * (10 - K) / 10, gs, max_iter=20000)
    assert result.converged
    assert np.ptp(result.h.values) <= 1e-12
    assert result.harmonic_residual <= 1e-8


def test_tie_floor_zeroes_tiny_increments():
    gs = GeneratorStructure.path(5)
    f = np.array([0.0, 1e-15, 0.0, 2.0, 0.0])
    phi = YoungFunction.power(1.5)
    assert phi_laplacian(phi, f, gs)[0] != 0.0
    lap = phi_laplacian(phi, f, gs, tie_floor=1e-12)
    assert lap[0] == 0.0
    assert lap[2] == phi_laplacian(phi, f, gs)[2]


def test_z_example():
    report = z_example(YoungFunction.power(2), 20)
    assert report.converged
    assert report.increments_constant
    assert report.slope == pytest.approx(1.0, abs=1e-6)
    assert report.modular_growth_ratio == pytest.approx(2.0)
    assert not report.linear_in_surrogate
    assert report.constant_case_spread <= 1e-6
    assert len(report.increments) == 20
    with pytest.raises(InvalidParameter):
        z_example(YoungFunction.power(2), 1)


@pytest.mark.parametrize("phi", [
    YoungFunction.power_over_p(3),
    YoungFunction.power_log(2, 1),
    YoungFunction.power(1.5),
], ids=lambda p: p.spec)
def test_z_example_non_quadratic(phi):
    report = z_example(phi, 50)
    assert report.converged
    assert report.increments_constant
    assert report.slope == pytest.approx(1.0, abs=1e-6)
    assert report.modular_growth_ratio == pytest.approx(2.0)
    assert report.constant_case_spread <= 1e-6


@pytest.mark.parametrize("phi", [YoungFunction.power(2), YoungFunction.power_over_p(3)], ids=lambda p: p.spec)
def test_conjugate_bound(phi, rng):
    gs = GeneratorStructure.grid(5, 5)
    for _ in range(10):
        lhs, rhs = conjugate_bound_check(phi, rng.normal(size=25), gs)
        assert lhs <= rhs * (1 + 1e-9)


def test_conjugate_bound_needs_doubling(rng):
    with pytest.raises(InvalidParameter):
        conjugate_bound_check(YoungFunction.exp_inverse_square(), rng.normal(size=25), GeneratorStructure.grid(5, 5))


def test_generator_structure_file(tmp_path):
    gs = GeneratorStructure.grid(3, 4)
    path = tmp_path / "grid.gs"
    save_generator_structure(gs, path)
    loaded = load_generator_structure(path)
    np.testing.assert_array_equal(loaded.neighbors, gs.neighbors)
    np.testing.assert_array_equal(loaded.inverse, gs.inverse)
    np.testing.assert_array_equal(loaded.boundary, gs.boundary)
    np.testing.assert_array_equal(loaded.generator_weights, gs.generator_weights)


def test_generator_structure_parse_errors(tmp_path):
    path = tmp_path / "bad.gs"
    path.write_text("3 2\n1.0 1.0\n1 0\n1 -1\n2 zz\n-1 1\n0 2\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_generator_structure(path)
    assert (info.value.line, info.value.field) == (5, 2)
    path.write_text("3 2\n1.0 1.0\n1 0\n1 -1\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_generator_structure(path)


def test_vertex_function_file(tmp_path):
    path = tmp_path / "f.csv"
    save_vertex_function(K**2, path)
    np.testing.assert_array_equal(load_vertex_function(path), K**2)
    path.write_text("# values\n1.0\nabc\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_vertex_function(path)
    assert info.value.line == 3


def test_iteration_log_file(tmp_path):
    gs = GeneratorStructure.path(11)
    result = harmonic_decompose(YoungFunction.power(2), K**2, gs)
    path = tmp_path / "log.csv"
    save_iteration_log(result.iterations, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "step,energy,gradient_sup,step_sup"
    assert len(lines) == len(result.iterations) + 1

"""Degree-one cohomology.

Cocycle detection and primitives, the scale-change norm equivalence for
cocycles, the distance from a cocycle to the coboundaries, and the free
group example of a cocycle that is a norm limit of coboundaries for a
non-doubling Young function.
"""
import logging
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from src.conf.config import settings
from src.services.cochain import Cochain, DenseCochain, seminorm, to_dense
from src.services.descent import IterationRecord, minimize
from src.services.exceptions import (
    InvalidParameter,
    NonConvergence,
    NotACocycle,
    ScaleTooSmall,
    TruncationTooSmall,
)
from src.services.orlicz import WeightedVector, luxemburg_norm
from src.services.spaces import (
    FiniteMeasureSpace,
    FreeGroup,
    ball_measures,
    build_cayley_ball,
    enumerate_cayley_ball,
    enumerate_simplices,
    midpoint_constant,
)
from src.services.young import DEFAULT_SPLICE, YoungFunction
from src.templates.message import (
    BAD_DEGREE,
    DESCENT_NON_CONVERGENCE,
    INVALID_PARAMETER,
    NOT_A_COCYCLE,
    SCALE_TOO_SMALL,
    TRUNCATION_TOO_SMALL,
)

logger = logging.getLogger(__name__)

_EQUIVALENCE_STEP = 1.5
_MAX_ROUNDS = 25


def _check_degree_one(u: Cochain) -> None:
    if u.degree != 1:
        raise InvalidParameter(BAD_DEGREE.format(degree=u.degree) + " (expected 1)")


# Cocycles

@dataclass(frozen=True)
class CocycleCheck:
    ok: bool
    worst_triple: tuple[int, int, int] | None
    worst_violation: float
    exhaustive: bool
    checked: int


def is_cocycle(u: Cochain, tol: float | None = None, seed: int = 0,
               max_triples: int | None = None) -> CocycleCheck:
    """Check u(x,y) = u(z,y) − u(z,x) on every triple.

    Above ``max_triples`` triples a seeded uniform sample of that size is
    checked instead.

    Args:
        u (Cochain): A 1-cochain.
        tol (float | None): Absolute tolerance, defaults to settings.
        seed (int): Sampling seed.
        max_triples (int | None): Exhaustive-check cap, defaults to settings.

    Returns:
        CocycleCheck: Verdict with the worst triple (x, y, z) found.
    """
    _check_degree_one(u)
    tol = settings.cocycle_tol if tol is None else tol
    max_triples = int(max_triples or settings.max_exhaustive_triples)
    n = u.space.n_points
    worst, worst_triple = 0.0, None

    if n**3 <= max_triples:
        values = to_dense(u).values
        for z in range(n):
            defect = np.abs(values - (values[z][None, :] - values[z][:, None]))
            idx = int(np.argmax(defect))
            if defect.flat[idx] > worst:
                x, y = divmod(idx, n)
                worst, worst_triple = float(defect.flat[idx]), (x, y, z)
        checked, exhaustive = n**3, True
    else:
        rng = np.random.default_rng(seed)
        x, y, z = rng.integers(0, n, size=(3, max_triples))
        defect = np.abs(u.values_at(np.column_stack([x, y]))
                        - (u.values_at(np.column_stack([z, y])) - u.values_at(np.column_stack([z, x]))))
        idx = int(np.argmax(defect))
        if defect[idx] > 0:
            worst, worst_triple = float(defect[idx]), (int(x[idx]), int(y[idx]), int(z[idx]))
        checked, exhaustive = max_triples, False
    return CocycleCheck(worst <= tol, worst_triple if worst > tol else None, worst, exhaustive, checked)


@dataclass(frozen=True, eq=False)
class Cocycle:
    """A 1-cochain that passed the cocycle check, with its primitive at ``basepoint``."""
    cochain: Cochain
    basepoint: int
    primitive: DenseCochain

    @property
    def space(self) -> FiniteMeasureSpace:
        return self.cochain.space

    @property
    def degree(self) -> int:
        return 1


def as_cocycle(u: Cochain, z0: int = 0, tol: float | None = None) -> Cocycle:
    """Validate u and attach its primitive f_u(x) = u(z₀, x).

    Raises:
        NotACocycle: With the worst violating triple.
    """
    if isinstance(u, Cocycle):
        return u if u.basepoint == z0 else Cocycle(u.cochain, z0, _primitive_values(u.cochain, z0))
    check = is_cocycle(u, tol)
    if not check.ok:
        raise NotACocycle(NOT_A_COCYCLE.format(violation=f"{check.worst_violation:.3e}", triple=check.worst_triple))
    return Cocycle(u, z0, _primitive_values(u, z0))


def _primitive_values(u: Cochain, z0: int) -> DenseCochain:
    n = u.space.n_points
    if not 0 <= z0 < n:
        raise InvalidParameter(INVALID_PARAMETER.format(name="z0", value=z0, reason=f"must be a point index below {n}"))
    pairs = np.column_stack([np.full(n, z0), np.arange(n)])
    return DenseCochain(u.space, 0, u.values_at(pairs))


def primitive(u: Cochain | Cocycle, z0: int = 0) -> DenseCochain:
    """f_u(x) = u(z₀, x), so that d f_u = u.

    Raises:
        NotACocycle: If u is a plain cochain failing the cocycle check.
    """
    return as_cocycle(u, z0).primitive


def extend_tree_cochain(space: FiniteMeasureSpace, edges, values, root: int = 0,
                        tol: float | None = None) -> DenseCochain:
    """Extend antisymmetric edge values to the cocycle ω(x, y) = F(y) − F(x).

    F sums the edge values along BFS tree paths from ``root``; on a tree
    this is the path sum. Edges off the BFS tree must agree with F.

    Raises:
        InvalidParameter: If the edge graph does not reach every point.
        NotACocycle: If the edge values are not the differences of one potential.
    """
    tol = settings.cocycle_tol if tol is None else tol
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    values = np.asarray(values, dtype=float).ravel()
    graph = nx.Graph()
    graph.add_nodes_from(range(space.n_points))
    signed = {}
    for (a, b), val in zip(edges.tolist(), values.tolist()):
        graph.add_edge(a, b)
        signed[(a, b)] = val
        signed.setdefault((b, a), -val)

    potential = np.full(space.n_points, np.nan)
    potential[root] = 0.0
    for parent, child in nx.bfs_edges(graph, root):
        potential[child] = potential[parent] + signed[(parent, child)]
    if np.isnan(potential).any():
        missing = int(np.flatnonzero(np.isnan(potential))[0])
        raise InvalidParameter(INVALID_PARAMETER.format(name="edges", value=missing, reason="point not reached from root"))

    defect = np.abs(potential[edges[:, 1]] - potential[edges[:, 0]] - values)
    if defect.size and defect.max() > tol:
        a, b = edges[int(np.argmax(defect))]
        raise NotACocycle(NOT_A_COCYCLE.format(violation=f"{defect.max():.3e}", triple=(int(a), int(b), root)))
    return DenseCochain(space, 1, potential[None, :] - potential[:, None])


# Norm equivalence

@dataclass(frozen=True)
class NormEquivalenceReport:
    """‖u‖_{φ,t1}, ‖u‖_{φ,t2} and the chained constant bounding the larger by the smaller."""
    n1: float
    n2: float
    bound_constant: float
    t0: float
    r0: float
    steps: int
    holds: bool


def norm_equivalence_check(u: Cochain | Cocycle, phi: YoungFunction, t1: float, t2: float) -> NormEquivalenceReport:
    """Compare the cocycle seminorms at two scales.

    One step from t to 3t/2 costs the factor 2V̄(t)/v(t/8), with V̄ the
    largest closed-ball measure and v the smallest open-ball measure. Steps
    are chained from the smaller scale until the larger one is reached.

    Raises:
        NotACocycle: If u is not a cocycle.
        ScaleTooSmall: If min(t1, t2) ≤ t₀ = max(8𝔠, 8r₀).
    """
    cocycle = as_cocycle(u)
    space = cocycle.space
    r0 = 0.0
    t0 = max(8.0 * midpoint_constant(space), 8.0 * r0)
    low, high = sorted((float(t1), float(t2)))
    if low <= t0:
        raise ScaleTooSmall(SCALE_TOO_SMALL.format(t=low, t0=t0))

    constant, t, steps = 1.0, low, 0
    while t < high * (1.0 - 1e-12):
        big = float(ball_measures(space, t, closed=True).max())
        small = float(ball_measures(space, t / 8.0).min())
        constant *= 2.0 * big / small
        t *= _EQUIVALENCE_STEP
        steps += 1

    n1 = seminorm(cocycle.cochain, phi, t1)
    n2 = seminorm(cocycle.cochain, phi, t2)
    n_low, n_high = (n1, n2) if t1 <= t2 else (n2, n1)
    holds = n_high <= constant * n_low * (1.0 + 1e-9) + 1e-300
    return NormEquivalenceReport(n1, n2, constant, t0, r0, steps, holds)


# Distance to coboundaries

@dataclass(frozen=True)
class AllFunctions:
    """No constraint on the primitive."""


@dataclass(frozen=True)
class NormBudget:
    """Primitives with ‖f‖_φ ≤ radius (Luxemburg norm against the point measure)."""
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise InvalidParameter(INVALID_PARAMETER.format(name="radius", value=self.radius, reason="must be >= 0"))


Constraint = AllFunctions | NormBudget


@dataclass
class CoboundaryDistance:
    dist: float
    argmin: DenseCochain
    converged: bool
    rounds: int
    log: list[IterationRecord] = field(default_factory=list)


def _budget_projection(phi: YoungFunction, weights: np.ndarray, radius: float):
    def project(f: np.ndarray) -> np.ndarray:
        size = luxemburg_norm(phi, WeightedVector(f, weights))
        if size <= radius:
            return f
        return f * (radius / size)
    return project


def _minimize_pair_residual(target: np.ndarray, pairs: np.ndarray, pair_weights: np.ndarray,
                            point_weights: np.ndarray, phi: YoungFunction, constraint: Constraint,
                            f0: np.ndarray, step_tol: float | None, max_iter: int | None):
    """Minimise f ↦ ‖target − (f[j] − f[i])‖_φ over the pairs (i, j).

    Each round minimises the modular of the residual divided by its current
    norm c, in the variable z with f = f_round + c·z; rounds repeat while c
    keeps halving.

    Returns:
        tuple: (distance, argmin, converged, rounds, log)
    """
    n = point_weights.size
    first, second = pairs[:, 0], pairs[:, 1]
    project_f = None
    if isinstance(constraint, NormBudget):
        project_f = _budget_projection(phi, point_weights, constraint.radius)
    f = np.array(f0, dtype=float) if project_f is None else project_f(np.array(f0, dtype=float))
    max_iter = int(max_iter or settings.descent_max_iter)

    def residual(values: np.ndarray) -> np.ndarray:
        return target - (values[second] - values[first])

    def norm_of(values: np.ndarray) -> float:
        return luxemburg_norm(phi, WeightedVector(residual(values), pair_weights))

    c = norm_of(f)
    log: list[IterationRecord] = []
    converged, rounds = True, 0
    initial = c
    while c > 0 and rounds < _MAX_ROUNDS and max_iter > 0:
        base, scale = f, c

        def objective(z: np.ndarray) -> float:
            with np.errstate(over="ignore"):
                r = residual(base + scale * z) / scale
                return float(np.dot(pair_weights, phi.eval_abs(np.abs(r))))

        def gradient(z: np.ndarray) -> np.ndarray:
            r = residual(base + scale * z) / scale
            with np.errstate(over="ignore"):
                coef = pair_weights * np.sign(r) * phi.deriv_abs(np.abs(r))
            return np.bincount(first, coef, n) - np.bincount(second, coef, n)

        project = None
        if project_f is not None:
            def project(z: np.ndarray) -> np.ndarray:
                return (project_f(base + scale * z) - base) / scale

        result = minimize(objective, gradient, np.zeros(n), project=project,
                          max_iter=max_iter, step_tol=step_tol)
        max_iter -= result.iterations
        rounds += 1
        log.extend(result.log)
        candidate = base + scale * result.x
        candidate_c = norm_of(candidate)
        if candidate_c <= c:
            f = candidate
        new_c = min(candidate_c, c)
        if not result.converged:
            converged = False
            c = new_c
            break
        shrunk = new_c <= 0.5 * c
        c = new_c
        if not shrunk or c <= 1e-14 * initial:
            break
    return c, f, converged, rounds, log


def dist_to_coboundaries(u: Cochain | Cocycle, phi: YoungFunction, s: float,
                         constraint: Constraint | None = None, f0=None, step_tol: float | None = None,
                         max_iter: int | None = None, strict: bool = True) -> CoboundaryDistance:
    """inf_f ‖u − df‖_{φ,s} over all f, or over the Luxemburg ball of a NormBudget.

    Minimises the modular of the normalised residual by projected gradient
    descent, then converts back to the Luxemburg norm. The returned distance
    is never above ‖u − d f0‖_{φ,s}.

    Args:
        u (Cochain | Cocycle): The 1-cochain.
        phi (YoungFunction): The Young function.
        s (float): Scale of the seminorm.
        constraint (Constraint | None): AllFunctions (default) or NormBudget(R).
        f0: Starting primitive, zeros by default.
        step_tol (float | None): Descent step tolerance, in units of the current residual norm.
        max_iter (int | None): Total iteration cap.
        strict (bool): Raise on hitting the cap instead of flagging the result.

    Raises:
        NonConvergence: If ``strict`` and the iteration cap is hit; ``best`` holds the result.
    """
    if isinstance(u, Cocycle):
        u = u.cochain
    _check_degree_one(u)
    constraint = constraint or AllFunctions()
    space = u.space
    simplices = enumerate_simplices(space, 1, s)
    target = u.values_at(simplices.simplices)
    start = np.zeros(space.n_points) if f0 is None else np.asarray(getattr(f0, "values", f0), dtype=float)
    dist, f, converged, rounds, log = _minimize_pair_residual(
        target, simplices.simplices, simplices.product_weights, space.weights, phi, constraint,
        start, step_tol, max_iter)
    result = CoboundaryDistance(dist, DenseCochain(space, 0, f), converged, rounds, log)
    logger.info("dist to coboundaries (%s, s=%g): %.6e after %d rounds", type(constraint).__name__, s, dist, rounds)
    if strict and not converged:
        raise NonConvergence(DESCENT_NON_CONVERGENCE.format(iterations=len(log), reason="max_iter"), best=result)
    return result


# The free group example

def _check_f2_arguments(epsilon: float, n: int) -> None:
    if not 0 < epsilon < DEFAULT_SPLICE:
        raise InvalidParameter(INVALID_PARAMETER.format(name="epsilon", value=epsilon, reason="must lie in (0, sqrt(2/3))"))
    if n < 1:
        raise InvalidParameter(INVALID_PARAMETER.format(name="n", value=n, reason="must be >= 1"))


def _f2_potentials(labels, epsilon: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """ε·1_A and f_n, where A is the set of reduced words starting with a."""
    in_a = np.array([label.startswith("a") for label in labels])
    depth = np.array([len(label) - 1 for label in labels], dtype=float)
    f_n = np.where(in_a & (depth <= n), epsilon * (1.0 - depth / n), 0.0)
    return epsilon * in_a.astype(float), f_n


def f2_closed_form(epsilon: float, n: int) -> float:
    """ε√(ln 2/n² + ln 3/n), the norm of ω_n − ω when 2·3ⁿ edges are counted."""
    return epsilon * math.sqrt(math.log(2.0) / n**2 + math.log(3.0) / n)


@dataclass
class F2Example:
    """ω, ω_n = d f_n and f_n on a free group ball, keyed by word labels.

    ``norm_gap`` is ‖ω_n − ω‖_{φ,1} from exact enumeration of the directed
    edges; ``alpha_closed_form`` the closed form counting 2·3ⁿ edges.
    """
    epsilon: float
    n: int
    radius: int
    phi: str
    omega: dict[tuple[str, str], float]
    omega_n: dict[tuple[str, str], float]
    f_n: dict[str, float]
    norm_gap: float
    omega_norm: float
    alpha_closed_form: float
    exact_edge_count: int
    analytic_edge_count: int
    closed_form_edge_count: int
    modular_at_gap: float
    analytic_modular_at_gap: float

    @property
    def count_ratio(self) -> float:
        return self.exact_edge_count / self.closed_form_edge_count


def f2_example(epsilon: float, n: int, radius: int, phi: YoungFunction | None = None,
               max_points: int | None = None) -> F2Example:
    """Build the free group cocycle ω and its approximating coboundaries ω_n.

    ω is ε on (1, a) and −ε on (a, 1). f_n(x) = ε(1 − |x−a|/n) on words
    starting with a at distance ≤ n from a, 0 elsewhere, so ω_n − ω is −ε/n
    on the outward edges at depth ≤ n − 1 of the a-branch, in both directions.

    Raises:
        InvalidParameter: If ε ∉ (0, √(2/3)) or n < 1.
        TruncationTooSmall: If radius < n + 1.
    """
    _check_f2_arguments(epsilon, n)
    if radius < n + 1:
        raise TruncationTooSmall(TRUNCATION_TOO_SMALL.format(radius=radius, needed=n + 1))
    phi = phi or YoungFunction.exp_inverse_square()
    ball = enumerate_cayley_ball(FreeGroup(2), radius, max_points)
    labels = ball.labels
    indicator, f_n = _f2_potentials(labels, epsilon, n)

    edges = ball.edges()
    tail, head = edges[:, 0], edges[:, 1]
    d_f_n = f_n[head] - f_n[tail]
    gap = d_f_n - (indicator[head] - indicator[tail])
    support = np.flatnonzero(gap != 0.0)
    gap_values = gap[support]

    norm_gap = luxemburg_norm(phi, WeightedVector.uniform(gap_values))
    omega_norm = luxemburg_norm(phi, WeightedVector.uniform([epsilon, -epsilon]))
    analytic_count = 3 * (3**n - 1)
    step = epsilon / n
    modular_at_gap = float(np.sum(phi.eval_abs(np.abs(gap_values) / norm_gap)))
    analytic_modular = analytic_count * float(phi.eval_abs(np.asarray(step / norm_gap)))

    lookup = dict(enumerate(labels))
    nonzero = np.flatnonzero(d_f_n != 0.0)
    example = F2Example(
        epsilon=epsilon,
        n=n,
        radius=radius,
        phi=phi.spec,
        omega={("1", "a"): epsilon, ("a", "1"): -epsilon},
        omega_n={(lookup[int(tail[i])], lookup[int(head[i])]): float(d_f_n[i]) for i in nonzero},
        f_n={lookup[int(i)]: float(f_n[i]) for i in np.flatnonzero(f_n)},
        norm_gap=norm_gap,
        omega_norm=omega_norm,
        alpha_closed_form=f2_closed_form(epsilon, n),
        exact_edge_count=int(support.size),
        analytic_edge_count=analytic_count,
        closed_form_edge_count=2 * 3**n,
        modular_at_gap=modular_at_gap,
        analytic_modular_at_gap=analytic_modular,
    )
    logger.info("f2 example eps=%g n=%d radius=%d: gap=%.6e closed form=%.6e",
                epsilon, n, radius, norm_gap, example.alpha_closed_form)
    return example


@dataclass(frozen=True)
class BudgetRow:
    n: int
    budget: float
    dist: float
    norm_gap: float
    converged: bool


def f2_budget_sweep(epsilon: float, ns, radius: int, phi: YoungFunction | None = None,
                    step_tol: float | None = None, max_iter: int | None = None) -> list[BudgetRow]:
    """NormBudget distance from ω to the coboundaries as the budget grows along ‖f_n‖_φ.

    Works on the dense ball of the given radius at scale 1. Each solve
    starts from whichever of the previous minimiser and f_n leaves the
    smaller residual. The budgets grow with n, so the previous minimiser
    stays feasible and the distances are nonincreasing up to round-off and
    never above ‖ω − d f_n‖_{φ,1}.

    Raises:
        TruncationTooSmall: If radius < max(ns) + 1.
    """
    ns = sorted(int(k) for k in ns)
    for k in ns:
        _check_f2_arguments(epsilon, k)
    if ns and radius < ns[-1] + 1:
        raise TruncationTooSmall(TRUNCATION_TOO_SMALL.format(radius=radius, needed=ns[-1] + 1))
    phi = phi or YoungFunction.exp_inverse_square()
    space = build_cayley_ball(FreeGroup(2), radius)
    indicator, _ = _f2_potentials(space.labels, epsilon, 1)
    edges = np.argwhere(np.isclose(space.dist, 1.0))
    omega = extend_tree_cochain(space, edges, indicator[edges[:, 1]] - indicator[edges[:, 0]])

    simplices = enumerate_simplices(space, 1, 1.0)
    pairs, pair_weights = simplices.simplices, simplices.product_weights
    target = omega.values_at(pairs)

    def residual_norm(f: np.ndarray) -> float:
        return luxemburg_norm(phi, WeightedVector(target - (f[pairs[:, 1]] - f[pairs[:, 0]]), pair_weights))

    rows = []
    previous = np.zeros(space.n_points)
    for k in ns:
        _, f_k = _f2_potentials(space.labels, epsilon, k)
        budget = luxemburg_norm(phi, WeightedVector(f_k, space.weights))
        gap = residual_norm(f_k)
        start = previous if residual_norm(previous) <= gap else f_k
        dist, previous, converged, _, _ = _minimize_pair_residual(
            target, pairs, pair_weights, space.weights, phi, NormBudget(budget), start, step_tol, max_iter)
        rows.append(BudgetRow(k, budget, dist, gap, converged))
        logger.info("f2 budget n=%d R=%.4e: dist=%.6e (f_n gives %.6e)", k, budget, dist, gap)
    return rows

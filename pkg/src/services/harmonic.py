"""φ-Dirichlet energy, φ-Laplacian and the φ-harmonic decomposition on finite graphs.

A function f with Dirichlet data on a boundary layer splits as f = u + h,
where u vanishes on the layer and h = f − u is φ-harmonic inside. u is the
minimiser of the energy g ↦ ρ_{φ,S}(f − g) over functions vanishing on the
layer.
"""
import csv
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from src.conf.config import settings
from src.services.descent import IterationRecord, minimize
from src.services.exceptions import (
    BoundaryViolation,
    DegenerateProblem,
    InvalidParameter,
    InvalidSpace,
    NonConvergence,
    ParseError,
)
from src.services.orlicz import WeightedVector, luxemburg_norm
from src.services.spaces import CayleyBall
from src.services.young import DoublingVerdict, YoungFunction, doubling_report
from src.templates.message import (
    BOUNDARY_VIOLATION,
    DEGENERATE_PROBLEM,
    DESCENT_NON_CONVERGENCE,
    INVALID_PARAMETER,
    PARSE_ERROR,
    SHAPE_MISMATCH,
)

logger = logging.getLogger(__name__)

_TIE_ULPS = 64


@dataclass(frozen=True, eq=False)
class GeneratorStructure:
    """Generator edges x → x·s of a truncated Cayley-type graph.

    ``neighbors[x, s]`` is the index of x·s or -1 when the edge leaves the
    truncation; ``inverse[s]`` is the column of s⁻¹. Functions are frozen on
    ``boundary``; every other vertex must keep all of its neighbours.
    ``weights`` is the point measure μ, ``generator_weights`` the weight of
    each generator (1 by default).
    """
    neighbors: np.ndarray
    inverse: np.ndarray
    boundary: np.ndarray
    weights: np.ndarray
    generator_weights: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        neighbors = np.asarray(self.neighbors, dtype=np.int64)
        n, m = neighbors.shape
        inverse = np.asarray(self.inverse, dtype=np.int64)
        boundary = np.unique(np.asarray(self.boundary, dtype=np.int64))
        weights = np.asarray(self.weights, dtype=float)
        generator_weights = np.asarray(self.generator_weights, dtype=float)
        if inverse.shape != (m,) or generator_weights.shape != (m,) or weights.shape != (n,):
            raise InvalidSpace(INVALID_PARAMETER.format(name="generators", value=(n, m), reason="inconsistent shapes"))
        if np.any(neighbors >= n) or np.any(neighbors < -1) or np.any(boundary >= n) or np.any(boundary < 0):
            raise InvalidSpace(INVALID_PARAMETER.format(name="neighbors", value=(n, m), reason="index out of range"))
        if np.any(inverse[inverse] != np.arange(m)):
            raise InvalidSpace(INVALID_PARAMETER.format(name="inverse", value=inverse.tolist(), reason="not an involution"))
        if np.any(weights <= 0) or np.any(generator_weights <= 0) or np.any(generator_weights != generator_weights[inverse]):
            raise InvalidSpace(INVALID_PARAMETER.format(name="weights", value="", reason="must be positive and symmetric"))
        rows, cols = np.nonzero(neighbors >= 0)
        back = neighbors[neighbors[rows, cols], inverse[cols]]
        if np.any(back != rows):
            bad = int(np.flatnonzero(back != rows)[0])
            raise InvalidSpace(INVALID_PARAMETER.format(name="neighbors", value=(int(rows[bad]), int(cols[bad])),
                                                        reason="edge has no inverse edge"))
        frozen = np.zeros(n, dtype=bool)
        frozen[boundary] = True
        open_vertices = np.flatnonzero(~frozen & np.any(neighbors < 0, axis=1))
        if open_vertices.size:
            raise InvalidSpace(INVALID_PARAMETER.format(name="boundary", value=int(open_vertices[0]),
                                                        reason="interior vertex with an edge leaving the truncation"))
        object.__setattr__(self, "neighbors", neighbors)
        object.__setattr__(self, "inverse", inverse)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "generator_weights", generator_weights)

    @property
    def n_points(self) -> int:
        return self.neighbors.shape[0]

    @cached_property
    def interior(self) -> np.ndarray:
        mask = np.ones(self.n_points, dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    @cached_property
    def exiting_edge_count(self) -> int:
        return int(np.count_nonzero(self.neighbors < 0))

    @cached_property
    def _edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        tails, gens = np.nonzero(self.neighbors >= 0)
        heads = self.neighbors[tails, gens]
        return tails, heads, self.weights[tails] * self.generator_weights[gens]

    @classmethod
    def path(cls, n_points: int) -> "GeneratorStructure":
        """Path 0..n_points-1 with S = {+1, -1} and boundary {0, n_points-1}."""
        if n_points < 2:
            raise InvalidParameter(INVALID_PARAMETER.format(name="n_points", value=n_points, reason="must be >= 2"))
        idx = np.arange(n_points)
        neighbors = np.column_stack([np.where(idx + 1 < n_points, idx + 1, -1), np.where(idx > 0, idx - 1, -1)])
        return cls(neighbors, np.array([1, 0]), np.array([0, n_points - 1]), np.ones(n_points), np.ones(2),
                   tuple(str(i) for i in idx))

    @classmethod
    def grid(cls, rows: int, cols: int) -> "GeneratorStructure":
        """rows × cols grid, row-major, S = {±column step, ±row step}, perimeter as boundary."""
        if rows < 1 or cols < 1:
            raise InvalidParameter(INVALID_PARAMETER.format(name="shape", value=(rows, cols), reason="must be positive"))
        r, c = np.divmod(np.arange(rows * cols), cols)
        idx = r * cols + c
        neighbors = np.column_stack([
            np.where(c + 1 < cols, idx + 1, -1),
            np.where(c > 0, idx - 1, -1),
            np.where(r + 1 < rows, idx + cols, -1),
            np.where(r > 0, idx - cols, -1),
        ])
        boundary = np.flatnonzero((r == 0) | (r == rows - 1) | (c == 0) | (c == cols - 1))
        labels = tuple(f"({i},{j})" for i, j in zip(r, c))
        return cls(neighbors, np.array([1, 0, 3, 2]), boundary, np.ones(rows * cols), np.ones(4), labels)

    @classmethod
    def from_cayley_ball(cls, ball: CayleyBall) -> "GeneratorStructure":
        """Generator edges of a Cayley ball, with its outer sphere as boundary."""
        m = ball.neighbors.shape[1]
        return cls(ball.neighbors, np.arange(m) ^ 1, np.flatnonzero(ball.lengths == ball.radius),
                   np.ones(ball.n_points), np.ones(m), ball.labels)

    def with_weights(self, weights) -> "GeneratorStructure":
        """Same edges with another point measure."""
        return GeneratorStructure(self.neighbors, self.inverse, self.boundary, weights,
                                  self.generator_weights, self.labels)


def _vertex_values(f, gs: GeneratorStructure) -> np.ndarray:
    values = np.asarray(getattr(f, "values", f), dtype=float)
    if values.shape != (gs.n_points,):
        raise InvalidParameter(SHAPE_MISMATCH.format(degree=0, n=gs.n_points, expected=(gs.n_points,),
                                                     got=values.shape))
    return values


def _signed_derivative(phi: YoungFunction, t: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.sign(t) * phi.deriv_abs(np.abs(t))


@dataclass(frozen=True, eq=False)
class DirichletFunction:
    """Vertex values with the modular ρ_{φ,S} cached."""
    values: np.ndarray
    modular: float

    @classmethod
    def of(cls, phi: YoungFunction, f, gs: GeneratorStructure) -> "DirichletFunction":
        values = _vertex_values(f, gs)
        return cls(values, dirichlet_modular(phi, values, gs))


def dirichlet_modular(phi: YoungFunction, f, gs: GeneratorStructure) -> float:
    """ρ_{φ,S}(f) = Σ_x Σ_s μ(x) w_s φ(f(xs) − f(x)).

    Edges leaving the truncation are skipped; ``gs.exiting_edge_count`` counts them.
    """
    values = _vertex_values(f, gs)
    tails, heads, weights = gs._edges
    with np.errstate(over="ignore"):
        return float(np.dot(weights, phi.eval_abs(np.abs(values[heads] - values[tails]))))


def dirichlet_norm(phi: YoungFunction, f, gs: GeneratorStructure) -> float:
    """Luxemburg norm ‖f‖_{φ,S} of the generator differences."""
    values = _vertex_values(f, gs)
    tails, heads, weights = gs._edges
    return luxemburg_norm(phi, WeightedVector(values[heads] - values[tails], weights))


def phi_laplacian(phi: YoungFunction, f, gs: GeneratorStructure, tie_floor: float = 0.0) -> np.ndarray:
    """Δ_φ f(x) = Σ_s w_s φ′(f(xs) − f(x)) at the vertices of ``gs.interior``, in that order.

    Differences with |f(xs) − f(x)| ≤ ``tie_floor`` count as ties and take the subgradient 0.
    """
    values = _vertex_values(f, gs)
    inner = gs.interior
    diffs = values[gs.neighbors[inner]] - values[inner][:, None]
    if tie_floor > 0.0:
        diffs = np.where(np.abs(diffs) <= tie_floor, 0.0, diffs)
    return _signed_derivative(phi, diffs) @ gs.generator_weights


def _check_boundary(g: np.ndarray, gs: GeneratorStructure) -> None:
    on_boundary = g[gs.boundary]
    bad = np.flatnonzero(on_boundary != 0.0)
    if bad.size:
        raise BoundaryViolation(BOUNDARY_VIOLATION.format(vertex=int(gs.boundary[bad[0]]), value=on_boundary[bad[0]]))


def energy(phi: YoungFunction, f, g, gs: GeneratorStructure) -> float:
    """𝓘^f(g) = ρ_{φ,S}(f − g) for g vanishing on the boundary layer.

    Raises:
        BoundaryViolation: If g is nonzero on the boundary layer.
    """
    f_values, g_values = _vertex_values(f, gs), _vertex_values(g, gs)
    _check_boundary(g_values, gs)
    return dirichlet_modular(phi, f_values - g_values, gs)


def _energy_gradient(phi: YoungFunction, h: np.ndarray, gs: GeneratorStructure) -> np.ndarray:
    tails, heads, weights = gs._edges
    coef = weights * _signed_derivative(phi, h[heads] - h[tails])
    grad = np.bincount(tails, coef, gs.n_points) - np.bincount(heads, coef, gs.n_points)
    grad[gs.boundary] = 0.0
    return grad


@dataclass(frozen=True, eq=False)
class GateauxGradient:
    """Derivative of g ↦ 𝓘^f(g).

    ``gradient`` is the descent gradient; ``coefficients`` = −gradient are
    the coefficients of the functional δ ↦ Σ_x Σ_s μ(x) w_s φ′(h(xs) − h(x))(δ(xs) − δ(x))
    with h = f − g, which is −2μΔ_φh at interior vertices when μ is invariant.
    Both vanish on the boundary layer.
    """
    gradient: np.ndarray
    coefficients: np.ndarray
    boundary: np.ndarray

    def _direction(self, direction) -> np.ndarray:
        values = np.asarray(getattr(direction, "values", direction), dtype=float)
        bad = np.flatnonzero(values[self.boundary] != 0.0)
        if bad.size:
            raise BoundaryViolation(BOUNDARY_VIOLATION.format(vertex=int(self.boundary[bad[0]]),
                                                              value=values[self.boundary[bad[0]]]))
        return values

    def directional(self, direction) -> float:
        """d/dλ 𝓘^f(g + λδ) at λ = 0."""
        return float(np.dot(self.gradient, self._direction(direction)))

    def functional(self, direction) -> float:
        """The Gâteaux functional of the Dirichlet modular at h applied to δ."""
        return float(np.dot(self.coefficients, self._direction(direction)))


def gateaux_gradient(phi: YoungFunction, f, g, gs: GeneratorStructure) -> GateauxGradient:
    """Exact gradient of the energy at g.

    Raises:
        BoundaryViolation: If g is nonzero on the boundary layer.
    """
    f_values, g_values = _vertex_values(f, gs), _vertex_values(g, gs)
    _check_boundary(g_values, gs)
    grad = _energy_gradient(phi, f_values - g_values, gs)
    return GateauxGradient(grad, -grad, gs.boundary)


@dataclass
class DecompositionResult:
    """f = u + h with u vanishing on the boundary layer and h φ-harmonic inside."""
    u: DirichletFunction
    h: DirichletFunction
    energy: float
    harmonic_residual: float
    converged: bool
    iterations: list[IterationRecord] = field(default_factory=list)


def harmonic_decompose(phi: YoungFunction, f, gs: GeneratorStructure, tol: float | None = None,
                       max_iter: int | None = None, initial=None, strict: bool = False) -> DecompositionResult:
    """Minimise 𝓘^f over functions vanishing on the boundary layer.

    Stops once max |Δ_φ h| over the interior is ≤ ``tol``. Increments of h
    within a few ulps of max |f| are ties with φ′ = 0, so flat parts of h
    converge for powers below 2. An unconverged result is returned flagged
    unless ``strict``.

    Args:
        phi (YoungFunction): A strictly convex Young function.
        f: Vertex values; the boundary values are the Dirichlet data.
        gs (GeneratorStructure): Edges and boundary layer.
        tol (float | None): Residual tolerance, defaults to settings.
        max_iter (int | None): Iteration cap, defaults to settings.
        initial: Starting u (zero on the boundary), zeros by default.
        strict (bool): Raise NonConvergence instead of flagging.

    Raises:
        DegenerateProblem: If the boundary layer is empty.
        BoundaryViolation: If ``initial`` is nonzero on the boundary layer.
        NonConvergence: If ``strict`` and the descent does not converge.
    """
    tol = settings.harmonic_tol if tol is None else tol
    f_values = _vertex_values(f, gs)
    if gs.boundary.size == 0:
        raise DegenerateProblem(DEGENERATE_PROBLEM.format(
            reason="empty boundary layer, every constant shift of f is a minimiser"))
    if gs.exiting_edge_count:
        logger.warning("%d generator edges leave the truncation and are skipped", gs.exiting_edge_count)
    start = np.zeros(gs.n_points) if initial is None else _vertex_values(initial, gs).copy()
    _check_boundary(start, gs)
    inner = gs.interior

    def lift(x: np.ndarray) -> np.ndarray:
        g = np.zeros(gs.n_points)
        g[inner] = x
        return g

    def objective(x: np.ndarray) -> float:
        return dirichlet_modular(phi, f_values - lift(x), gs)

    def gradient(x: np.ndarray) -> np.ndarray:
        return _energy_gradient(phi, f_values - lift(x), gs)[inner]

    tie_floor = _TIE_ULPS * np.finfo(float).eps * max(1.0, float(np.max(np.abs(f_values))))

    def residual(x: np.ndarray) -> float:
        lap = phi_laplacian(phi, f_values - lift(x), gs, tie_floor)
        return float(np.max(np.abs(lap))) if lap.size else 0.0

    result = minimize(objective, gradient, start[inner], converged=lambda x, _: residual(x) <= tol,
                      max_iter=max_iter, step_tol=0.0)
    u = lift(result.x)
    h = f_values - u
    decomposition = DecompositionResult(
        u=DirichletFunction.of(phi, u, gs),
        h=DirichletFunction.of(phi, h, gs),
        energy=result.energy,
        harmonic_residual=residual(result.x),
        converged=result.converged,
        iterations=result.log,
    )
    logger.info("harmonic decomposition %s: energy=%.6e residual=%.3e after %d steps",
                "converged" if result.converged else "stopped", result.energy,
                decomposition.harmonic_residual, result.iterations)
    if strict and not result.converged:
        raise NonConvergence(DESCENT_NON_CONVERGENCE.format(iterations=result.iterations, reason=result.reason),
                             best=decomposition)
    return decomposition


def linear_dirichlet_solve(gs: GeneratorStructure, f) -> np.ndarray:
    """Minimiser h of Σ μ(x) w_s (h(xs) − h(x))² with h = f on the boundary layer.

    Solves the interior block of the weighted graph Laplacian with a sparse
    direct solver.
    """
    f_values = _vertex_values(f, gs)
    tails, heads, weights = gs._edges
    n = gs.n_points
    rows = np.concatenate([tails, heads, tails, heads])
    cols = np.concatenate([tails, heads, heads, tails])
    data = np.concatenate([weights, weights, -weights, -weights])
    laplacian = coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    inner, frozen = gs.interior, gs.boundary
    h = f_values.copy()
    if inner.size == 0:
        return h
    rhs = -laplacian[inner][:, frozen] @ f_values[frozen]
    h[inner] = np.atleast_1d(spsolve(laplacian[inner][:, inner].tocsc(), rhs))
    return h


def conjugate_bound_check(phi: YoungFunction, f, gs: GeneratorStructure,
                          constant: float | None = None) -> tuple[float, float]:
    """Return (ρ_ψ(φ′(f)), (D − 1)·ρ_{φ,S}(f)) over the generator differences of f.

    ψ is the numeric conjugate of φ and D the doubling constant, measured on
    the default grid unless given.

    Raises:
        InvalidParameter: If φ does not pass the doubling diagnostic.
    """
    if constant is None:
        report = doubling_report(phi)
        if report.verdict is not DoublingVerdict.DOUBLING_ON_GRID:
            raise InvalidParameter(INVALID_PARAMETER.format(name="phi", value=phi.spec, reason="not doubling on the grid"))
        constant = report.constant
    values = _vertex_values(f, gs)
    tails, heads, weights = gs._edges
    slopes = phi.deriv_abs(np.abs(values[heads] - values[tails]))
    lhs = float(np.dot(weights, phi.conjugate().eval_abs(slopes)))
    return lhs, (constant - 1.0) * dirichlet_modular(phi, values, gs)


@dataclass(frozen=True)
class ZExampleReport:
    """Harmonic functions on a path: increments are constant, and only the constant one has finite energy growth."""
    n: int
    phi: str
    increments: tuple[float, ...]
    spread: float
    slope: float
    harmonic_residual: float
    converged: bool
    modular_growth_ratio: float
    linear_in_surrogate: bool
    constant_case_spread: float
    increments_constant: bool


def z_example(phi: YoungFunction, n: int, tol: float | None = None, spread_tol: float = 1e-6) -> ZExampleReport:
    """Decompose f(k) = k²/n on the path 0..n and inspect the harmonic part.

    A φ-harmonic h on a path has φ′(h(k+1) − h(k)) constant, hence constant
    increments. The linear harmonic k ↦ ck has modular 2nφ(c) on 0..n, which
    doubles with n, so it leaves every finite-modular surrogate unless c = 0.
    Data with equal boundary values must give a constant h.
    """
    tol = settings.harmonic_tol if tol is None else tol
    if n < 2:
        raise InvalidParameter(INVALID_PARAMETER.format(name="n", value=n, reason="must be >= 2"))
    gs = GeneratorStructure.path(n + 1)
    k = np.arange(n + 1, dtype=float)
    result = harmonic_decompose(phi, k**2 / n, gs, tol=tol)
    increments = np.diff(result.h.values)
    slope = float(increments.mean())

    longer = GeneratorStructure.path(2 * n + 1)
    short_modular = dirichlet_modular(phi, slope * k, gs)
    long_modular = dirichlet_modular(phi, slope * np.arange(2 * n + 1, dtype=float), longer)
    growth = long_modular / short_modular if short_modular > 0 else 1.0

    bump = harmonic_decompose(phi, k * (n - k) / n, gs, tol=tol)
    constant_spread = float(np.ptp(bump.h.values))
    spread = float(np.ptp(increments))
    return ZExampleReport(
        n=n,
        phi=phi.spec,
        increments=tuple(float(x) for x in increments),
        spread=spread,
        slope=slope,
        harmonic_residual=result.harmonic_residual,
        converged=result.converged and bump.converged,
        modular_growth_ratio=growth,
        linear_in_surrogate=abs(slope) <= spread_tol,
        constant_case_spread=constant_spread,
        increments_constant=spread <= spread_tol,
    )


# Files

def save_iteration_log(log: list[IterationRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "energy", "gradient_sup", "step_sup"])
        for record in log:
            writer.writerow([record.step, repr(record.energy), repr(record.gradient_sup), repr(record.step_sup)])


def save_generator_structure(gs: GeneratorStructure, path: str | Path) -> None:
    """Write ``n m``, the generator weights, the inverse columns, n neighbour rows and the boundary."""
    lines = [f"{gs.n_points} {gs.neighbors.shape[1]}",
             " ".join(repr(float(w)) for w in gs.generator_weights),
             " ".join(str(int(i)) for i in gs.inverse)]
    lines += [" ".join(str(int(v)) for v in row) for row in gs.neighbors]
    lines.append(" ".join(str(int(b)) for b in gs.boundary))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _ints(cells: list[str], line_no: int, expected: int | None, low: int = -1) -> list[int]:
    if expected is not None and len(cells) != expected:
        raise ParseError(PARSE_ERROR.format(line=line_no, field=len(cells), reason=f"expected {expected} fields"),
                         line=line_no, field=len(cells))
    parsed = []
    for field_no, cell in enumerate(cells, start=1):
        try:
            value = int(cell)
        except ValueError:
            value = low - 1
        if value < low:
            raise ParseError(PARSE_ERROR.format(line=line_no, field=field_no, reason=f"bad index {cell!r}"),
                             line=line_no, field=field_no)
        parsed.append(value)
    return parsed


def load_generator_structure(path: str | Path, weights=None, labels=None) -> GeneratorStructure:
    """Read a generator structure file; ``weights`` is the point measure (unit by default).

    Raises:
        ParseError: On malformed lines.
        InvalidSpace: If the edges are not symmetric or the boundary is incomplete.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(PARSE_ERROR.format(line=1, field=0, reason="empty file"), line=1)
    n, m = _ints(lines[0].split(), 1, 2, low=1)
    if len(lines) < n + 3:
        raise ParseError(PARSE_ERROR.format(line=len(lines), field=0, reason=f"expected {n + 4} lines"),
                         line=len(lines))
    try:
        generator_weights = [float(cell) for cell in lines[1].split()]
    except ValueError:
        raise ParseError(PARSE_ERROR.format(line=2, field=0, reason="bad generator weight"), line=2) from None
    if len(generator_weights) != m:
        raise ParseError(PARSE_ERROR.format(line=2, field=len(generator_weights), reason=f"expected {m} fields"),
                         line=2, field=len(generator_weights))
    inverse = _ints(lines[2].split(), 3, m, low=0)
    neighbors = [_ints(lines[3 + i].split(), 4 + i, m) for i in range(n)]
    boundary = _ints(lines[3 + n].split(), 4 + n, None, low=0) if len(lines) > 3 + n else []
    weights = np.ones(n) if weights is None else weights
    return GeneratorStructure(np.array(neighbors, dtype=np.int64).reshape(n, m), np.array(inverse), np.array(boundary),
                              weights, np.array(generator_weights), labels)


def save_vertex_function(values, path: str | Path) -> None:
    """One value per line."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        for value in np.asarray(values, dtype=float):
            writer.writerow([repr(float(value))])


def load_vertex_function(path: str | Path) -> np.ndarray:
    """Read one finite value per line; ``#`` lines are comments.

    Raises:
        ParseError: On a line that is not a single finite number.
    """
    values = []
    with open(path, newline="", encoding="utf-8") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].startswith("#"):
                continue
            try:
                value = float(row[0]) if len(row) == 1 else np.nan
            except ValueError:
                value = np.nan
            if not np.isfinite(value):
                raise ParseError(PARSE_ERROR.format(line=line_no, field=1, reason=f"bad value {','.join(row)!r}"),
                                 line=line_no, field=1)
            values.append(value)
    return np.array(values)

"""Quasi-isometry transfer of cochains.

Averaging kernels, pull-backs along quasi-isometries, composition of
kernels, the chain homotopy b and the operator B_k, and a numeric check of
the homotopy identities B₀d₀ = F*F̄* − Id and B_{k+1}d_{k+1} + d_kB_k = F*F̄* − Id.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.conf.config import settings
from src.services.cochain import (
    Chain,
    Cochain,
    DenseCochain,
    boundary_chain,
    coboundary,
    seminorm,
    to_dense,
)
from src.services.exceptions import EmptyBall, InvalidKernel, InvalidParameter, InvalidQuasiIsometry, ParseError, SizeLimit
from src.services.spaces import FiniteMeasureSpace, ball_measures
from src.services.young import YoungFunction
from src.templates.message import (
    BAD_DEGREE,
    EMPTY_BALL,
    KERNEL_NEGATIVE,
    KERNEL_ROW_MASS,
    KERNEL_SUPPORT,
    PARSE_ERROR,
    QI_BAD_MAP,
    QI_COMPOSE_MISMATCH,
    QI_DISTORTION,
    QI_NOT_DENSE,
    SIZE_LIMIT,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Nonnegative κ with Σ_{x′} κ(x, x′)μ(x′) = 1 and κ = 0 beyond ``support_radius``.

    The support condition is checked only when source and target coincide.
    """
    source: FiniteMeasureSpace
    target: FiniteMeasureSpace
    matrix: np.ndarray
    support_radius: float

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.shape != (self.source.n_points, self.target.n_points):
            raise InvalidKernel(f"kernel shape {matrix.shape} does not match the spaces")
        if np.any(matrix < 0):
            raise InvalidKernel(KERNEL_NEGATIVE)
        mass = matrix @ self.target.weights
        off = np.flatnonzero(np.abs(mass - 1.0) > settings.kernel_row_tol)
        if off.size:
            raise InvalidKernel(KERNEL_ROW_MASS.format(row=int(off[0]), mass=mass[off[0]]))
        if self.source is self.target:
            leak = np.argwhere((matrix != 0) & (self.source.dist > self.support_radius + settings.metric_slack))
            if leak.size:
                raise InvalidKernel(KERNEL_SUPPORT.format(i=int(leak[0, 0]), j=int(leak[0, 1]),
                                                          radius=self.support_radius))
        object.__setattr__(self, "matrix", matrix)


def transition_matrix(kernel: Kernel) -> np.ndarray:
    """Row-stochastic P(x, x′) = κ(x, x′)μ(x′)."""
    return kernel.matrix * kernel.target.weights[None, :]


def ball_kernel(space: FiniteMeasureSpace, K: float) -> Kernel:
    """κ(x, x′) = 𝟙_{B(x,K)}(x′) / μ(B(x, K)) with open balls.

    Raises:
        EmptyBall: If some B(x, K) has zero measure (K ≤ 0).
    """
    inside = space.dist < K
    measures = inside @ space.weights
    empty = np.flatnonzero(measures <= 0)
    if empty.size:
        raise EmptyBall(EMPTY_BALL.format(r=K, index=int(empty[0])))
    return Kernel(space, space, inside / measures[:, None], float(K))


@dataclass(frozen=True, eq=False)
class QuasiIsometry:
    """Point map F with λ⁻¹|x−x′| − ε ≤ |Fx−Fx′| ≤ λ|x−x′| + ε and ε-dense image.

    Both conditions are checked exhaustively at construction.
    """
    source: FiniteMeasureSpace
    target: FiniteMeasureSpace
    forward: np.ndarray
    lam: float
    eps: float

    def __post_init__(self):
        forward = np.asarray(self.forward, dtype=np.int64).ravel()
        if forward.size != self.source.n_points or forward.min(initial=0) < 0 \
                or forward.max(initial=0) >= self.target.n_points:
            raise InvalidQuasiIsometry(QI_BAD_MAP.format(n=self.source.n_points, m=self.target.n_points))
        if self.lam < 1 or self.eps < 0:
            raise InvalidQuasiIsometry(f"need lambda >= 1 and eps >= 0, got {self.lam}, {self.eps}")
        slack = settings.metric_slack
        dx = self.source.dist
        dy = self.target.dist[np.ix_(forward, forward)]
        bad = np.argwhere((dy > self.lam * dx + self.eps + slack) | (dy < dx / self.lam - self.eps - slack))
        if bad.size:
            raise InvalidQuasiIsometry(QI_DISTORTION.format(lam=self.lam, eps=self.eps,
                                                            i=int(bad[0, 0]), j=int(bad[0, 1])))
        gaps = self.target.dist[:, forward].min(axis=1)
        far = np.flatnonzero(gaps > self.eps + slack)
        if far.size:
            raise InvalidQuasiIsometry(QI_NOT_DENSE.format(index=int(far[0]), eps=self.eps))
        object.__setattr__(self, "forward", forward)


def identity_map(space: FiniteMeasureSpace) -> QuasiIsometry:
    return QuasiIsometry(space, space, np.arange(space.n_points), 1.0, 0.0)


def quasi_inverse(target: FiniteMeasureSpace, forward) -> np.ndarray:
    """Map Y → X sending y to a point x whose image F x is nearest to y (lowest index on ties)."""
    forward = np.asarray(forward, dtype=np.int64)
    return np.argmin(target.dist[:, forward], axis=1).astype(np.int64)


def tightest_constants(source: FiniteMeasureSpace, target: FiniteMeasureSpace, forward,
                       max_candidates: int = 4000) -> tuple[float, float]:
    """Smallest λ ≥ 1 attaining the least ε for which ``forward`` is a (λ, ε) quasi-isometry.

    ε(λ) is nonincreasing in λ and piecewise given by pair breakpoints, so
    the search runs over those breakpoints.
    """
    forward = np.asarray(forward, dtype=np.int64)
    coverage = float(target.dist[:, forward].min(axis=1).max())
    upper = np.triu_indices(source.n_points, 1)
    dx = source.dist[upper]
    dy = target.dist[np.ix_(forward, forward)][upper]
    if dx.size == 0:
        return 1.0, coverage
    with np.errstate(divide="ignore", invalid="ignore"):
        cands = np.concatenate([[1.0], (dy - coverage) / dx, dx / (dy + coverage)])
    cands = np.unique(cands[np.isfinite(cands) & (cands >= 1.0)])
    if cands.size > max_candidates:
        cands = cands[np.linspace(0, cands.size - 1, max_candidates).astype(int)]
    stretch = (dy[None, :] - cands[:, None] * dx[None, :]).max(axis=1)
    shrink = (dx[None, :] / cands[:, None] - dy[None, :]).max(axis=1)
    eps = np.maximum(coverage, np.maximum(stretch, shrink))
    best = float(eps.min())
    lam = float(cands[np.flatnonzero(eps <= best + settings.metric_slack)[0]])
    return lam, max(best, 0.0)


def compose_kernel(F: QuasiIsometry, Fbar: QuasiIsometry, kY: Kernel, kX: Kernel) -> Kernel:
    """κ(x, x′) = Σ_y κ_Y(F x, y) κ_X(F̄ y, x′) ν(y) on X.

    The support radius is (λ+1)K + ε + C with λ, ε the larger constants of
    the pair, K the larger kernel radius and C the largest displacement of
    F̄∘F and F∘F̄ from the identities.
    """
    X, Y = F.source, F.target
    if Fbar.source is not Y or Fbar.target is not X or kY.source is not Y or kX.source is not X:
        raise InvalidQuasiIsometry(QI_COMPOSE_MISMATCH)
    matrix = (kY.matrix[F.forward] * Y.weights[None, :]) @ kX.matrix[Fbar.forward]
    lam = max(F.lam, Fbar.lam)
    eps = max(F.eps, Fbar.eps)
    K = max(kX.support_radius, kY.support_radius)
    back = Fbar.forward[F.forward]
    forth = F.forward[Fbar.forward]
    C = max(float(X.dist[back, np.arange(X.n_points)].max()), float(Y.dist[forth, np.arange(Y.n_points)].max()))
    return Kernel(X, X, matrix, (lam + 1.0) * K + eps + C)


def _apply_along(values: np.ndarray, matrix: np.ndarray, axes) -> np.ndarray:
    for axis in axes:
        values = np.moveaxis(np.tensordot(matrix, values, axes=([1], [axis])), 0, axis)
    return values


def pullback(F: QuasiIsometry, kY: Kernel, u: Cochain) -> DenseCochain:
    """F*u(Δ) = Σ_{Δ_Y} u(Δ_Y) Π_i κ_Y(F x_i, y_i)ν(y_i).

    Raises:
        SizeLimit: If the pulled-back tensor is too large.
    """
    u = to_dense(u)
    n = F.source.n_points
    if n ** (u.degree + 1) > settings.dense_tuple_threshold:
        raise SizeLimit(SIZE_LIMIT.format(what="pull-back", size=n ** (u.degree + 1),
                                          cap=settings.dense_tuple_threshold))
    averaging = kY.matrix[F.forward] * F.target.weights[None, :]
    return DenseCochain(F.source, u.degree, _apply_along(u.values, averaging, range(u.degree + 1)))


def pullback_bound_check(F: QuasiIsometry, kY: Kernel, u: Cochain, phi: YoungFunction,
                         s: float) -> tuple[float, float, float]:
    """Return (‖F*u‖_{φ,s}, C‖u‖_{φ,s′}, s′) with s′ = 2K + λs + ε.

    C = max(1, H^{k+1}) where H = max_y Σ_x μ(x)κ_Y(Fx, y) bounds the
    measure pushed onto each target point.
    """
    s_prime = 2.0 * kY.support_radius + F.lam * s + F.eps
    pushed = (F.source.weights[:, None] * kY.matrix[F.forward]).sum(axis=0)
    constant = max(1.0, float(pushed.max()) ** (u.degree + 1))
    return seminorm(pullback(F, kY, u), phi, s), constant * seminorm(u, phi, s_prime), s_prime


def b_chain(delta, delta_prime) -> Chain:
    """b(Δ, Δ′) = Σ_i (−1)^i (x₀,…,x_i, x′_i,…,x′_k).

    Raises:
        InvalidParameter: If the tuples differ in length.
    """
    delta = tuple(int(x) for x in delta)
    delta_prime = tuple(int(x) for x in delta_prime)
    if len(delta) != len(delta_prime):
        raise InvalidParameter(BAD_DEGREE.format(degree=(len(delta), len(delta_prime))))
    return [(delta[:i + 1] + delta_prime[i:], -1 if i % 2 else 1) for i in range(len(delta))]


def chain_boundary(chain: Chain) -> dict[tuple[int, ...], int]:
    """∂ of a formal chain with like terms collected."""
    total: dict[tuple[int, ...], int] = defaultdict(int)
    for simplex, coef in chain:
        for face, sign in boundary_chain(simplex):
            total[face] += coef * sign
    return {face: c for face, c in total.items() if c}


def b_chain_defect(delta, delta_prime) -> dict[tuple[int, ...], int]:
    """∂b(Δ,Δ′) − [Δ′ − Δ − Σ_i (−1)^i b(∂_iΔ, ∂_iΔ′)] as a formal chain.

    Empty when the chain homotopy identity holds.
    """
    delta = tuple(int(x) for x in delta)
    delta_prime = tuple(int(x) for x in delta_prime)
    total: dict[tuple[int, ...], int] = defaultdict(int, chain_boundary(b_chain(delta, delta_prime)))
    total[delta_prime] -= 1
    total[delta] += 1
    if len(delta) > 1:
        for (face, sign), (face_prime, _) in zip(boundary_chain(delta), boundary_chain(delta_prime)):
            for simplex, coef in b_chain(face, face_prime):
                total[simplex] += sign * coef
    return {simplex: c for simplex, c in total.items() if c}


def homotopy_operator(u: Cochain, kernel: Kernel) -> DenseCochain:
    """B_k u(Δ) = Σ_{Δ′} u(b(Δ, Δ′)) P(Δ, Δ′) for u of degree k+1.

    In term i of b the coordinates x′_j with j < i do not occur and sum out,
    so term i averages u along its last k+1−i axes and then ties axis i to
    axis i+1.

    Raises:
        InvalidParameter: If u has degree 0.
    """
    u = to_dense(u)
    if u.degree < 1:
        raise InvalidParameter(BAD_DEGREE.format(degree=u.degree))
    k = u.degree - 1
    P = transition_matrix(kernel)
    total = np.zeros((u.space.n_points,) * (k + 1))
    for i in range(k + 1):
        averaged = _apply_along(u.values, P, range(i + 1, k + 2))
        tied = np.moveaxis(np.diagonal(averaged, axis1=i, axis2=i + 1), -1, i)
        total = total + tied if i % 2 == 0 else total - tied
    return DenseCochain(u.space, k, total)


def homotopy_bound_check(u: Cochain, kernel: Kernel, phi: YoungFunction, s: float) -> tuple[float, float]:
    """Return (‖B_k u‖_{φ,s}, C‖u‖_{φ,s+2K′}) with K′ the kernel radius.

    C = (k+1)·max(1, H·max(1, H·V̄(K′))^k) with H = max κ and V̄ the largest
    closed-ball measure.
    """
    k = u.degree - 1
    radius = kernel.support_radius
    peak = float(kernel.matrix.max())
    volume = float(ball_measures(kernel.source, radius, closed=True).max())
    constant = (k + 1) * max(1.0, peak * max(1.0, peak * volume) ** k)
    return seminorm(homotopy_operator(u, kernel), phi, s), constant * seminorm(u, phi, s + 2.0 * radius)


@dataclass(frozen=True)
class HomotopyReport:
    """Residuals of the homotopy identity on the compared tuples.

    ``residual_alternative`` drops the d∘B term, the other reading of the
    second identity; it is kept for auditing and is not expected to vanish.
    """
    degree: int
    residual: float
    residual_alternative: float
    compared_tuples: int
    excluded_tuples: int
    support_radius: float


def homotopy_identity_residual(F: QuasiIsometry, Fbar: QuasiIsometry, kX: Kernel, kY: Kernel,
                               u: Cochain, restrict_to=None) -> HomotopyReport:
    """max |B_k d_k u + d_{k−1} B_{k−1} u − (F*F̄*u − u)| over tuples of X^{k+1}.

    For k = 0 the d∘B term is absent. ``restrict_to`` limits the comparison
    to tuples inside a point subset (for example the points whose kernel
    supports stay inside a truncation); the excluded count is reported.
    """
    u = to_dense(u)
    composed = compose_kernel(F, Fbar, kY, kX)
    averaged = pullback(F, kY, pullback(Fbar, kX, u))
    rhs = averaged.values - u.values
    main = homotopy_operator(to_dense(coboundary(u)), composed).values
    lhs = main
    if u.degree >= 1:
        lhs = main + to_dense(coboundary(homotopy_operator(u, composed))).values
    mask = np.ones(rhs.shape, dtype=bool)
    if restrict_to is not None:
        keep = np.zeros(u.space.n_points, dtype=bool)
        keep[np.asarray(restrict_to, dtype=np.int64)] = True
        for axis in range(rhs.ndim):
            shape = [1] * rhs.ndim
            shape[axis] = -1
            mask = mask & keep.reshape(shape)
    compared = int(mask.sum())
    residual = float(np.abs(lhs - rhs)[mask].max()) if compared else 0.0
    alternative = float(np.abs(main - rhs)[mask].max()) if compared else 0.0
    logger.info("homotopy identity k=%d: residual %.3e over %d tuples", u.degree, residual, compared)
    return HomotopyReport(u.degree, residual, alternative, compared, int(mask.size - compared),
                          composed.support_radius)


def save_point_map(forward, path: str | Path) -> None:
    """Write a point map as lines ``i j``."""
    lines = [f"{i} {int(j)}" for i, j in enumerate(np.asarray(forward))]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_point_map(path: str | Path, n_source: int, n_target: int) -> np.ndarray:
    """Read ``i j`` lines; every source index must appear exactly once.

    Raises:
        ParseError: On malformed lines, out-of-range or repeated indices.
    """
    forward = np.full(n_source, -1, dtype=np.int64)
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        cells = line.split()
        if not cells or cells[0].startswith("#"):
            continue
        if len(cells) != 2 or not all(c.isdigit() for c in cells):
            raise ParseError(PARSE_ERROR.format(line=line_no, field=len(cells), reason="expected 'i j'"),
                             line=line_no, field=len(cells))
        i, j = int(cells[0]), int(cells[1])
        if i >= n_source or forward[i] >= 0:
            raise ParseError(PARSE_ERROR.format(line=line_no, field=1, reason=f"bad or repeated source index {i}"),
                             line=line_no, field=1)
        if j >= n_target:
            raise ParseError(PARSE_ERROR.format(line=line_no, field=2, reason=f"target index {j} out of range"),
                             line=line_no, field=2)
        forward[i] = j
    missing = np.flatnonzero(forward < 0)
    if missing.size:
        raise ParseError(PARSE_ERROR.format(line=0, field=0, reason=f"source point {int(missing[0])} unmapped"))
    return forward

"""Alexander–Spanier cochains on finite spaces.

A k-cochain is a function on ordered (k+1)-tuples of points. Three
representations share one interface, ``values_at(tuples)``:

* ``DenseCochain``: the full tensor of shape (n,)*(k+1);
* ``SparseCochain``: a map tuple → value, 0 elsewhere;
* ``LazyCochain``: the coboundary of another cochain, evaluated on demand.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.conf.config import settings
from src.services.exceptions import InvalidParameter, ParseError, SizeLimit
from src.services.orlicz import WeightedVector, luxemburg_norm, modular
from src.services.spaces import FiniteMeasureSpace, ball_measures, enumerate_simplices
from src.services.young import YoungFunction
from src.templates.message import BAD_DEGREE, PARSE_ERROR, SHAPE_MISMATCH, SIZE_LIMIT, SPACE_MISMATCH

logger = logging.getLogger(__name__)

Chain = list[tuple[tuple[int, ...], int]]


class Cochain:
    """Common interface of the cochain representations."""
    space: FiniteMeasureSpace
    degree: int

    def values_at(self, tuples: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, *points: int) -> float:
        return float(self.values_at(np.asarray([points], dtype=np.int64))[0])

    @property
    def tuple_count(self) -> int:
        return self.space.n_points ** (self.degree + 1)


@dataclass(frozen=True, eq=False)
class DenseCochain(Cochain):
    space: FiniteMeasureSpace
    degree: int
    values: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        expected = (self.space.n_points,) * (self.degree + 1)
        values = np.asarray(self.values, dtype=float)
        if values.shape != expected:
            raise InvalidParameter(SHAPE_MISMATCH.format(degree=self.degree, n=self.space.n_points,
                                                         expected=expected, got=values.shape))
        object.__setattr__(self, "values", values)

    def values_at(self, tuples: np.ndarray) -> np.ndarray:
        tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, self.degree + 1)
        return self.values[tuple(tuples.T)]

    def _check_peer(self, other: "DenseCochain") -> None:
        if other.space is not self.space or other.degree != self.degree:
            raise InvalidParameter(SPACE_MISMATCH)

    def __add__(self, other: "DenseCochain") -> "DenseCochain":
        self._check_peer(other)
        return DenseCochain(self.space, self.degree, self.values + other.values)

    def __sub__(self, other: "DenseCochain") -> "DenseCochain":
        self._check_peer(other)
        return DenseCochain(self.space, self.degree, self.values - other.values)

    def __rmul__(self, scalar: float) -> "DenseCochain":
        return DenseCochain(self.space, self.degree, scalar * self.values)

    def __neg__(self) -> "DenseCochain":
        return DenseCochain(self.space, self.degree, -self.values)


@dataclass(frozen=True, eq=False)
class SparseCochain(Cochain):
    space: FiniteMeasureSpace
    degree: int
    entries: dict

    def values_at(self, tuples: np.ndarray) -> np.ndarray:
        tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, self.degree + 1)
        return np.array([self.entries.get(tuple(row), 0.0) for row in tuples.tolist()], dtype=float)


@dataclass(frozen=True, eq=False)
class LazyCochain(Cochain):
    """d(parent), computed only on the tuples asked for."""
    parent: Cochain

    @property
    def space(self) -> FiniteMeasureSpace:
        return self.parent.space

    @property
    def degree(self) -> int:
        return self.parent.degree + 1

    def values_at(self, tuples: np.ndarray) -> np.ndarray:
        tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, self.degree + 1)
        total = np.zeros(tuples.shape[0])
        for i in range(self.degree + 1):
            face = self.parent.values_at(np.delete(tuples, i, axis=1))
            total += face if i % 2 == 0 else -face
        return total


def _check_degree(k: int) -> None:
    if k < 0 or int(k) != k:
        raise InvalidParameter(BAD_DEGREE.format(degree=k))


def zero_cochain(space: FiniteMeasureSpace, k: int) -> DenseCochain:
    _check_degree(k)
    return DenseCochain(space, k, np.zeros((space.n_points,) * (k + 1)))


def random_cochain(space: FiniteMeasureSpace, k: int, rng: np.random.Generator,
                   scale: float = 1.0) -> DenseCochain:
    """Dense cochain with independent uniform values in [-scale, scale]."""
    _check_degree(k)
    return DenseCochain(space, k, rng.uniform(-scale, scale, size=(space.n_points,) * (k + 1)))


def to_dense(u: Cochain, threshold: int | None = None) -> DenseCochain:
    """Materialise any cochain as a full tensor.

    Raises:
        SizeLimit: If the tensor would have more than ``threshold`` entries.
    """
    if isinstance(u, DenseCochain):
        return u
    threshold = threshold or settings.dense_tuple_threshold
    if u.tuple_count > threshold:
        raise SizeLimit(SIZE_LIMIT.format(what=f"dense {u.degree}-cochain", size=u.tuple_count, cap=threshold))
    shape = (u.space.n_points,) * (u.degree + 1)
    tuples = np.indices(shape).reshape(u.degree + 1, -1).T
    return DenseCochain(u.space, u.degree, u.values_at(tuples).reshape(shape))


def coboundary(u: Cochain, threshold: int | None = None) -> Cochain:
    """d u(x₀,…,x_{k+1}) = Σ_i (−1)^i u(x₀,…,x̂_i,…,x_{k+1}).

    Dense input gives dense output while the (k+2)-tuple tensor stays under
    ``threshold`` entries; otherwise the result is lazy.
    """
    threshold = threshold or settings.dense_tuple_threshold
    n = u.space.n_points
    if isinstance(u, DenseCochain) and n ** (u.degree + 2) <= threshold:
        total = np.zeros((n,) * (u.degree + 2))
        for i in range(u.degree + 2):
            term = np.expand_dims(u.values, i)
            total = total + term if i % 2 == 0 else total - term
        return DenseCochain(u.space, u.degree + 1, total)
    if isinstance(u, DenseCochain):
        logger.warning("coboundary of a %d-cochain on %d points kept lazy", u.degree, n)
    return LazyCochain(u)


def boundary_chain(delta) -> Chain:
    """∂Δ = Σ_i (−1)^i ∂_iΔ, paired so that u(∂Δ) = du(Δ)."""
    delta = tuple(int(x) for x in delta)
    return [(delta[:i] + delta[i + 1:], -1 if i % 2 else 1) for i in range(len(delta))]


def evaluate_chain(u: Cochain, chain: Chain) -> float:
    """Pair a cochain with a formal chain."""
    if not chain:
        return 0.0
    tuples = np.asarray([face for face, _ in chain], dtype=np.int64)
    signs = np.asarray([sign for _, sign in chain], dtype=float)
    return float(np.dot(signs, u.values_at(tuples)))


def _restricted(u: Cochain, s: float, distinct: bool) -> WeightedVector:
    simplices = enumerate_simplices(u.space, u.degree, s, distinct=distinct)
    return WeightedVector(u.values_at(simplices.simplices), simplices.product_weights)


def seminorm(u: Cochain, phi: YoungFunction, s: float, distinct: bool = False) -> float:
    """‖u‖_{φ,s}: Luxemburg norm of u on X_s^{k+1} with product weights.

    ``distinct`` restricts to tuples without repeated points.
    """
    return luxemburg_norm(phi, _restricted(u, s, distinct))


def seminorm_modular(u: Cochain, phi: YoungFunction, s: float, distinct: bool = False) -> float:
    """ρ_{φ,s}(u) on X_s^{k+1} with product weights."""
    return modular(phi, _restricted(u, s, distinct))


def continuity_bound_check(u: Cochain, phi: YoungFunction, s: float) -> tuple[float, float]:
    """Return (ρ_{φ,s}(du), V̄(s)·ρ_{φ,s}((k+2)u)).

    V̄(s) is the largest closed-ball measure: tuples in X_s have diameter at
    most s, so the free vertex ranges over a closed ball around any other.
    """
    k = u.degree
    lhs = seminorm_modular(coboundary(u), phi, s)
    simplices = enumerate_simplices(u.space, k, s)
    scaled = (k + 2) * u.values_at(simplices.simplices)
    rhs = float(ball_measures(u.space, s, closed=True).max()) * modular(
        phi, WeightedVector(scaled, simplices.product_weights))
    return lhs, rhs


def save_cochain(u: Cochain, path: str | Path) -> None:
    """Write nonzero entries as lines ``i0 ... ik value``."""
    if isinstance(u, SparseCochain):
        items = sorted((key, val) for key, val in u.entries.items() if val != 0)
    else:
        dense = to_dense(u)
        idx = np.argwhere(dense.values != 0)
        items = [(tuple(row), dense.values[tuple(row)]) for row in idx.tolist()]
    lines = [" ".join(str(i) for i in key) + f" {float(val)!r}" for key, val in items]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_cochain(path: str | Path, space: FiniteMeasureSpace, degree: int | None = None) -> SparseCochain:
    """Read a cochain file; the degree comes from the column count unless given.

    Raises:
        ParseError: On ragged rows, bad indices or bad numbers.
    """
    entries: dict[tuple[int, ...], float] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        cells = line.split()
        if not cells or cells[0].startswith("#"):
            continue
        if degree is None:
            degree = len(cells) - 2
            if degree < 0:
                raise ParseError(PARSE_ERROR.format(line=line_no, field=len(cells), reason="need indices and a value"),
                                 line=line_no, field=len(cells))
        if len(cells) != degree + 2:
            raise ParseError(PARSE_ERROR.format(line=line_no, field=len(cells), reason=f"expected {degree + 2} fields"),
                             line=line_no, field=len(cells))
        key = []
        for field_no, cell in enumerate(cells[:-1], start=1):
            if not cell.isdigit() or int(cell) >= space.n_points:
                raise ParseError(PARSE_ERROR.format(line=line_no, field=field_no, reason=f"bad point index {cell!r}"),
                                 line=line_no, field=field_no)
            key.append(int(cell))
        try:
            entries[tuple(key)] = float(cells[-1])
        except ValueError:
            raise ParseError(PARSE_ERROR.format(line=line_no, field=len(cells), reason=f"bad value {cells[-1]!r}"),
                             line=line_no, field=len(cells)) from None
    return SparseCochain(space, 0 if degree is None else degree, entries)

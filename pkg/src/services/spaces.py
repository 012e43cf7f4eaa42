"""Finite metric measure spaces.

Cayley balls of free and free abelian groups, paths, grids and explicit
distance matrices; bounded-geometry statistics; enumeration of ordered
tuples of bounded diameter. Balls B(x, r) are open unless stated otherwise.
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from string import ascii_lowercase

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from src.conf.config import settings
from src.services.exceptions import InvalidParameter, InvalidSpace, ParseError, SizeLimit
from src.templates.message import (
    BAD_DEGREE,
    BAD_SCALE,
    INVALID_PARAMETER,
    METRIC_BAD_DIAGONAL,
    METRIC_NEGATIVE,
    METRIC_NOT_SYMMETRIC,
    METRIC_TRIANGLE,
    PARSE_ERROR,
    SIZE_LIMIT,
    WEIGHTS_NOT_POSITIVE,
)

logger = logging.getLogger(__name__)


def metric_defect(dist: np.ndarray, slack: float | None = None, triangle: bool = True) -> str | None:
    """Describe the first way ``dist`` fails to be a metric, or None."""
    slack = settings.metric_slack if slack is None else slack
    n = dist.shape[0]
    if dist.shape != (n, n):
        return f"distance matrix must be square, got {dist.shape}"
    diag = np.flatnonzero(np.abs(np.diag(dist)) > slack)
    if diag.size:
        i = int(diag[0])
        return METRIC_BAD_DIAGONAL.format(i=i, value=dist[i, i])
    neg = np.argwhere(dist < -slack)
    if neg.size:
        return METRIC_NEGATIVE.format(i=int(neg[0, 0]), j=int(neg[0, 1]))
    asym = np.argwhere(np.abs(dist - dist.T) > slack)
    if asym.size:
        return METRIC_NOT_SYMMETRIC.format(i=int(asym[0, 0]), j=int(asym[0, 1]))
    if triangle:
        for k in range(n):
            bad = np.argwhere(dist > dist[:, k:k + 1] + dist[k:k + 1, :] + slack)
            if bad.size:
                i, j = int(bad[0, 0]), int(bad[0, 1])
                return METRIC_TRIANGLE.format(i=i, j=j, k=k, lhs=dist[i, j], rhs=dist[i, k] + dist[k, j])
    return None


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """Weighted points with a metric: the discrete stand-in for (X, μ).

    ``metadata`` records how the space was built (group, radius, boundary
    indices of a truncation) so boundary effects stay auditable.
    """
    weights: np.ndarray
    dist: np.ndarray
    labels: tuple[str, ...] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).ravel()
        dist = np.asarray(self.dist, dtype=float)
        if dist.shape != (weights.size, weights.size):
            raise InvalidSpace(f"distance matrix shape {dist.shape} does not match {weights.size} weights")
        bad = np.flatnonzero(~(weights > 0))
        if bad.size:
            raise InvalidSpace(WEIGHTS_NOT_POSITIVE.format(index=int(bad[0]), value=weights[bad[0]]))
        if self.labels is not None and len(self.labels) != weights.size:
            raise InvalidSpace(f"expected {weights.size} labels, got {len(self.labels)}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dist", dist)

    @classmethod
    def checked(cls, weights, dist, labels=None, metadata=None, triangle: bool = True) -> "FiniteMeasureSpace":
        """Build a space after validating the metric axioms.

        Raises:
            InvalidSpace: Naming the offending entry or triple.
        """
        dist = np.asarray(dist, dtype=float)
        defect = metric_defect(dist, triangle=triangle)
        if defect:
            raise InvalidSpace(defect)
        return cls(weights, dist, tuple(labels) if labels is not None else None, dict(metadata or {}))

    @property
    def n_points(self) -> int:
        return self.weights.size

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n_points else 0.0

    @property
    def boundary(self) -> np.ndarray:
        """Indices marked as the truncation boundary, empty if none."""
        return np.asarray(self.metadata.get("boundary", ()), dtype=int)


# Groups and Cayley balls

@dataclass(frozen=True)
class FreeGroup:
    rank: int

    @property
    def name(self) -> str:
        return f"f{self.rank}"


@dataclass(frozen=True)
class FreeAbelian:
    rank: int

    @property
    def name(self) -> str:
        return f"z{self.rank}"


Group = FreeGroup | FreeAbelian


def parse_group(text: str) -> Group:
    """Parse ``f2`` (free group of rank 2) or ``z3`` (ℤ³)."""
    match = re.fullmatch(r"([fz])(\d+)", text.strip().lower())
    if not match or int(match.group(2)) < 1:
        raise InvalidParameter(INVALID_PARAMETER.format(name="group", value=text, reason="expected f<rank> or z<rank>"))
    rank = int(match.group(2))
    if match.group(1) == "f":
        if rank > len(ascii_lowercase):
            raise InvalidParameter(INVALID_PARAMETER.format(name="group", value=text, reason="rank above 26"))
        return FreeGroup(rank)
    return FreeAbelian(rank)


@dataclass(frozen=True, eq=False)
class CayleyBall:
    """Metric-free enumeration of a word-metric ball.

    Letter 2i is the i-th generator, letter 2i+1 its inverse.
    ``neighbors[x, l]`` is the index of x·l, or -1 when x·l leaves the ball.
    """
    group: Group
    radius: int
    words: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    lengths: np.ndarray
    neighbors: np.ndarray
    letter_names: tuple[str, ...]

    @property
    def n_points(self) -> int:
        return len(self.words)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def sphere_sizes(self) -> list[int]:
        return np.bincount(self.lengths, minlength=self.radius + 1).tolist()

    def edges(self) -> np.ndarray:
        """Directed generator edges (x, x·l) inside the ball."""
        rows, cols = np.nonzero(self.neighbors >= 0)
        return np.column_stack([rows, self.neighbors[rows, cols]])


def _letter_names(group: Group) -> tuple[str, ...]:
    names = []
    for i in range(group.rank):
        if isinstance(group, FreeGroup):
            names += [ascii_lowercase[i], ascii_lowercase[i].upper()]
        else:
            names += [f"+e{i + 1}", f"-e{i + 1}"]
    return tuple(names)


def _free_ball_size(rank: int, radius: int) -> int:
    if rank == 1:
        return 1 + 2 * radius
    return 1 + 2 * rank * ((2 * rank - 1) ** radius - 1) // (2 * rank - 2)


def _free_word_label(word: tuple[int, ...], names: tuple[str, ...]) -> str:
    return "".join(names[letter] for letter in word) or "1"


def enumerate_cayley_ball(group: Group, radius: int, max_points: int | None = None) -> CayleyBall:
    """Enumerate the word-metric ball of the given radius, level by level.

    Free group points are reduced words; free abelian points are lattice
    points with ℓ¹ norm ≤ radius, labelled ``(x1,...,xr)``.

    Raises:
        InvalidParameter: If rank < 1 or radius < 0.
        SizeLimit: If the ball has more than ``max_points`` points.
    """
    max_points = max_points or settings.max_points
    if group.rank < 1 or radius < 0:
        raise InvalidParameter(INVALID_PARAMETER.format(name="radius", value=radius, reason="need rank >= 1, radius >= 0"))
    names = _letter_names(group)
    letters = range(2 * group.rank)
    if isinstance(group, FreeGroup) and _free_ball_size(group.rank, radius) > max_points:
        raise SizeLimit(SIZE_LIMIT.format(what=f"{group.name} ball of radius {radius}",
                                          size=_free_ball_size(group.rank, radius), cap=max_points))

    def step(word: tuple[int, ...], letter: int) -> tuple[int, ...]:
        if isinstance(group, FreeGroup):
            if word and word[-1] == letter ^ 1:
                return word[:-1]
            return word + (letter,)
        point = list(word)
        point[letter // 2] += 1 if letter % 2 == 0 else -1
        return tuple(point)

    origin = () if isinstance(group, FreeGroup) else (0,) * group.rank
    index = {origin: 0}
    words = [origin]
    lengths = [0]
    frontier = [origin]
    for length in range(1, radius + 1):
        fresh = []
        for word in frontier:
            for letter in letters:
                nxt = step(word, letter)
                if nxt in index:
                    continue
                if len(words) >= max_points:
                    raise SizeLimit(SIZE_LIMIT.format(what=f"{group.name} ball of radius {radius}",
                                                      size=f"more than {max_points}", cap=max_points))
                index[nxt] = len(words)
                words.append(nxt)
                lengths.append(length)
                fresh.append(nxt)
        frontier = fresh

    neighbors = np.full((len(words), len(letters)), -1, dtype=np.int64)
    for i, word in enumerate(words):
        for letter in letters:
            neighbors[i, letter] = index.get(step(word, letter), -1)

    if isinstance(group, FreeGroup):
        labels = tuple(_free_word_label(w, names) for w in words)
    else:
        labels = tuple("(" + ",".join(str(c) for c in w) + ")" for w in words)
    logger.info("enumerated %s ball of radius %d: %d points", group.name, radius, len(words))
    return CayleyBall(group, radius, tuple(words), labels, np.asarray(lengths, dtype=np.int64), neighbors, names)


def graph_distances(n_points: int, edges: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """All-pairs shortest path lengths of an undirected graph."""
    graph = nx.Graph()
    graph.add_nodes_from(range(n_points))
    if weights is None:
        graph.add_edges_from(map(tuple, edges))
    else:
        graph.add_weighted_edges_from((int(a), int(b), float(w)) for (a, b), w in zip(edges, weights))
    adjacency = nx.to_scipy_sparse_array(graph, nodelist=range(n_points), format="csr")
    return shortest_path(csr_matrix(adjacency), directed=False, unweighted=weights is None)


def _dense_cap(n_points: int, what: str) -> None:
    if n_points > settings.max_dense_points:
        raise SizeLimit(SIZE_LIMIT.format(what=what, size=n_points, cap=settings.max_dense_points))


def build_cayley_ball(group: Group, radius: int, max_points: int | None = None) -> FiniteMeasureSpace:
    """Cayley ball with unit weights and the word metric (BFS on generator edges).

    The outer sphere is recorded as the truncation boundary.

    Raises:
        SizeLimit: If the ball exceeds the enumeration cap or the dense-metric cap.
    """
    if radius < 1:
        raise InvalidParameter(INVALID_PARAMETER.format(name="radius", value=radius, reason="must be >= 1"))
    ball = enumerate_cayley_ball(group, radius, max_points)
    _dense_cap(ball.n_points, f"{group.name} ball metric")
    dist = graph_distances(ball.n_points, ball.edges())
    metadata = {
        "kind": "cayley",
        "group": group.name,
        "radius": radius,
        "center": 0,
        "boundary": np.flatnonzero(ball.lengths == radius).tolist(),
    }
    return FiniteMeasureSpace(np.ones(ball.n_points), dist, ball.labels, metadata)


def build_path(n_points: int) -> FiniteMeasureSpace:
    """Path 0..n_points-1 with unit weights and dist(i, j) = |i - j|."""
    if n_points < 1:
        raise InvalidParameter(INVALID_PARAMETER.format(name="n_points", value=n_points, reason="must be >= 1"))
    _dense_cap(n_points, "path metric")
    idx = np.arange(n_points, dtype=float)
    boundary = sorted({0, n_points - 1})
    return FiniteMeasureSpace(np.ones(n_points), np.abs(idx[:, None] - idx[None, :]),
                              tuple(str(i) for i in range(n_points)),
                              {"kind": "path", "n_points": n_points, "boundary": boundary})


def build_grid(rows: int, cols: int) -> FiniteMeasureSpace:
    """rows × cols grid with the ℓ¹ metric, row-major order, perimeter as boundary."""
    if rows < 1 or cols < 1:
        raise InvalidParameter(INVALID_PARAMETER.format(name="shape", value=(rows, cols), reason="must be positive"))
    _dense_cap(rows * cols, "grid metric")
    r, c = np.divmod(np.arange(rows * cols), cols)
    dist = np.abs(r[:, None] - r[None, :]) + np.abs(c[:, None] - c[None, :])
    on_edge = (r == 0) | (r == rows - 1) | (c == 0) | (c == cols - 1)
    labels = tuple(f"({i},{j})" for i, j in zip(r, c))
    return FiniteMeasureSpace(np.ones(rows * cols), dist.astype(float), labels,
                              {"kind": "grid", "shape": [rows, cols], "boundary": np.flatnonzero(on_edge).tolist()})


def build_from_distances(dist, weights=None, labels=None) -> FiniteMeasureSpace:
    """Validated space from an explicit distance matrix (unit weights by default)."""
    dist = np.asarray(dist, dtype=float)
    weights = np.ones(dist.shape[0]) if weights is None else weights
    return FiniteMeasureSpace.checked(weights, dist, labels, {"kind": "explicit"})


def subdivide(space: FiniteMeasureSpace) -> tuple[FiniteMeasureSpace, np.ndarray, np.ndarray]:
    """Insert the midpoint of every unit-length edge.

    ``space.dist`` must be the path metric of its unit-distance graph. The
    new points get weight 1 and sit at distance 1/2 from both endpoints.

    Returns:
        tuple: The subdivided space, the inclusion X → Y and the retraction
            Y → X sending a midpoint to its smaller endpoint.
    """
    dist = space.dist
    n = space.n_points
    edges = np.argwhere(np.triu(np.isclose(dist, 1.0), 1))
    a, b = edges[:, 0], edges[:, 1]
    m = edges.shape[0]
    _dense_cap(n + m, "subdivision metric")
    full = np.zeros((n + m, n + m))
    full[:n, :n] = dist
    to_points = 0.5 + np.minimum(dist[a], dist[b])
    full[n:, :n] = to_points
    full[:n, n:] = to_points.T
    between = 1.0 + np.minimum.reduce([dist[np.ix_(a, a)], dist[np.ix_(a, b)], dist[np.ix_(b, a)], dist[np.ix_(b, b)]])
    np.fill_diagonal(between, 0.0)
    full[n:, n:] = between
    weights = np.concatenate([space.weights, np.ones(m)])
    labels = None
    if space.labels is not None:
        labels = space.labels + tuple(f"{space.labels[i]}|{space.labels[j]}" for i, j in edges)
    boundary = space.boundary.tolist()
    metadata = {"kind": "subdivision", "parent": dict(space.metadata), "boundary": boundary}
    inclusion = np.arange(n)
    retraction = np.concatenate([np.arange(n), a])
    return FiniteMeasureSpace(weights, full, labels, metadata), inclusion, retraction


# Simplices

@dataclass(frozen=True, eq=False)
class SimplexSet:
    """Ordered (k+1)-tuples of diameter ≤ s in lexicographic order."""
    degree: int
    scale: float
    simplices: np.ndarray
    product_weights: np.ndarray
    n_points: int
    distinct: bool = False

    def __len__(self) -> int:
        return self.simplices.shape[0]


def enumerate_simplices(space: FiniteMeasureSpace, k: int, s: float, distinct: bool = False,
                        max_simplices: int | None = None) -> SimplexSet:
    """Enumerate X_s^{k+1}, repeats allowed unless ``distinct`` (simplicial mode).

    Raises:
        InvalidParameter: If k < 0 or s < 0.
        SizeLimit: On combinatorial blowup.
    """
    max_simplices = max_simplices or settings.max_simplices
    if k < 0 or int(k) != k:
        raise InvalidParameter(BAD_DEGREE.format(degree=k))
    if s < 0:
        raise InvalidParameter(BAD_SCALE.format(scale=s))
    n = space.n_points
    close = space.dist <= s + settings.metric_slack
    tuples = np.arange(n, dtype=np.int64)[:, None]
    for _ in range(k):
        m = tuples.shape[0]
        if m * n > 4 * max_simplices:
            raise SizeLimit(SIZE_LIMIT.format(what="simplex candidates", size=m * n, cap=4 * max_simplices))
        allowed = np.ones((m, n), dtype=bool)
        for col in range(tuples.shape[1]):
            allowed &= close[tuples[:, col]]
        if distinct:
            allowed[np.arange(m)[:, None], tuples] = False
        rows, cols = np.nonzero(allowed)
        if rows.size > max_simplices:
            raise SizeLimit(SIZE_LIMIT.format(what=f"X_s^{k + 1}", size=rows.size, cap=max_simplices))
        tuples = np.column_stack([tuples[rows], cols])
    weights = np.prod(space.weights[tuples], axis=1)
    return SimplexSet(k, float(s), tuples, weights, n, distinct)


# Geometry

def ball_measures(space: FiniteMeasureSpace, r: float, closed: bool = False) -> np.ndarray:
    """μ(B(x, r)) for every x; open balls unless ``closed``."""
    inside = space.dist <= r + settings.metric_slack if closed else space.dist < r
    return inside @ space.weights


def midpoint_constant(space: FiniteMeasureSpace) -> float:
    """Smallest 𝔠 with a z for every pair such that |x−z|, |y−z| ≤ |x−y|/2 + 𝔠."""
    dist = space.dist
    worst = 0.0
    for x in range(space.n_points):
        reach = np.maximum(dist[x][None, :], dist).min(axis=1)
        worst = max(worst, float(np.max(reach - dist[x] / 2.0)))
    return worst


@dataclass(frozen=True)
class GeometryStats:
    """Open-ball measure bounds at radius r.

    The ``*_interior`` fields restrict to points at distance ≥ r from the
    truncation boundary (all points when the space has none).
    """
    r: float
    v: float
    V: float
    midpoint_constant: float
    v_interior: float
    V_interior: float
    interior_count: int
    r0: float = 0.0


def geometry_stats(space: FiniteMeasureSpace, r: float) -> GeometryStats:
    """Bounded-geometry statistics v(r), V(r) and the midpoint constant.

    Every atom has positive weight, so every open ball of positive radius
    has positive measure and r₀ is reported as 0.

    Raises:
        InvalidParameter: If r ≤ 0.
    """
    if not r > 0:
        raise InvalidParameter(INVALID_PARAMETER.format(name="r", value=r, reason="must be > 0"))
    measures = ball_measures(space, r)
    boundary = space.boundary
    if boundary.size:
        interior = space.dist[:, boundary].min(axis=1) >= r
    else:
        interior = np.ones(space.n_points, dtype=bool)
    inner = measures[interior] if interior.any() else measures
    return GeometryStats(
        r=float(r),
        v=float(measures.min()),
        V=float(measures.max()),
        midpoint_constant=midpoint_constant(space),
        v_interior=float(inner.min()),
        V_interior=float(inner.max()),
        interior_count=int(interior.sum()),
    )


# Space files

def save_space(space: FiniteMeasureSpace, path: str | Path) -> None:
    """Write header ``n k`` (k = 1 when labels follow), weights, distance rows, labels."""
    has_labels = space.labels is not None
    lines = [f"{space.n_points} {int(has_labels)}", " ".join(repr(float(w)) for w in space.weights)]
    lines += [" ".join(repr(float(d)) for d in row) for row in space.dist]
    if has_labels:
        lines += list(space.labels)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_floats(text: str, line_no: int, expected: int) -> np.ndarray:
    cells = text.split()
    if len(cells) != expected:
        raise ParseError(PARSE_ERROR.format(line=line_no, field=len(cells), reason=f"expected {expected} numbers"),
                         line=line_no, field=len(cells))
    out = np.empty(expected)
    for field_no, cell in enumerate(cells, start=1):
        try:
            out[field_no - 1] = float(cell)
        except ValueError:
            raise ParseError(PARSE_ERROR.format(line=line_no, field=field_no, reason=f"bad number {cell!r}"),
                             line=line_no, field=field_no) from None
    return out


def load_space(path: str | Path) -> FiniteMeasureSpace:
    """Read a space file written by ``save_space``.

    Raises:
        ParseError: With the line and field of the first problem, including
            metric axiom failures (the triangle message names the triple).
    """
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    if not raw:
        raise ParseError(PARSE_ERROR.format(line=1, field=0, reason="empty file"), line=1)
    header = raw[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header) or header[1] not in ("0", "1"):
        raise ParseError(PARSE_ERROR.format(line=1, field=0, reason="header must be 'n k' with k in {0, 1}"), line=1)
    n, has_labels = int(header[0]), header[1] == "1"
    needed = 2 + n + (n if has_labels else 0)
    if len(raw) < needed:
        raise ParseError(PARSE_ERROR.format(line=len(raw) + 1, field=0, reason=f"expected {needed} lines"),
                         line=len(raw) + 1)
    weights = _parse_floats(raw[1], 2, n)
    dist = np.vstack([_parse_floats(raw[2 + i], 3 + i, n) for i in range(n)]) if n else np.zeros((0, 0))
    labels = tuple(line.strip() for line in raw[2 + n:2 + 2 * n]) if has_labels else None
    bad = np.flatnonzero(~(weights > 0))
    if bad.size:
        raise ParseError(PARSE_ERROR.format(line=2, field=int(bad[0]) + 1,
                                            reason=WEIGHTS_NOT_POSITIVE.format(index=int(bad[0]), value=weights[bad[0]])),
                         line=2, field=int(bad[0]) + 1)
    defect = metric_defect(dist)
    if defect:
        raise ParseError(PARSE_ERROR.format(line=3, field=0, reason=defect), line=3)
    return FiniteMeasureSpace(weights, dist, labels, {"kind": "file", "source": str(path)})

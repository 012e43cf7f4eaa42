"""Young-function calculus.

Evaluation, derivatives, numeric convex conjugation, doubling diagnostics and
the Besov summability heuristic. Every function here is vectorised: a scalar
argument returns a float, an array argument returns an array of the same
shape.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from src.conf.config import settings
from src.services.exceptions import BracketOverflow, InvalidYoungFunction, NonFiniteArgument
from src.templates.message import BRACKET_OVERFLOW, INVALID_YOUNG_FUNCTION, NON_FINITE_ARGUMENT

logger = logging.getLogger(__name__)

DEFAULT_SPLICE = math.sqrt(2.0 / 3.0)
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_TINY = 1e-300

ArrayFn = Callable[[np.ndarray], np.ndarray]


class Family(str, Enum):
    """Built-in Young function families, tagged as in ``--phi`` specs."""
    POWER = "power"
    POWER_OVER_P = "pop"
    EXP_INVERSE_SQUARE = "expinvsq"
    POWER_LOG = "powerlog"
    CUSTOM = "custom"


def _checked(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = arr[~np.isfinite(arr)].ravel()[0] if arr.ndim else arr
        raise NonFiniteArgument(NON_FINITE_ARGUMENT.format(value=float(bad)))
    return arr


def _shaped(arr: np.ndarray, like: np.ndarray):
    return float(arr) if like.ndim == 0 else arr


@dataclass(frozen=True)
class YoungFunction:
    """A convex even function φ with φ(0) = 0 and φ(t) > 0 for t ≠ 0.

    Use the factory class methods rather than the constructor. ``Custom``
    callables receive nonnegative numpy arrays; evenness is enforced by
    evaluating them at |t|.
    """
    family: Family
    params: tuple[float, ...] = ()
    label: str = ""
    custom_eval: ArrayFn | None = field(default=None, compare=False, repr=False)
    custom_deriv: ArrayFn | None = field(default=None, compare=False, repr=False)
    splice_alpha: float = field(default=0.0, compare=False, repr=False)
    splice_beta: float = field(default=0.0, compare=False, repr=False)

    @classmethod
    def power(cls, p: float) -> "YoungFunction":
        """φ(t) = |t|^p, p ≥ 1."""
        if not p >= 1:
            raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(family="power", reason="p must be >= 1"))
        return cls(Family.POWER, (float(p),))

    @classmethod
    def power_over_p(cls, p: float) -> "YoungFunction":
        """φ(t) = |t|^p / p, p ≥ 1."""
        if not p >= 1:
            raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(family="pop", reason="p must be >= 1"))
        return cls(Family.POWER_OVER_P, (float(p),))

    @classmethod
    def exp_inverse_square(cls, splice: float = DEFAULT_SPLICE) -> "YoungFunction":
        """φ(t) = exp(-1/t²) up to the splice point, α + β·exp(|t|) beyond it.

        α and β make φ continuously differentiable at the splice. The splice
        must not pass the inflection point √(2/3), where exp(-1/t²) stops
        being convex.
        """
        if not 0 < splice <= DEFAULT_SPLICE + 1e-15:
            raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(
                family="expinvsq", reason=f"splice point must lie in (0, {DEFAULT_SPLICE:.6f}]"))
        value = math.exp(-1.0 / splice**2)
        slope = 2.0 / splice**3 * value
        beta = slope * math.exp(-splice)
        alpha = value - slope
        return cls(Family.EXP_INVERSE_SQUARE, (float(splice),), splice_alpha=alpha, splice_beta=beta)

    @classmethod
    def power_log(cls, p: float, a: float) -> "YoungFunction":
        """φ(t) = |t|^p · log(e + |t|)^a, convex for p ≥ 1 and a ≥ 0."""
        if not (p >= 1 and a >= 0):
            raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(
                family="powerlog", reason="need p >= 1 and a >= 0"))
        return cls(Family.POWER_LOG, (float(p), float(a)))

    @classmethod
    def custom(cls, evaluate_fn: ArrayFn, derivative_fn: ArrayFn | None = None,
               label: str = "custom") -> "YoungFunction":
        """Wrap user callables; convexity is only checked on grids."""
        return cls(Family.CUSTOM, (), label=label, custom_eval=evaluate_fn, custom_deriv=derivative_fn)

    @property
    def spec(self) -> str:
        """Text form of the function, as accepted by ``--phi``."""
        if self.family is Family.CUSTOM:
            return f"custom:{self.label}"
        if self.family is Family.EXP_INVERSE_SQUARE and math.isclose(self.params[0], DEFAULT_SPLICE):
            return "expinvsq"
        return f"{self.family.value}:" + ",".join(f"{p:g}" for p in self.params)

    def __call__(self, t):
        return evaluate(self, t)

    def eval_abs(self, a: np.ndarray) -> np.ndarray:
        """φ on a nonnegative array, without argument checks."""
        match self.family:
            case Family.POWER:
                return a ** self.params[0]
            case Family.POWER_OVER_P:
                return a ** self.params[0] / self.params[0]
            case Family.POWER_LOG:
                p, q = self.params
                return a**p * np.log(math.e + a) ** q
            case Family.EXP_INVERSE_SQUARE:
                with np.errstate(divide="ignore", over="ignore"):
                    inner = np.exp(-1.0 / np.square(a))
                    outer = self.splice_alpha + self.splice_beta * np.exp(a)
                return np.where(a <= self.params[0], inner, outer)
            case _:
                return np.asarray(self.custom_eval(a), dtype=float)

    def deriv_abs(self, a: np.ndarray) -> np.ndarray:
        """φ′ on a nonnegative array, without argument checks."""
        match self.family:
            case Family.POWER:
                p = self.params[0]
                return np.where(a > 0, p * a ** (p - 1.0), 0.0)
            case Family.POWER_OVER_P:
                p = self.params[0]
                return np.where(a > 0, a ** (p - 1.0), 0.0)
            case Family.POWER_LOG:
                p, q = self.params
                log_term = np.log(math.e + a)
                value = p * a ** (p - 1.0) * log_term**q + q * a**p * log_term ** (q - 1.0) / (math.e + a)
                return np.where(a > 0, value, 0.0)
            case Family.EXP_INVERSE_SQUARE:
                safe = np.where(a > 0, a, 1.0)
                with np.errstate(over="ignore"):
                    inner = 2.0 / safe**3 * np.exp(-1.0 / safe**2)
                    outer = self.splice_beta * np.exp(a)
                return np.where(a == 0, 0.0, np.where(a <= self.params[0], inner, outer))
            case _:
                if self.custom_deriv is not None:
                    return np.where(a > 0, np.asarray(self.custom_deriv(a), dtype=float), 0.0)
                step = settings.fd_relative_step * np.maximum(a, 1.0)
                central = (self.eval_abs(a + step) - self.eval_abs(np.abs(a - step))) / (2.0 * step)
                return np.where(a > 0, central, 0.0)

    def derivative(self, t):
        return derivative(self, t)

    def scaled(self, lam: float) -> "YoungFunction":
        """Return λφ as a Custom Young function."""
        if not lam > 0:
            raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(family=self.spec, reason="scale must be > 0"))
        return YoungFunction.custom(
            lambda a: lam * self.eval_abs(a),
            lambda a: lam * self.deriv_abs(a),
            label=f"{lam:g}*{self.spec}",
        )

    def conjugate(self) -> "YoungFunction":
        """Return the numerically conjugated Young function ψ.

        ψ′(s) is the maximiser of t·s − φ(t), which the conjugate search
        already produces.
        """
        return YoungFunction.custom(
            lambda a: _conjugate_search(self, a)[0],
            lambda a: _conjugate_search(self, a)[1],
            label=f"conj({self.spec})",
        )


def evaluate(phi: YoungFunction, t):
    """Evaluate φ(t) = φ(|t|).

    Args:
        phi (YoungFunction): The Young function.
        t (float | np.ndarray): Finite argument(s).

    Raises:
        NonFiniteArgument: If any argument is NaN or infinite.

    Returns:
        float | np.ndarray: φ(|t|), zero exactly at t = 0.
    """
    arr = _checked(t)
    return _shaped(phi.eval_abs(np.abs(arr)), arr)


def derivative(phi: YoungFunction, t):
    """Odd derivative of φ with φ′(0) = 0.

    Custom functions without a derivative use a central difference with
    relative step ``settings.fd_relative_step``.
    """
    arr = _checked(t)
    return _shaped(np.sign(arr) * phi.deriv_abs(np.abs(arr)), arr)


def _conjugate_search(phi: YoungFunction, s, rtol: float | None = None,
                      t_max: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Maximise t·|s| − φ(t) over t ≥ 0; return (values, maximisers)."""
    rtol = rtol or settings.conjugate_rtol
    t_max = t_max or settings.conjugate_t_max
    target = np.abs(np.asarray(s, dtype=float))
    values = np.zeros_like(target)
    argmax = np.zeros_like(target)
    active = target > 0
    if not active.any():
        return values, argmax
    slope_at = target[active]

    def slope(t: np.ndarray) -> np.ndarray:
        return slope_at - phi.deriv_abs(t)

    def gain(t: np.ndarray) -> np.ndarray:
        return t * slope_at - phi.eval_abs(t)

    lo = np.zeros_like(slope_at)
    hi = np.ones_like(slope_at)
    grow = slope(hi) >= 0
    while grow.any():
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2.0 * hi, hi)
        if np.any(hi[grow] > t_max):
            culprit = float(slope_at[grow & (hi > t_max)][0])
            raise BracketOverflow(BRACKET_OVERFLOW.format(limit=t_max, s=culprit))
        grow &= slope(hi) >= 0

    shrink = (lo == 0) & (slope(hi / 2.0) < 0) & (hi / 2.0 > _TINY)
    while shrink.any():
        hi = np.where(shrink, hi / 2.0, hi)
        shrink &= (slope(hi / 2.0) < 0) & (hi / 2.0 > _TINY)
    lo = np.where((lo == 0) & (slope(hi / 2.0) >= 0), hi / 2.0, lo)

    for _ in range(400):
        open_ = (hi - lo) > rtol * hi
        if not open_.any():
            break
        width = hi - lo
        left = hi - _INV_GOLDEN * width
        right = lo + _INV_GOLDEN * width
        keep_left = gain(left) >= gain(right)
        hi = np.where(open_ & keep_left, right, hi)
        lo = np.where(open_ & ~keep_left, left, lo)

    best = 0.5 * (lo + hi)
    values[active] = np.maximum(gain(best), 0.0)
    argmax[active] = best
    return values, argmax


def conjugate_eval(phi: YoungFunction, s, rtol: float | None = None, t_max: float | None = None):
    """Numeric convex conjugate ψ(s) = sup{t|s| − φ(t) : t ≥ 0}.

    The maximiser is bracketed by doubling (or halving) t until the slope
    |s| − φ′(t) changes sign, then located by golden-section search to
    relative width ``rtol``.

    Args:
        phi (YoungFunction): The Young function.
        s (float | np.ndarray): Finite argument(s).
        rtol (float | None): Relative bracket width, defaults to settings.
        t_max (float | None): Bracket ceiling, defaults to settings.

    Raises:
        BracketOverflow: If the slope never turns negative below ``t_max``;
            ψ(s) is then infinite.

    Returns:
        float | np.ndarray: ψ(s).
    """
    arr = _checked(s)
    values, _ = _conjugate_search(phi, arr, rtol, t_max)
    return _shaped(values, arr)


class DoublingVerdict(str, Enum):
    DOUBLING_ON_GRID = "DoublingOnGrid"
    NOT_DOUBLING_ON_GRID = "NotDoublingOnGrid"


@dataclass(frozen=True)
class DoublingReport:
    """Grid diagnostic of φ(2t) ≤ Dφ(t); never a proof."""
    grid: tuple[float, ...]
    max_ratio: float
    ratio_argmax: float
    verdict: DoublingVerdict
    constant: float | None


def log_grid(lo: float = 1e-6, hi: float = 1e6, points: int = 241) -> np.ndarray:
    """Logarithmically spaced positive grid."""
    return np.logspace(math.log10(lo), math.log10(hi), points)


def doubling_report(phi: YoungFunction, grid=None, threshold: float | None = None) -> DoublingReport:
    """Maximise φ(2t)/φ(t) over a positive grid.

    A zero φ(t) (underflow) counts as an infinite ratio.

    Raises:
        InvalidYoungFunction: If the grid is empty or has a nonpositive entry.
    """
    threshold = threshold or settings.doubling_explosion
    points = log_grid() if grid is None else _checked(grid).ravel()
    if points.size == 0 or np.any(points <= 0):
        raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(family=phi.spec, reason="grid must be nonempty and positive"))
    base = phi.eval_abs(points)
    doubled = phi.eval_abs(2.0 * points)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(base > 0, doubled / np.where(base > 0, base, 1.0), np.inf)
    idx = int(np.argmax(ratio))
    max_ratio = float(ratio[idx])
    doubling = max_ratio <= threshold
    return DoublingReport(
        grid=tuple(float(x) for x in points),
        max_ratio=max_ratio,
        ratio_argmax=float(points[idx]),
        verdict=DoublingVerdict.DOUBLING_ON_GRID if doubling else DoublingVerdict.NOT_DOUBLING_ON_GRID,
        constant=max_ratio if doubling else None,
    )


def young_identity_residual(phi: YoungFunction, t: float) -> float:
    """Relative residual of ψ(φ′(t)) = tφ′(t) − φ(t).

    The defect is divided by max(1, |tφ′(t) − φ(t)|) so that the tolerance
    stays meaningful where both sides are large.
    """
    a = abs(float(_checked(t)))
    slope = float(phi.deriv_abs(np.asarray(a)))
    expected = a * slope - float(phi.eval_abs(np.asarray(a)))
    got = conjugate_eval(phi, slope)
    return abs(got - expected) / max(1.0, abs(expected))


class BesovVerdict(str, Enum):
    CONVERGENT_LIKELY = "ConvergentLikely"
    DIVERGENT_LIKELY = "DivergentLikely"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class BesovReport:
    checkpoints: tuple[int, ...]
    partial_sums: tuple[float, ...]
    tail_ratios: tuple[float, ...]
    verdict: BesovVerdict


def besov_summability(phi: YoungFunction, n: int, m_max: int = 1_000_000,
                      tail_rtol: float | None = None, growth: float | None = None) -> BesovReport:
    """Cauchy-tail heuristic for Σ_{m≥1} φ(1/m)·m^{n-1} < ∞.

    Partial sums are taken at M = 100·2^j ≤ m_max. The series is judged
    convergent when the last doubling of M moves the sum by less than
    ``tail_rtol`` relative, or when successive doubling tails shrink by a
    stable factor ≤ 1/growth; divergent when they grow by a stable factor
    ≥ growth. Anything else is inconclusive.
    """
    tail_rtol = tail_rtol or settings.besov_tail_rtol
    growth = growth or settings.besov_growth
    if n < 2 or m_max < 100:
        raise InvalidYoungFunction(INVALID_YOUNG_FUNCTION.format(family=phi.spec, reason="need n >= 2 and m_max >= 100"))
    m = np.arange(1, m_max + 1, dtype=float)
    sums = np.cumsum(phi.eval_abs(1.0 / m) * m ** (n - 1))
    checkpoints = []
    mark = 100
    while mark <= m_max:
        checkpoints.append(mark)
        mark *= 2
    partial = [float(sums[c - 1]) for c in checkpoints]
    tails = np.diff(partial)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tails[1:] / tails[:-1]

    verdict = BesovVerdict.INCONCLUSIVE
    if tails.size and tails[-1] < tail_rtol * partial[-1]:
        verdict = BesovVerdict.CONVERGENT_LIKELY
    elif ratios.size >= 3:
        recent = ratios[-3:]
        if np.all(np.isfinite(recent)) and np.ptp(recent) <= 0.05:
            if recent.min() >= growth:
                verdict = BesovVerdict.DIVERGENT_LIKELY
            elif recent.max() <= 1.0 / growth:
                verdict = BesovVerdict.CONVERGENT_LIKELY
    logger.debug("besov %s n=%d: %s", phi.spec, n, verdict.value)
    return BesovReport(tuple(checkpoints), tuple(partial), tuple(float(r) for r in ratios), verdict)


@dataclass(frozen=True)
class NFunctionReport:
    small_ratio: float
    unit_ratio: float
    large_ratio: float
    is_n_function: bool


def n_function_report(phi: YoungFunction, small: float = 1e-12, large: float = 1e12) -> NFunctionReport:
    """Diagnose φ(t)/t → 0 at 0 and → ∞ at ∞ from three sample points."""
    with np.errstate(over="ignore"):
        small_ratio = float(phi.eval_abs(np.asarray(small))) / small
        unit_ratio = float(phi.eval_abs(np.asarray(1.0)))
        large_ratio = float(phi.eval_abs(np.asarray(large))) / large
    is_n = small_ratio < 1e-3 * unit_ratio and large_ratio > 1e3 * unit_ratio
    return NFunctionReport(small_ratio, unit_ratio, large_ratio, is_n)


def convexity_violation(phi: YoungFunction, grid) -> float:
    """Largest midpoint-convexity defect φ((x+y)/2) − (φ(x)+φ(y))/2 over grid pairs.

    Returns 0 when φ is midpoint convex on the grid.
    """
    points = _checked(grid).ravel()
    x, y = np.meshgrid(points, points, indexing="ij")
    mid = phi.eval_abs(np.abs(0.5 * (x + y)))
    avg = 0.5 * (phi.eval_abs(np.abs(x)) + phi.eval_abs(np.abs(y)))
    return float(max(0.0, np.max(mid - avg)))

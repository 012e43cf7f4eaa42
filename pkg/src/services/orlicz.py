"""Modulars and Luxemburg norms on finite weighted point sets."""
import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.conf.config import settings
from src.services.exceptions import InvalidParameter, NonConvergence, ParseError
from src.services.young import YoungFunction
from src.templates.message import (
    INVALID_PARAMETER,
    NORM_BRACKET_FAILED,
    NORM_NON_CONVERGENCE,
    PARSE_ERROR,
    WEIGHTS_NOT_POSITIVE,
)

logger = logging.getLogger(__name__)

_MAX_BRACKET_STEPS = 2100


@dataclass(frozen=True, eq=False)
class WeightedVector:
    """Values on atoms together with the atom measures."""
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if values.shape != weights.shape:
            raise InvalidParameter(INVALID_PARAMETER.format(
                name="weights", value=weights.size, reason=f"expected {values.size} entries"))
        bad = np.flatnonzero(~(weights > 0))
        if bad.size:
            raise InvalidParameter(WEIGHTS_NOT_POSITIVE.format(index=int(bad[0]), value=weights[bad[0]]))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, values) -> "WeightedVector":
        values = np.asarray(values, dtype=float).ravel()
        return cls(values, np.ones_like(values))

    def with_values(self, values) -> "WeightedVector":
        return WeightedVector(values, self.weights)

    def __len__(self) -> int:
        return self.values.size


def modular(phi: YoungFunction, f: WeightedVector) -> float:
    """ρ_φ(f) = Σ w_i φ(f_i)."""
    return float(np.dot(f.weights, phi(f.values)))


@dataclass(frozen=True)
class NormSolution:
    """Luxemburg norm with the modular reached at it, for auditing."""
    norm: float
    modular_at_norm: float
    steps: int


def luxemburg_solve(phi: YoungFunction, f: WeightedVector, rtol: float | None = None,
                    max_steps: int | None = None) -> NormSolution:
    """Compute ‖f‖_φ = inf{α > 0 : ρ_φ(f/α) ≤ 1}.

    α starts at 1 and is doubled or halved until ρ_φ(f/α) straddles 1, then
    bisected to relative width ``rtol``. α ↦ ρ_φ(f/α) is nonincreasing,
    which makes the bisection correct. The upper end of the final bracket is
    returned, so ρ_φ(f/norm) ≤ 1 holds.

    Args:
        phi (YoungFunction): The Young function.
        f (WeightedVector): The vector.
        rtol (float | None): Relative tolerance on α, defaults to settings.
        max_steps (int | None): Bisection cap, defaults to settings.

    Raises:
        NonConvergence: If the modular never crosses 1 or the bisection cap is hit.

    Returns:
        NormSolution: The norm, ρ_φ(f/norm) and the bisection step count.
    """
    rtol = rtol or settings.luxemburg_rtol
    max_steps = max_steps or settings.luxemburg_max_steps
    if not np.any(f.values):
        return NormSolution(0.0, 0.0, 0)

    def rho(alpha: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.dot(f.weights, phi.eval_abs(np.abs(f.values) / alpha)))

    alpha = 1.0
    if rho(alpha) > 1.0:
        lo = alpha
        for _ in range(_MAX_BRACKET_STEPS):
            alpha *= 2.0
            if rho(alpha) <= 1.0:
                break
            lo = alpha
        else:
            raise NonConvergence(NORM_BRACKET_FAILED)
        hi = alpha
    else:
        hi = alpha
        for _ in range(_MAX_BRACKET_STEPS):
            alpha /= 2.0
            if alpha == 0.0:
                break
            if rho(alpha) > 1.0:
                break
            hi = alpha
        else:
            raise NonConvergence(NORM_BRACKET_FAILED)
        if alpha == 0.0:
            raise NonConvergence(NORM_BRACKET_FAILED)
        lo = alpha

    steps = 0
    while hi - lo > rtol * hi:
        if steps >= max_steps:
            raise NonConvergence(NORM_NON_CONVERGENCE.format(steps=max_steps), best=hi)
        mid = 0.5 * (lo + hi)
        if rho(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        steps += 1
    return NormSolution(hi, rho(hi), steps)


def luxemburg_norm(phi: YoungFunction, f: WeightedVector, rtol: float | None = None,
                   max_steps: int | None = None) -> float:
    """Luxemburg norm ‖f‖_φ; see ``luxemburg_solve``."""
    return luxemburg_solve(phi, f, rtol, max_steps).norm


def holder_check(phi: YoungFunction, f: WeightedVector, g: WeightedVector) -> tuple[float, float]:
    """Return (Σ w|fg|, 2‖f‖_φ‖g‖_ψ) with ψ the numeric conjugate of φ.

    Raises:
        InvalidParameter: If f and g carry different weights.
    """
    if f.weights.shape != g.weights.shape or not np.allclose(f.weights, g.weights):
        raise InvalidParameter(INVALID_PARAMETER.format(name="g", value="weights", reason="must match f"))
    lhs = float(np.dot(f.weights, np.abs(f.values * g.values)))
    rhs = 2.0 * luxemburg_norm(phi, f) * luxemburg_norm(phi.conjugate(), g)
    return lhs, rhs


def scaling_bounds_check(phi: YoungFunction, lam: float, f: WeightedVector) -> tuple[float, float, float]:
    """Return (‖f‖_φ, ‖f‖_{λφ}, max(λ, 1/λ)).

    Raises:
        InvalidParameter: If λ is not positive.
    """
    if not lam > 0:
        raise InvalidParameter(INVALID_PARAMETER.format(name="lambda", value=lam, reason="must be > 0"))
    constant = max(lam, 1.0 / lam)
    return luxemburg_norm(phi, f), luxemburg_norm(phi.scaled(lam), f), constant


def modular_convergence_profile(phi: YoungFunction, f: WeightedVector,
                                scales) -> list[tuple[float, float, float]]:
    """Norm and modular of f/n for each n in ``scales``.

    For doubling φ both columns tend to 0 together.
    """
    profile = []
    for n in scales:
        scaled = f.with_values(f.values / n)
        profile.append((float(n), luxemburg_norm(phi, scaled), modular(phi, scaled)))
    return profile


def load_weighted_vector(path: str | Path) -> WeightedVector:
    """Read a two-column ``value,weight`` CSV.

    Raises:
        ParseError: On a row that is not two finite numbers.
    """
    values, weights = [], []
    with open(path, newline="", encoding="utf-8") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ParseError(PARSE_ERROR.format(line=line_no, field=len(row), reason="expected value,weight"),
                                 line=line_no, field=len(row))
            parsed = []
            for field_no, cell in enumerate(row, start=1):
                try:
                    number = float(cell)
                except ValueError:
                    number = math.nan
                if not math.isfinite(number):
                    raise ParseError(PARSE_ERROR.format(line=line_no, field=field_no, reason=f"bad number {cell!r}"),
                                     line=line_no, field=field_no)
                parsed.append(number)
            values.append(parsed[0])
            weights.append(parsed[1])
    return WeightedVector(np.array(values), np.array(weights))


def save_weighted_vector(f: WeightedVector, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        for value, weight in zip(f.values, f.weights):
            writer.writerow([repr(float(value)), repr(float(weight))])

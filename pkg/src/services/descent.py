"""Projected steepest descent with Barzilai-Borwein trial steps and Armijo backtracking.

Shared by the distance-to-coboundaries and the harmonic decomposition
minimisations. Accepted steps never increase the objective beyond round-off.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src.conf.config import settings

logger = logging.getLogger(__name__)

_MAX_BACKTRACKS = 60
_MAX_TRIAL_STEP = 1e12
_LOG_STRIDE = 500

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IterationRecord:
    step: int
    energy: float
    gradient_sup: float
    step_sup: float


@dataclass
class DescentResult:
    """Outcome of ``minimize``; ``reason`` is one of criterion, step, stalled, max_iter.

    A stalled line search is never flagged converged.
    """
    x: np.ndarray
    energy: float
    converged: bool
    reason: str
    log: list[IterationRecord] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.log) - 1


def minimize(objective: Objective, gradient: Gradient, x0, *,
             project: Callable[[np.ndarray], np.ndarray] | None = None,
             converged: Callable[[np.ndarray, np.ndarray], bool] | None = None,
             max_iter: int | None = None, armijo_slope: float | None = None,
             contraction: float | None = None, step_tol: float | None = None) -> DescentResult:
    """Minimise a smooth convex objective.

    Each iteration moves along −∇ with a Barzilai-Borwein trial length,
    optionally projected back onto the feasible set, and backtracks by
    ``contraction`` until the Armijo condition
    f(x⁺) ≤ f(x) + slope·⟨∇f(x), x⁺ − x⟩ holds.

    Args:
        objective (Objective): x ↦ f(x).
        gradient (Gradient): x ↦ ∇f(x), same shape as x.
        x0: Starting point.
        project: Projection onto the feasible set, applied after every trial step.
        converged: Stopping test on (x, ∇f(x)); when given, the result is
            flagged converged only if it passes.
        max_iter (int | None): Iteration cap, defaults to settings.
        armijo_slope (float | None): Armijo slope factor, defaults to settings.
        contraction (float | None): Backtracking factor, defaults to settings.
        step_tol (float | None): Stop once the accepted step has sup-norm below this.
            Zero disables the test.

    Returns:
        DescentResult: Last iterate, its energy and the iteration log.
    """
    max_iter = int(max_iter or settings.descent_max_iter)
    armijo_slope = settings.armijo_slope if armijo_slope is None else armijo_slope
    contraction = settings.armijo_contraction if contraction is None else contraction
    step_tol = settings.descent_step_tol if step_tol is None else step_tol

    x = np.array(x0, dtype=float)
    if project is not None:
        x = project(x)
    energy = float(objective(x))
    grad = np.asarray(gradient(x), dtype=float)
    grad_sup = float(np.max(np.abs(grad))) if grad.size else 0.0
    log = [IterationRecord(0, energy, grad_sup, 0.0)]
    trial = 1.0 / max(1.0, grad_sup)
    reason = "max_iter"

    for it in range(1, max_iter + 1):
        if converged is not None and converged(x, grad):
            reason = "criterion"
            break
        if grad_sup == 0.0:
            reason = "step"
            break
        slack = 4.0 * np.finfo(float).eps * max(1.0, abs(energy))
        t = trial
        for _ in range(_MAX_BACKTRACKS):
            candidate = x - t * grad
            if project is not None:
                candidate = project(candidate)
            step = candidate - x
            candidate_energy = float(objective(candidate))
            if candidate_energy <= energy + armijo_slope * float(np.dot(grad.ravel(), step.ravel())) + slack:
                break
            t *= contraction
        else:
            reason = "stalled"
            break

        new_grad = np.asarray(gradient(candidate), dtype=float)
        s, y = step.ravel(), (new_grad - grad).ravel()
        sy = float(np.dot(s, y))
        trial = min(float(np.dot(s, s)) / sy, _MAX_TRIAL_STEP) if sy > 0 else min(2.0 * t, _MAX_TRIAL_STEP)

        x, energy, grad = candidate, candidate_energy, new_grad
        grad_sup = float(np.max(np.abs(grad)))
        step_sup = float(np.max(np.abs(step))) if step.size else 0.0
        log.append(IterationRecord(it, energy, grad_sup, step_sup))
        if it % _LOG_STRIDE == 0:
            logger.debug("descent step %d: energy=%.6e grad=%.3e", it, energy, grad_sup)
        if step_sup < step_tol:
            reason = "step"
            break

    ok = reason == "step" if converged is None else reason != "stalled" and converged(x, grad)
    if not ok:
        logger.warning("descent stopped (%s) after %d steps, energy=%.6e", reason, len(log) - 1, energy)
    return DescentResult(x=x, energy=energy, converged=ok, reason=reason, log=log)

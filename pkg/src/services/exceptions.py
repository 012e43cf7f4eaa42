"""Exceptions raised by the numerical services."""
from typing import Any


class OrliczLabError(Exception):
    """Base class of every error the lab reports to callers."""


class NonFiniteArgument(OrliczLabError, ValueError):
    """A real argument was NaN or infinite."""


class InvalidYoungFunction(OrliczLabError, ValueError):
    """Family parameters outside the range where φ is a Young function."""


class InvalidParameter(OrliczLabError, ValueError):
    """A numeric parameter is outside its admissible range."""


class BracketOverflow(OrliczLabError):
    """The conjugate search could not bracket a maximiser."""


class NonConvergence(OrliczLabError):
    """An iterative routine hit its cap.

    Attributes:
        best: The best iterate reached, when the routine has one.
    """

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class SizeLimit(OrliczLabError):
    """A construction would exceed a configured size cap."""


class ParseError(OrliczLabError, ValueError):
    """Malformed input file.

    Attributes:
        line: 1-based line number of the offending line.
        field: 1-based field index within the line, 0 when not applicable.
    """

    def __init__(self, message: str, line: int = 0, field: int = 0):
        super().__init__(message)
        self.line = line
        self.field = field


class InvalidSpace(OrliczLabError, ValueError):
    """Weights or distances do not define a finite metric measure space."""


class EmptyBall(OrliczLabError):
    """A kernel normalisation hit a ball of zero measure."""


class InvalidKernel(OrliczLabError, ValueError):
    """A kernel is negative, not normalised or leaks past its radius."""


class InvalidQuasiIsometry(OrliczLabError, ValueError):
    """A point map breaks its declared quasi-isometry constants."""


class NotACocycle(OrliczLabError):
    """A 1-cochain fails the cocycle identity."""


class ScaleTooSmall(OrliczLabError):
    """A scale is below the threshold where norm equivalence is proved."""


class TruncationTooSmall(OrliczLabError):
    """A truncation radius cannot hold the requested construction."""


class BoundaryViolation(OrliczLabError):
    """A Dirichlet competitor is nonzero on the boundary layer."""


class DegenerateProblem(OrliczLabError):
    """A Dirichlet problem has no free vertex."""

"""Router for Young function calculus"""
from fastapi import APIRouter, Depends, Query

from src.schemas.phi import parse_phi
from src.schemas.reports import BesovResponse, DoublingResponse, ValueResponse
from src.services.young import YoungFunction, besov_summability, conjugate_eval, derivative, doubling_report, evaluate


router = APIRouter(prefix="/young", tags=["Young functions"])


def get_phi(phi: str = Query(..., examples=["power:2"])) -> YoungFunction:
    """Dependency: Young function from its text form."""
    return parse_phi(phi)


@router.get("/evaluate", response_model=ValueResponse)
def evaluate_phi(t: float, phi: YoungFunction = Depends(get_phi)):
    """## Evaluates φ(t).
    ```
    /api/young/evaluate
    ```
    ### Args:
        t (float): The argument.
        phi (str): Young function spec such as `power:2` or `expinvsq`.

    ### Returns:
        ValueResponse: The spec, the argument and φ(t).
    """
    return ValueResponse(phi=phi.spec, t=t, value=evaluate(phi, t))


@router.get("/derivative", response_model=ValueResponse)
def derivative_phi(t: float, phi: YoungFunction = Depends(get_phi)):
    """## Evaluates φ′(t).
    ```
    /api/young/derivative
    ```
    """
    return ValueResponse(phi=phi.spec, t=t, value=derivative(phi, t))


@router.get("/conjugate", response_model=ValueResponse)
def conjugate_phi(s: float, phi: YoungFunction = Depends(get_phi)):
    """## Evaluates the convex conjugate ψ(s) = sup_t (ts − φ(t)).
    ```
    /api/young/conjugate
    ```
    ### Returns:
        ValueResponse: `t` holds the argument s.
    """
    return ValueResponse(phi=phi.spec, t=s, value=conjugate_eval(phi, s))


@router.get("/doubling", response_model=DoublingResponse)
def doubling(phi: YoungFunction = Depends(get_phi)):
    """## Grid diagnostic of the doubling condition φ(2t) ≤ Dφ(t).
    ```
    /api/young/doubling
    ```
    """
    report = doubling_report(phi)
    return DoublingResponse(phi=phi.spec, max_ratio=report.max_ratio, ratio_argmax=report.ratio_argmax,
                            verdict=report.verdict.value, constant=report.constant)


@router.get("/besov", response_model=BesovResponse)
def besov(n: int = Query(3, ge=2), m_max: int = Query(1_000_000, ge=100, le=10_000_000),
          phi: YoungFunction = Depends(get_phi)):
    """## Summability heuristic for Σ φ(1/m)·m^(n−1).
    ```
    /api/young/besov
    ```
    ### Returns:
        BesovResponse: Partial sums at the checkpoints, tail ratios and the verdict.
    """
    report = besov_summability(phi, n, m_max)
    return BesovResponse(phi=phi.spec, n=n, verdict=report.verdict.value, checkpoints=list(report.checkpoints),
                         partial_sums=list(report.partial_sums), tail_ratios=list(report.tail_ratios))

"""Router for modulars and Luxemburg norms"""
from fastapi import APIRouter

from src.schemas.phi import parse_phi
from src.schemas.reports import NormRequest, NormResponse
from src.services.orlicz import WeightedVector, luxemburg_solve, modular


router = APIRouter(prefix="/orlicz", tags=["Orlicz norms"])


@router.post("/norm", response_model=NormResponse)
def norm(body: NormRequest):
    """## Computes the modular and the Luxemburg norm of a weighted vector.
    ```
    /api/orlicz/norm
    ```
    ### Args:
        body (NormRequest): The Young function spec, the values and optional weights.

    ### Returns:
        NormResponse: ρ_φ(f), ‖f‖_φ, ρ_φ(f/‖f‖_φ) and the bisection step count.
    """
    phi = parse_phi(body.phi)
    f = WeightedVector.uniform(body.values) if body.weights is None else WeightedVector(body.values, body.weights)
    solution = luxemburg_solve(phi, f)
    return NormResponse(phi=phi.spec, modular=modular(phi, f), norm=solution.norm,
                        modular_at_norm=solution.modular_at_norm, steps=solution.steps)

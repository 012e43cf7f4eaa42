"""Router for the example reproductions"""
from fastapi import APIRouter, Depends, HTTPException, Query, status
from sqlalchemy.orm import Session

from src.database.connect import get_db
from src.repository.runs import create_run
from src.schemas.reports import ReproResponse
from src.services.repro import REPRODUCTIONS, run_reproduction
from src.templates.message import UNKNOWN_REPRO


router = APIRouter(prefix="/repro", tags=["Reproductions"])


@router.get("/", response_model=list[str])
def list_reproductions():
    """## Lists the available reproductions.
    ```
    /api/repro/
    ```
    """
    return sorted(REPRODUCTIONS)


@router.post("/{name}", response_model=ReproResponse)
def reproduce(name: str, seed: int = Query(0, ge=0), db: Session = Depends(get_db)):
    """## Runs one reproduction with its default parameters and stores the report.
    ```
    /api/repro/_name_
    ```
    ### Args:
        name (str): Catalogue name, e.g. `f2`, `besov` or `z-harmonic`.
        seed (int): Seed of the random inputs.
        db (Session, optional): The database session. Defaults to Depends(get_db).

    ### Returns:
        ReproResponse: The ledger id and the report.

    ### Raises:
        HTTPException: 404 for an unknown name.
    """
    if name not in REPRODUCTIONS:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=UNKNOWN_REPRO.format(name=name))
    report = run_reproduction(name, seed=seed)
    record = create_run(db, command=f"repro {name}", report=report, config=report["config"], seed=seed)
    return ReproResponse(run_id=record.id, report=report)

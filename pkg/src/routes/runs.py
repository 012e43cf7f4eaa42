"""Router for the run ledger"""
from typing import List, Optional

from fastapi import APIRouter, Depends, Query
from sqlalchemy.orm import Session

from src.database.connect import get_db
from src.repository.runs import get_run, list_runs
from src.schemas.runs import RunResponse


router = APIRouter(prefix="/runs", tags=["Runs"])


@router.get("/", response_model=List[RunResponse])
def read_runs(command: Optional[str] = None, skip: int = Query(0, ge=0), limit: int = Query(20, ge=1, le=100),
              db: Session = Depends(get_db)):
    """## Lists stored runs, newest first.
    ```
    /api/runs/
    ```
    ### Args:
        command (str, optional): Only runs of this command, e.g. `repro f2`.
        skip (int): Offset.
        limit (int): Page size.
        db (Session, optional): The database session. Defaults to Depends(get_db).
    """
    return list_runs(db, command=command, skip=skip, limit=limit)


@router.get("/{run_id}", response_model=RunResponse)
def read_run(run_id: int, db: Session = Depends(get_db)):
    """## Gets one stored run.
    ```
    /api/runs/_run_id_
    ```
    ### Raises:
        HTTPException: 404 if the run does not exist.
    """
    return get_run(db, run_id)

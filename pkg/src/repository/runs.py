"""CRUD ops with base for run reports"""
import json

from sqlalchemy.orm import Session
from fastapi import HTTPException, status

from src.conf.config import settings
from src.database.models import RunRecord
from src.templates.message import RUN_NOT_FOUND


def create_run(db: Session, command: str, report: dict, config: dict | None = None, seed: int = 0) -> RunRecord:
    """Persist one run report.

    Args:
        db (Session): The database session.
        command (str): The command that produced the report.
        report (dict): JSON-ready report.
        config (dict | None): JSON-ready configuration echo.
        seed (int): Seed of the run.

    Returns:
        RunRecord: The stored record.
    """
    record = RunRecord(
        command=command,
        config=json.dumps(config or {}, sort_keys=True, default=float),
        report=json.dumps(report, sort_keys=True, default=float),
        seed=seed,
        artifact_version=settings.artifact_version,
    )
    db.add(record)
    db.commit()
    db.refresh(record)
    return record


def get_run(db: Session, run_id: int) -> RunRecord:
    """Fetch a run by id.

    Raises:
        HTTPException: 404 if there is no such run.
    """
    record = db.query(RunRecord).filter(RunRecord.id == run_id).first()
    if not record:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=RUN_NOT_FOUND)
    return record


def list_runs(db: Session, command: str | None = None, skip: int = 0, limit: int = 20) -> list[RunRecord]:
    """Newest runs first, optionally filtered by command."""
    query = db.query(RunRecord)
    if command:
        query = query.filter(RunRecord.command == command)
    return query.order_by(RunRecord.id.desc()).offset(skip).limit(limit).all()

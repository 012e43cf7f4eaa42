"""Schemas for run records"""
from datetime import datetime

from pydantic import BaseModel


class RunResponse(BaseModel):
    """A stored run; ``config`` and ``report`` are JSON text."""
    id: int
    command: str
    config: str
    report: str
    seed: int
    artifact_version: str
    created_at: datetime

    class Config:
        """Pydantic configuration."""
        from_attributes = True

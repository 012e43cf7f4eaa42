"""Schemas for numeric reports"""
from typing import Any, Optional

from pydantic import BaseModel, Field


class ValueResponse(BaseModel):
    """A Young-function quantity at one argument."""
    phi: str
    t: float
    value: float


class DoublingResponse(BaseModel):
    phi: str
    max_ratio: float
    ratio_argmax: float
    verdict: str
    constant: Optional[float] = None


class BesovResponse(BaseModel):
    phi: str
    n: int
    verdict: str
    checkpoints: list[int]
    partial_sums: list[float]
    tail_ratios: list[float]


class NormRequest(BaseModel):
    """A weighted vector; unit weights when ``weights`` is omitted."""
    phi: str = Field(examples=["power:2"])
    values: list[float] = Field(min_length=1)
    weights: Optional[list[float]] = None


class NormResponse(BaseModel):
    phi: str
    modular: float
    norm: float
    modular_at_norm: float
    steps: int


class ReproResponse(BaseModel):
    """A reproduction report together with its ledger id."""
    run_id: int
    report: dict[str, Any]

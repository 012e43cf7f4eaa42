"""Models"""
from sqlalchemy import Column, DateTime, Integer, String, Text, func
from sqlalchemy.ext.declarative import declarative_base


Base = declarative_base()


class RunRecord(Base):
    """A persisted report of one lab run.

    Attributes:
        id: Unique identifier of the run.
        command: The command that produced the report, e.g. ``repro f2``.
        config: JSON echo of the run configuration.
        report: JSON report.
        seed: Seed of the run's random generator.
        artifact_version: Version of the lab that produced the report.
        created_at: Timestamp of the run.
    """
    __tablename__ = 'runs'

    id = Column(Integer, primary_key=True)
    command = Column(String(100), nullable=False, index=True)
    config = Column(Text, nullable=False, default="{}")
    report = Column(Text, nullable=False)
    seed = Column(Integer, nullable=False, default=0)
    artifact_version = Column(String(20), nullable=False)
    created_at = Column(DateTime, default=func.now())

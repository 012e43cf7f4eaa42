"""Connecting to the run ledger database"""
from sqlalchemy import create_engine, make_url
from sqlalchemy.orm import sessionmaker

from src.conf.config import settings
from src.database.models import Base


connection_string = make_url(settings.database_url)
connect_args = {"check_same_thread": False} if connection_string.get_backend_name() == "sqlite" else {}
engine = create_engine(connection_string, connect_args=connect_args)

Base.metadata.create_all(engine)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def get_db():
    """Dependency"""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()

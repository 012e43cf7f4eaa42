"""Alembic environment for the run ledger.

The database URL comes from ORLICZ_DATABASE_URL through the lab settings,
not from alembic.ini. SQLite cannot alter columns in place, so every
migration runs in batch mode.
"""
from logging.config import fileConfig

from sqlalchemy import engine_from_config, pool

from alembic import context
from src.database.connect import connection_string
from src.database.models import Base

alembic_config = context.config
alembic_config.set_main_option("sqlalchemy.url", connection_string.render_as_string(hide_password=False))

if alembic_config.config_file_name is not None:
    fileConfig(alembic_config.config_file_name)


def _migrate(**options) -> None:
    context.configure(target_metadata=Base.metadata, render_as_batch=True, **options)
    with context.begin_transaction():
        context.run_migrations()


def migrate_offline() -> None:
    """Emit the migrations as SQL without a database connection."""
    _migrate(url=alembic_config.get_main_option("sqlalchemy.url"), literal_binds=True,
             dialect_opts={"paramstyle": "named"})


def migrate_online() -> None:
    """Apply the migrations to the configured database."""
    engine = engine_from_config(alembic_config.get_section(alembic_config.config_ini_section, {}),
                                prefix="sqlalchemy.", poolclass=pool.NullPool)
    with engine.connect() as connection:
        _migrate(connection=connection)


if context.is_offline_mode():
    migrate_offline()
else:
    migrate_online()

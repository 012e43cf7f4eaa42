"""Root logger setup shared by the CLI and the API."""
import logging

from src.conf.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str | None = None) -> None:
    """Configure the root logger once.

    Args:
        level (str | None): Log level name, defaults to ``settings.log_level``.
    """
    logging.basicConfig(level=(level or settings.log_level).upper(), format=LOG_FORMAT)

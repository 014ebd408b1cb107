"""Helper module for logging operations.

Constants
---------
LOG_HANDLER: logging.StreamHandler
    Handler used for logging.
LOGGER: logging.Logger
    Multiprocessing-safe logger shared by every stage.

Functions
---------
configure_logging
    Sets the verbosity of LOGGER.
"""

from logging import (
    Formatter,
    StreamHandler,
    getLevelName,
)
from multiprocessing import get_logger

from liqarch.exceptions import ConfigError

DATE_FORMAT = "%Y-%m-%dT%H:%M:%S%z"
LOGGING_FORMAT = (
    "%(asctime)s\t(%(processName)s, %(threadName)s)\t%(levelname)s\t%(message)s"
)
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

LOGGER = get_logger()
formatter = Formatter(fmt=LOGGING_FORMAT, datefmt=DATE_FORMAT)
LOG_HANDLER = StreamHandler()
LOG_HANDLER.setFormatter(formatter)
if LOG_HANDLER not in LOGGER.handlers:
    LOGGER.addHandler(LOG_HANDLER)


def configure_logging(level: str) -> None:
    """Sets LOGGER verbosity.

    Parameters
    ----------
    level:
        One of DEBUG, INFO, WARNING, ERROR, CRITICAL (case-insensitive).
    """
    name = str(level).upper()
    if name not in LOG_LEVELS:
        raise ConfigError(
            f"Invalid log level '{level}'. Must be one of: {', '.join(LOG_LEVELS)}"
        )
    LOGGER.setLevel(getLevelName(name))

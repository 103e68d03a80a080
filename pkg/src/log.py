"""
Named loggers with the toolkit's `[name] message` console format.
"""

import logging
from typing import Set

from src.settings import LOG_DATE_FORMAT, LOG_FORMAT, LOG_LEVEL

_configured: Set[str] = set()
_level = LOG_LEVEL


def get_logger(name: str) -> logging.Logger:
    """
    Return a logger that prints `[name] message` to stderr.

    The handler is installed once per name, so repeated calls are cheap.

    Args:
        name: Logger name, usually the component (e.g. "optimizer")

    Returns:
        Configured logging.Logger
    """
    logger = logging.getLogger(name)

    if name not in _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
        logger.addHandler(handler)
        logger.setLevel(getattr(logging, _level.upper(), logging.INFO))
        logger.propagate = False
        _configured.add(name)

    return logger


def set_level(level: str) -> None:
    """
    Change the level of every toolkit logger, including ones created later.

    Args:
        level: Level name ("DEBUG", "INFO", "WARNING", "ERROR")
    """
    global _level
    _level = level
    numeric = getattr(logging, level.upper(), logging.INFO)
    for name in _configured:
        logging.getLogger(name).setLevel(numeric)

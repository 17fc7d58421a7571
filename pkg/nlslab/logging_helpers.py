"""Logging for the NLSLAB package: colored console output plus an optional plain log file."""
import logging
from typing import Optional

import coloredlogs

from nlslab.config import LOG_CONFIG

ROOT_NAME = "NLSLAB"

# Library use without configure_root_logger stays silent
logging.getLogger(ROOT_NAME).addHandler(logging.NullHandler())


def get_logger(name: str) -> logging.Logger:
    """Logger for one nlslab module, e.g. NLSLAB.modulation."""
    return logging.getLogger(f"{ROOT_NAME}.{name}")


def configure_root_logger(logfile: Optional[str] = None, loglevel: str = "INFO") -> logging.Logger:
    """
    Configure the NLSLAB logger. Calling it again replaces the previous handlers.

    Args:
        logfile: Path of a plain-text log file, or None for console only
        loglevel: Level name such as INFO or WARNING

    Returns:
        The configured NLSLAB logger
    """
    logger = logging.getLogger(ROOT_NAME)
    for handler in list(logger.handlers):
        if not isinstance(handler, logging.NullHandler):
            logger.removeHandler(handler)
            handler.close()

    coloredlogs.install(fmt=LOG_CONFIG["log_format"], datefmt=LOG_CONFIG["date_format"],
                        level=loglevel.upper(), logger=logger)
    logger.setLevel(loglevel.upper())
    logger.propagate = False

    if logfile:
        file_handler = logging.FileHandler(logfile)
        file_handler.setFormatter(logging.Formatter(LOG_CONFIG["log_format"], LOG_CONFIG["date_format"]))
        file_handler.setLevel(loglevel.upper())
        logger.addHandler(file_handler)
    return logger

"""Logging configuration for kpeval.

Human-readable console output plus an optional JSON-lines log file, one
object per event, so warning counts can be checked after a run.
"""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from pathlib import Path

# Package logger name
LOGGER_NAME = "kpeval"

# Environment variable holding the default verbosity
LOG_ENV_VAR = "KPEVAL_LOG"

# Console format
LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%dT%H:%M:%S%z"

# Attributes every LogRecord has; anything else came in through extra=
_RECORD_ATTRS = frozenset(
    logging.LogRecord("", 0, "", 0, "", (), None).__dict__.keys() | {"message", "asctime"}
)

# Track if logging has been set up to prevent duplicate handlers
_logging_configured = False


class JsonLogFormatter(logging.Formatter):
    """Render a record as a single JSON object."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "ts": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(record.created)),
            "level": record.levelname,
            "logger": record.name,
            "event": record.getMessage(),
        }
        for key, value in record.__dict__.items():
            if key not in _RECORD_ATTRS and not key.startswith("_"):
                payload[key] = value
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False, default=str)


def resolve_level(level: str | None = None) -> int:
    """Resolve a level name, falling back to KPEVAL_LOG and then INFO."""
    name = (level or os.environ.get(LOG_ENV_VAR) or "INFO").upper()
    resolved = logging.getLevelName(name)
    if not isinstance(resolved, int):
        return logging.INFO
    return resolved


def setup_logging(level: str | None = None, log_file: Path | None = None) -> None:
    """Configure the package logger.

    Idempotent: later calls update the level and may add the file handler,
    but never duplicate the console handler.

    Args:
        level: Log level name; defaults to $KPEVAL_LOG, then INFO
        log_file: Optional path of a JSON-lines log file
    """
    global _logging_configured

    log_level = resolve_level(level)
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(log_level)

    if not _logging_configured:
        logger.handlers.clear()

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(handler)

        logger.propagate = False
        _logging_configured = True

    for existing in logger.handlers:
        existing.setLevel(log_level)

    if log_file is not None:
        target = str(log_file.resolve())
        already = any(
            isinstance(h, logging.FileHandler) and h.baseFilename == target
            for h in logger.handlers
        )
        if not already:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
            file_handler.setFormatter(JsonLogFormatter())
            file_handler.setLevel(log_level)
            logger.addHandler(file_handler)

    logger.debug("Logging configured with level %s", logging.getLevelName(log_level))


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for a module.

    Args:
        name: Logger name, typically __name__ of the calling module

    Returns:
        Child logger of the package logger
    """
    if name.startswith(LOGGER_NAME):
        return logging.getLogger(name)
    return logging.getLogger(f"{LOGGER_NAME}.{name}")


def reset_logging() -> None:
    """Reset logging configuration.

    Used primarily for testing to allow re-initialization
    of the logging setup.
    """
    global _logging_configured
    logger = logging.getLogger(LOGGER_NAME)
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)
    _logging_configured = False

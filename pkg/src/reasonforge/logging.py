"""
Logging setup for reasonforge.

One named logger tree ("reasonforge", "reasonforge.scene", ...) with a
rotating file handler for the full record and a stderr handler that only
surfaces warnings unless the CLI asks for verbose output.

Level resolution: explicit argument, then LOG_LEVEL, then
config["logging"]["level"], then INFO.
"""

import logging
import os
import time
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

ROOT_LOGGER = "reasonforge"

DEFAULT_LOG_FILE = "data/reasonforge.log"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_MAX_BYTES = 5 * 1024 * 1024  # 5MB
DEFAULT_BACKUP_COUNT = 3
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%dT%H:%M:%S%z"

_configured = False


def _resolve_level(explicit: Optional[str], logging_config: Dict[str, Any]) -> int:
    name = (
        explicit
        or os.environ.get("LOG_LEVEL")
        or logging_config.get("level")
        or DEFAULT_LOG_LEVEL
    ).upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def setup_logging(
    config: Optional[Dict[str, Any]] = None,
    log_file: Optional[str] = None,
    log_level: Optional[str] = None,
    verbose: bool = False,
) -> logging.Logger:
    """
    Configure the reasonforge logger tree.

    Args:
        config: Loaded configuration (reads the optional "logging" section:
            level, file, max_bytes, backup_count)
        log_file: Override log file path; "" disables file logging
        log_level: Override log level name
        verbose: Echo INFO records to stderr as well as warnings

    Returns:
        The root reasonforge logger
    """
    global _configured

    logging_config = (config or {}).get("logging", {}) or {}
    level = _resolve_level(log_level, logging_config)

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level)
    logger.handlers.clear()
    logger.propagate = False

    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)

    target = log_file if log_file is not None else logging_config.get("file", DEFAULT_LOG_FILE)
    if target:
        try:
            path = Path(target)
            path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(
                str(path),
                maxBytes=logging_config.get("max_bytes", DEFAULT_MAX_BYTES),
                backupCount=logging_config.get("backup_count", DEFAULT_BACKUP_COUNT),
                encoding="utf-8",
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError:
            # Read-only working directory: keep going with stderr only
            pass

    console = logging.StreamHandler()
    console.setLevel(logging.INFO if verbose else logging.WARNING)
    console.setFormatter(formatter)
    logger.addHandler(console)

    _configured = True
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Return the reasonforge logger or one of its children.

    Before setup_logging() runs, records go to stderr at WARNING so library
    use without the CLI stays quiet.
    """
    global _configured

    logger = logging.getLogger(ROOT_LOGGER)
    if not _configured and not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
        handler.setLevel(logging.WARNING)
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
        _configured = True

    return logger.getChild(name) if name else logger


@contextmanager
def log_duration(logger: logging.Logger, what: str) -> Iterator[None]:
    """Log how long the wrapped block took, in milliseconds."""
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed_ms = int((time.perf_counter() - start) * 1000)
        logger.info("%s took %dms", what, elapsed_ms)

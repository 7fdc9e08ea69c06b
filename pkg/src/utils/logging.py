"""
Logging utilities for the spaced-module analysis pipeline.

``get_logger`` attaches a per-run file handler and a stderr handler to the
run logger and to the ``src`` package logger, so the DEBUG lines of the
algebra and pipeline modules land in the same ``<run_id>.log`` as the CLI's
own messages. stdout stays free for the JSON result.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import List

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
PACKAGE_LOGGER = "src"


def _level(log_level: str | int) -> int:
    if isinstance(log_level, int):
        return log_level
    return getattr(logging, log_level.upper(), logging.INFO)


def _reset(logger: logging.Logger, level: int, handlers: List[logging.Handler]) -> None:
    logger.setLevel(level)
    logger.propagate = False
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    for handler in handlers:
        logger.addHandler(handler)


def get_logger(run_id: str, run_dir: Path, log_level: str | int = "INFO") -> logging.Logger:
    """
    Create or retrieve a logger configured for a specific run.

    Parameters
    ----------
    run_id : str
        Unique identifier for the current run; also the logger name.
    run_dir : Path
        Directory of the run; created when missing.
    log_level : str or int, optional
        Logging level (e.g. "INFO", "DEBUG"). Defaults to ``"INFO"``.

    Returns
    -------
    logging.Logger
        The run logger. Earlier handlers of both loggers are closed first, so
        repeated runs in one process never duplicate lines.
    """
    level = _level(log_level)
    run_dir.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT)
    file_handler = logging.FileHandler(run_dir / f"{run_id}.log", encoding="utf-8")
    console_handler = logging.StreamHandler(sys.stderr)
    for handler in (file_handler, console_handler):
        handler.setFormatter(formatter)
    handlers: List[logging.Handler] = [file_handler, console_handler]
    _reset(logging.getLogger(PACKAGE_LOGGER), level, handlers)
    logger = logging.getLogger(run_id)
    _reset(logger, level, handlers)
    return logger

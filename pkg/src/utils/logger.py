"""Logging for coarse-bezout.

Console lines go to stderr so reports on stdout stay clean. Context is passed
as keyword arguments and rendered as `key=value` pairs.
"""

import logging
import math
import sys
import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Iterator, Optional

from config.settings import get_setting

CONSOLE_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"
FILE_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(funcName)s:%(lineno)d | %(message)s"


def _render(value: Any) -> str:
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        try:
            value = value.item()
        except (TypeError, ValueError):
            pass
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.6g}"
    return str(value)


def _console_handler(level: int) -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt="%H:%M:%S"))
    return handler


def _file_handler() -> logging.Handler:
    """Daily file under log_dir, everything down to DEBUG."""
    folder = Path(get_setting("log_dir", "logs"))
    folder.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(folder / f"coarse_bezout_{datetime.now():%Y%m%d}.log")
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(FILE_FORMAT))
    return handler


class CoarseBezoutLogger:
    """Logger whose keyword context is appended as `key=value` pairs."""

    def __init__(self, name: str = "coarse_bezout"):
        self.logger = logging.getLogger(name)
        if not self.logger.handlers:
            self._setup_logger()

    def _setup_logger(self):
        level = getattr(logging, str(get_setting("log_level", "INFO")).upper(), logging.INFO)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        self.logger.addHandler(_console_handler(level))
        try:
            self.logger.addHandler(_file_handler())
        except OSError as e:
            self.logger.warning(self._format_message("File logging disabled", error=e))

    def info(self, message: str, **kwargs):
        self.logger.info(self._format_message(message, **kwargs))

    def warning(self, message: str, **kwargs):
        self.logger.warning(self._format_message(message, **kwargs))

    def debug(self, message: str, **kwargs):
        self.logger.debug(self._format_message(message, **kwargs))

    def error(self, message: str, error: Optional[Exception] = None, **kwargs):
        """Log an error; domain errors add their category, others their type."""
        if error is not None:
            category = getattr(error, "category", None)
            kwargs["category"] = category.value if category is not None else type(error).__name__
            kwargs["error"] = error
        self.logger.error(self._format_message(message, **kwargs))

    @contextmanager
    def timed(self, stage: str, **kwargs) -> Iterator[None]:
        """Log the wall time of a stage at DEBUG, whether or not it raises."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.debug(f"Finished {stage}", seconds=time.perf_counter() - start, **kwargs)

    def _format_message(self, message: str, **kwargs) -> str:
        if not kwargs:
            return message
        return " | ".join([message] + [f"{key}={_render(value)}" for key, value in kwargs.items()])


_logger = None


def get_logger() -> CoarseBezoutLogger:
    """The process-wide logger."""
    global _logger
    if _logger is None:
        _logger = CoarseBezoutLogger()
    return _logger

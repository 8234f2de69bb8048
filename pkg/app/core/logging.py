"""Structured logging: one JSON object per line on stderr, tagged with the current run."""

import logging
import sys
import uuid
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np
from pythonjsonlogger.json import JsonFormatter

LOG_FORMAT = '%(timestamp)s %(level)s %(name)s %(message)s'
PLAIN_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'


def _json_default(obj: Any) -> Any:
    """numpy scalars and arrays show up in log fields (clamp counts, measured values)."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


class CustomJsonFormatter(JsonFormatter):
    """Adds timestamp, level and source location to every record."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault("json_default", _json_default)
        super().__init__(*args, **kwargs)

    def add_fields(self, log_record: Dict[str, Any], record: logging.LogRecord,
                   message_dict: Dict[str, Any]) -> None:
        super().add_fields(log_record, record, message_dict)
        log_record['timestamp'] = datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z')
        log_record['level'] = record.levelname
        log_record['source'] = {'file': record.pathname, 'line': record.lineno, 'function': record.funcName}


class StructuredLogger:
    """
    Thin wrapper over a stdlib logger.

    Keyword arguments become JSON fields. Fields set with ``set_context`` are
    merged into every record until cleared. stdout is left to command output.
    """

    def __init__(self, name: str, level: str = "INFO", structured: bool = True):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper()))
        self.logger.handlers.clear()
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(CustomJsonFormatter(LOG_FORMAT) if structured else logging.Formatter(PLAIN_FORMAT))
        self.logger.addHandler(handler)
        self.logger.propagate = False
        self._context: Dict[str, Any] = {}

    def set_context(self, **fields: Any) -> None:
        self._context.update(fields)

    def clear_context(self) -> None:
        self._context.clear()

    def _emit(self, level: int, message: str, exc_info: Optional[BaseException] = None, **fields: Any) -> None:
        if exc_info is not None:
            fields['error_type'] = type(exc_info).__name__
            fields['error_message'] = str(exc_info)
        self.logger.log(level, message, exc_info=exc_info, extra={**self._context, **fields})

    def debug(self, message: str, **fields: Any) -> None:
        self._emit(logging.DEBUG, message, **fields)

    def info(self, message: str, **fields: Any) -> None:
        self._emit(logging.INFO, message, **fields)

    def warning(self, message: str, **fields: Any) -> None:
        self._emit(logging.WARNING, message, **fields)

    def error(self, message: str, exc_info: Optional[BaseException] = None, **fields: Any) -> None:
        self._emit(logging.ERROR, message, exc_info=exc_info, **fields)

    def critical(self, message: str, exc_info: Optional[BaseException] = None, **fields: Any) -> None:
        self._emit(logging.CRITICAL, message, exc_info=exc_info, **fields)

    def log_run(self, run_id: str, command: str, duration: Optional[float] = None, **fields: Any) -> None:
        """One record per finished command: run id, command, wall time and any counters."""
        if duration is not None:
            fields['duration'] = duration
        self.info('Run finished', run_id=run_id, command=command, **fields)


def generate_run_id(command: str, seed: Optional[int] = None) -> str:
    """``<command>-s<seed>-<8 hex>``; the suffix keeps repeated runs with one seed apart."""
    seed_part = f"-s{seed}" if seed is not None else ""
    return f"{command}{seed_part}-{uuid.uuid4().hex[:8]}"


def setup_logging(level: str = "INFO", structured: bool = True) -> StructuredLogger:
    return StructuredLogger("exitsbm", level=level, structured=structured)

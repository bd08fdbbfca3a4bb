"""
Logging module for confidencemeasure library.

Module Overview:

This module defines the library logger, `Logger`, a singleton extension of
`logging.Logger`. It writes human-readable messages to standard error and,
once a log directory is set, to a rotating log file. The same directory
receives a CSV trace with one row per simulated Monte Carlo block.

Key Classes:

- `LogLevel`: Enum class that defines the log levels supported by the `Logger` class.
- `TraceWriter`: Buffered CSV writer behind `Logger.trace`.
- `Logger`: Library logger with an optional rotating log file and CSV trace.
- `LOGGER`: Global instance of the `Logger` class that is used throughout the library.

Usage Guide:

1. Import `LOGGER` and log as with any `logging.Logger`; messages are tagged `"[tag] message"`.
2. Call `set_log_path(directory)` to enable `<name>.log` and `<name>.csv`.
3. Rows passed to `trace` are buffered; call `close` (or use the logger as a context manager) to write the rest.

"""

import csv
import logging
import os
from collections.abc import Mapping
from datetime import datetime
from enum import Enum
from logging.handlers import RotatingFileHandler
from typing import Any, Optional, TextIO

LOGGER_NAME: str = "confidencemeasure"
DEFAULT_FORMAT: str = "[%(asctime)s] %(levelname)s: %(message)s"


class LogLevel(int, Enum):
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL


class TraceWriter:
    """
    Buffers rows and appends them to a CSV file once `capacity` rows are
    pending. The header is taken from the keys of the first row written;
    extra keys in later rows are ignored.
    """

    def __init__(self, capacity: int = 1000) -> None:
        self.capacity = capacity
        self.path: Optional[str] = None
        self._rows: list[dict[str, Any]] = []
        self._handle: Optional[TextIO] = None
        self._writer: Optional["csv.DictWriter[str]"] = None

    def __repr__(self) -> str:
        return f"TraceWriter(path={self.path}, pending={self.pending})"

    @property
    def pending(self) -> int:
        return len(self._rows)

    @property
    def is_open(self) -> bool:
        return self._handle is not None

    def attach(self, path: str) -> None:
        self.close()
        self.path = path

    def detach(self) -> None:
        self._rows.clear()
        self.close()
        self.path = None

    def append(self, row: Mapping[str, Any]) -> None:
        if self.path is None:
            return
        self._rows.append(dict(row))
        if len(self._rows) >= self.capacity:
            self.flush()

    def flush(self) -> None:
        if not self._rows or self.path is None:
            return
        handle, writer = self._handle, self._writer
        if handle is None or writer is None:
            handle = open(self.path, mode="w", newline="")  # noqa: SIM115
            writer = csv.DictWriter(handle, fieldnames=list(self._rows[0]), extrasaction="ignore")
            writer.writeheader()
            self._handle, self._writer = handle, writer
        writer.writerows(self._rows)
        self._rows.clear()
        handle.flush()

    def close(self) -> None:
        self.flush()
        if self._handle is not None:
            self._handle.close()
        self._handle = None
        self._writer = None


class Logger(logging.Logger):
    """
    Process-wide logger. Constructing it again returns the same instance
    with its configuration untouched; use the setters to change it.

    Args:
        stream_level (LogLevel): Level of messages written to standard error. Defaults to WARNING.
        file_level (LogLevel): Level of messages written to the log file. Defaults to DEBUG.
        log_format (str): Format shared by both handlers.
        file_max_bytes (int): Rotation size of the log file, 0 disables rotation. Defaults to 0.
        file_backup_count (int): Rotated files kept. Defaults to 5.
        buffer_size (int): Trace rows buffered before a write. Defaults to 1000.
    """

    _instance: Optional["Logger"] = None

    def __new__(cls, *args: Any, **kwargs: Any) -> "Logger":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(
        self,
        stream_level: LogLevel = LogLevel.WARNING,
        file_level: LogLevel = LogLevel.DEBUG,
        log_format: str = DEFAULT_FORMAT,
        file_max_bytes: int = 0,
        file_backup_count: int = 5,
        buffer_size: int = 1000,
    ) -> None:
        if getattr(self, "_ready", False):
            return
        super().__init__(LOGGER_NAME)
        self._stream_level = stream_level
        self._file_level = file_level
        self._formatter = logging.Formatter(log_format)
        self._file_max_bytes = file_max_bytes
        self._file_backup_count = file_backup_count
        self._file_name: Optional[str] = None
        self._log_path: Optional[str] = None
        self._file_path: Optional[str] = None
        self._file_handler: Optional[RotatingFileHandler] = None
        self._traces = TraceWriter(buffer_size)

        self._stream_handler = logging.StreamHandler()
        self._install(self._stream_handler, stream_level)
        self._sync_level()
        self._ready = True

    def __repr__(self) -> str:
        return f"Logger(file_path={self._file_path})"

    def __enter__(self) -> "Logger":
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        self.close()

    def _install(self, handler: logging.Handler, level: LogLevel) -> None:
        handler.setLevel(level)
        handler.setFormatter(self._formatter)
        self.addHandler(handler)

    def _sync_level(self) -> None:
        floor = self._stream_level
        if self._file_handler is not None:
            floor = min(floor, self._file_level)
        self.setLevel(floor)

    def _drop_file_handler(self) -> None:
        if self._file_handler is None:
            return
        self.removeHandler(self._file_handler)
        self._file_handler.close()
        self._file_handler = None
        self._sync_level()

    def set_log_path(self, log_path: str) -> None:
        """
        Enables the log file and the CSV trace under `log_path`, creating
        the directory if needed. Files are named after `set_file_name`, or
        after the current time when no name was given.
        """
        self._traces.close()
        self._drop_file_handler()
        os.makedirs(log_path, exist_ok=True)
        stem = self._file_name or f"{LOGGER_NAME}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        base = os.path.join(log_path, stem)

        self._log_path = log_path
        self._file_path = f"{base}.log"
        self._traces.attach(f"{base}.csv")
        self._file_handler = RotatingFileHandler(
            self._file_path, mode="w", maxBytes=self._file_max_bytes, backupCount=self._file_backup_count
        )
        self._install(self._file_handler, self._file_level)
        self._sync_level()

    def set_file_name(self, file_name: Optional[str]) -> None:
        self._file_name = file_name
        if self._log_path is not None:
            self.set_log_path(self._log_path)

    def set_stream_level(self, level: LogLevel) -> None:
        self._stream_level = level
        self._stream_handler.setLevel(level)
        self._sync_level()

    def set_file_level(self, level: LogLevel) -> None:
        self._file_level = level
        if self._file_handler is not None:
            self._file_handler.setLevel(level)
        self._sync_level()

    def set_format(self, log_format: str) -> None:
        self._formatter = logging.Formatter(log_format)
        for handler in self.handlers:
            handler.setFormatter(self._formatter)

    def set_buffer_size(self, buffer_size: int) -> None:
        self._traces.capacity = buffer_size
        if self._traces.pending >= buffer_size:
            self._traces.flush()

    def trace(self, row: Mapping[str, Any]) -> None:
        """
        Buffers one row of the CSV trace. Rows are dropped while no log path is set.
        """
        self._traces.append(row)

    def reset(self) -> None:
        """
        Closes the trace, drops the file handler and returns to stream-only logging.
        """
        self._traces.detach()
        self._drop_file_handler()
        self._log_path = None
        self._file_path = None

    def close(self) -> None:
        self._traces.close()
        if self._file_handler is not None:
            self._file_handler.flush()

    @property
    def log_path(self) -> Optional[str]:
        return self._log_path

    @property
    def file_path(self) -> Optional[str]:
        return self._file_path

    @property
    def csv_path(self) -> Optional[str]:
        return self._traces.path

    @property
    def traces(self) -> TraceWriter:
        return self._traces

    @property
    def stream_level(self) -> LogLevel:
        return self._stream_level

    @property
    def file_level(self) -> LogLevel:
        return self._file_level

    @property
    def buffer_size(self) -> int:
        return self._traces.capacity

    @property
    def file_max_bytes(self) -> int:
        return self._file_max_bytes

    @property
    def file_backup_count(self) -> int:
        return self._file_backup_count

    @property
    def is_tracing(self) -> bool:
        return self._traces.path is not None


LOGGER = Logger()

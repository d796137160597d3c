"""Structured logging bootstrap.

Configures Python's built-in ``logging`` on **stderr** so that stdout stays
free for nothing but the CLI's own output.  Records are JSON lines when
stderr is not a TTY and coloured text otherwise.

Usage (called once at process start, before any other module logs):

    from infrastructure.logging.setup import configure_logging
    configure_logging(level="INFO", json_output=None)
"""

from __future__ import annotations

import contextvars
import json
import logging
import os
import sys
import time
import uuid
from typing import Any

# ── Run ID context ───────────────────────────────────────────────────────────
# Set once per job by the CLI.  Pool worker threads do not see it.

_run_id_var: contextvars.ContextVar[str] = contextvars.ContextVar("run_id", default="")


def set_run_id(run_id: str | None = None) -> str:
    """Set the run ID for the current context; a fresh UUID4 hex if None."""
    rid = run_id or uuid.uuid4().hex
    _run_id_var.set(rid)
    return rid


def get_run_id() -> str:
    return _run_id_var.get()


class _JsonFormatter(logging.Formatter):
    """Emit each log record as a single JSON line.

    Fields always present: ts, level, logger, msg, thread.  ``run_id``,
    ``exc_info`` and caller-supplied ``extra`` fields are added when set.
    """

    _STDLIB_ATTRS = frozenset(
        logging.LogRecord("", 0, "", 0, "", (), None).__dict__.keys()
    ) | {"message", "asctime", "taskName"}

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "ts": self.formatTime(record, "%Y-%m-%dT%H:%M:%S") + f".{int(record.msecs):03d}Z",
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
            "thread": f"{record.threadName}/{record.thread}",
        }
        rid = _run_id_var.get()
        if rid:
            payload["run_id"] = rid

        for key, val in record.__dict__.items():
            if key not in self._STDLIB_ATTRS and not key.startswith("_"):
                payload[key] = val

        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        if record.stack_info:
            payload["stack_info"] = self.formatStack(record.stack_info)

        return json.dumps(payload, default=str)

    def formatTime(self, record: logging.LogRecord, datefmt: str | None = None) -> str:
        return time.strftime(datefmt or "%Y-%m-%dT%H:%M:%S", time.gmtime(record.created))


class _HumanFormatter(logging.Formatter):
    """Coloured, human-readable output for interactive TTY sessions."""

    _LEVEL_COLOURS = {
        "DEBUG":    "\033[36m",   # cyan
        "INFO":     "\033[32m",   # green
        "WARNING":  "\033[33m",   # yellow
        "ERROR":    "\033[31m",   # red
        "CRITICAL": "\033[35m",   # magenta
    }
    _RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        colour = self._LEVEL_COLOURS.get(record.levelname, "")
        ts = time.strftime("%H:%M:%S", time.localtime(record.created))
        prefix = f"{ts} {colour}{record.levelname:<8}{self._RESET} [{record.name}]"
        line = f"{prefix} {record.getMessage()}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


def configure_logging(
    level: str = "INFO",
    json_output: bool | None = None,
    log_file: str | os.PathLike[str] | None = None,
) -> None:
    """Configure the root logger.

    Args:
        level:       Logging level name (DEBUG/INFO/WARNING/ERROR).
        json_output: Force the JSON formatter.  If None, JSON is used when
                     stderr is not a TTY.
        log_file:    Optional path to a rotating log file (always JSON).
    """
    level_int = getattr(logging, level.upper(), logging.INFO)
    use_json = json_output if json_output is not None else not sys.stderr.isatty()

    handlers: list[logging.Handler] = []

    stderr_handler = logging.StreamHandler(sys.stderr)
    stderr_handler.setFormatter(_JsonFormatter() if use_json else _HumanFormatter())
    handlers.append(stderr_handler)

    if log_file:
        from logging.handlers import RotatingFileHandler

        os.makedirs(os.path.dirname(os.fspath(log_file)) or ".", exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=50 * 1024 * 1024,  # 50 MB
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setFormatter(_JsonFormatter())
        handlers.append(file_handler)

    logging.basicConfig(level=level_int, handlers=handlers, force=True)

    logging.getLogger(__name__).debug(
        "Logging configured: level=%s json=%s", level, use_json
    )

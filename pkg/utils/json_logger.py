"""
isogap - Run journal
Appends one JSON object per job event (JSON Lines) so that batches of runs
can be audited with grep or loaded into a dataframe.

Usage:
    with RunJournal("logs/events.jsonl", run_id="3f2a…") as journal:
        journal.log("job.start", command="profile", seed=0)

Output size is capped at MAX_FILE_BYTES; events past the cap are dropped
with a single warning.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from datetime import UTC, datetime
from types import TracebackType
from typing import IO, Any

logger = logging.getLogger(__name__)

MAX_FILE_BYTES = 100 * 1024 * 1024  # 100 MB default cap
_FLUSH_INTERVAL = 1.0  # seconds between periodic flushes


def _finite(value: Any) -> Any:
    """Replace non-finite floats so every line is strict JSON."""
    if isinstance(value, float) and value != value:
        return "nan"
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_finite(v) for v in value]
    return value


class RunJournal:
    """Thread-safe JSON Lines writer for job events."""

    def __init__(
        self,
        output_path: str | os.PathLike[str] = "logs/events.jsonl",
        *,
        run_id: str = "",
        max_bytes: int = MAX_FILE_BYTES,
    ) -> None:
        self._path = os.fspath(output_path)
        self._run_id = run_id
        self._max_bytes = max_bytes
        self._lock = threading.Lock()
        self._file: IO[str] | None = None
        self._bytes_written = 0
        self._cap_warned = False
        self._last_flush = 0.0
        self._open()

    def __enter__(self) -> RunJournal:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> bool:
        self.close()
        return False

    @property
    def path(self) -> str:
        return self._path

    @property
    def is_open(self) -> bool:
        return self._file is not None

    def _open(self) -> None:
        try:
            os.makedirs(os.path.dirname(os.path.abspath(self._path)), exist_ok=True)
            self._file = open(self._path, "a", encoding="utf-8")  # noqa: SIM115  held until close()
            try:
                self._bytes_written = os.path.getsize(self._path)
            except OSError:
                self._bytes_written = 0
            logger.debug("run journal opened: %s", self._path)
        except OSError as e:
            logger.error("Failed to open run journal: %s", e)
            self._file = None

    def log(self, event_type: str, **kwargs: Any) -> None:
        """Append one event; a no-op once closed or past the size cap."""
        if self._file is None:
            return

        event: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "event": event_type,
        }
        if self._run_id:
            event["run_id"] = self._run_id
        event.update(_finite(kwargs))

        try:
            line = json.dumps(event, default=str, ensure_ascii=False, allow_nan=False) + "\n"
        except (TypeError, ValueError) as e:
            logger.debug("journal serialization error: %s", e)
            return

        line_bytes = len(line.encode("utf-8"))

        with self._lock:
            if self._file is None:
                return
            if self._bytes_written + line_bytes > self._max_bytes:
                if not self._cap_warned:
                    logger.warning(
                        "run journal size cap (%d bytes) reached; further events dropped.",
                        self._max_bytes,
                    )
                    self._cap_warned = True
                return
            try:
                self._file.write(line)
                self._bytes_written += line_bytes
                now = time.monotonic()
                if now - self._last_flush >= _FLUSH_INTERVAL:
                    self._file.flush()
                    self._last_flush = now
            except OSError as e:
                logger.error("run journal write error: %s", e)

    def flush(self) -> None:
        """Flush buffered data to disk without closing the journal."""
        with self._lock:
            if self._file:
                try:
                    self._file.flush()
                    self._last_flush = time.monotonic()
                except OSError as e:
                    logger.error("run journal flush error: %s", e)

    def close(self) -> None:
        """Flush and close the journal file."""
        with self._lock:
            if self._file:
                try:
                    self._file.flush()
                    self._file.close()
                except OSError:
                    pass
                self._file = None
                logger.debug("run journal closed.")

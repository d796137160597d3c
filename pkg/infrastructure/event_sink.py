"""IEventSink adapters.

``JsonlEventSink`` writes job events to the JSONL run journal; the journal
file is opened on the first ``emit()`` so that building the container has no
side effects.  ``NullEventSink`` drops everything and is used when the
journal is disabled.
"""

from __future__ import annotations

import logging
import os
from typing import Any

from utils.json_logger import RunJournal

logger = logging.getLogger(__name__)

JOURNAL_NAME = "events.jsonl"


class JsonlEventSink:
    """Append structured job events to ``<log_dir>/events.jsonl``."""

    def __init__(self, log_dir: str | os.PathLike[str] = "logs", *, run_id: str = "") -> None:
        self._log_dir = os.fspath(log_dir)
        self._run_id = run_id
        self._journal: RunJournal | None = None

    @property
    def path(self) -> str:
        return os.path.join(self._log_dir, JOURNAL_NAME)

    def _ensure_open(self) -> RunJournal:
        if self._journal is None:
            self._journal = RunJournal(self.path, run_id=self._run_id)
            logger.debug("JsonlEventSink writing to %s", self.path)
        return self._journal

    def emit(self, event_type: str, **kwargs: Any) -> None:
        self._ensure_open().log(event_type, **kwargs)

    def flush(self) -> None:
        if self._journal is not None:
            self._journal.flush()

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()
            self._journal = None


class NullEventSink:
    def emit(self, event_type: str, **kwargs: Any) -> None:
        return None

    def flush(self) -> None:
        return None

    def close(self) -> None:
        return None

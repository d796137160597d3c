"""StagedArtifactStore: IArtifactStore adapter over a local output directory.

Artifacts are written into a hidden staging directory inside the output
directory and moved into place with ``os.replace`` on ``commit()``.  A job
that fails calls ``abort()`` and leaves only ``error.json`` behind.

Byte-level formats are fixed so that repeated runs compare equal:

* CSV: ``\\n`` line endings, floats as ``%.16e`` (17 significant digits).
* JSON: ``indent=2``, ``sort_keys=True``, non-finite floats as the strings
  ``"inf"``, ``"-inf"`` and ``"nan"``, trailing newline.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import shutil
import uuid
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from domain.errors import UsageError

logger = logging.getLogger(__name__)

ERROR_FILE = "error.json"
FLOAT_FORMAT = "%.16e"


def _plain(value: Any) -> Any:
    """Convert numpy values and non-finite floats into strict-JSON values."""
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, complex):
        return {"re": _plain(value.real), "im": _plain(value.imag)}
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def encode_json(payload: Any) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return FLOAT_FORMAT % float(value)
    return str(value)


def _check_name(name: str) -> None:
    if not name or "/" in name or "\\" in name or name.startswith("."):
        raise UsageError(f"artifact name must be a plain file name, got {name!r}")


class StagedArtifactStore:
    """Write artifacts to ``<output>/.staging-<id>/`` and publish on commit."""

    def __init__(self, output_dir: str | os.PathLike[str]) -> None:
        self._output = Path(output_dir)
        self._staging = self._output / f".staging-{uuid.uuid4().hex[:12]}"
        self._names: list[str] = []

    @property
    def output_dir(self) -> Path:
        return self._output

    def _target(self, name: str) -> Path:
        _check_name(name)
        if name in self._names:
            raise UsageError(f"artifact {name!r} written twice")
        self._staging.mkdir(parents=True, exist_ok=True)
        self._names.append(name)
        return self._staging / name

    def write_json(self, name: str, payload: Any) -> None:
        self._target(name).write_text(encode_json(payload), encoding="utf-8", newline="\n")
        logger.debug("staged %s", name)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            count += 1
        self._target(name).write_text(buf.getvalue(), encoding="utf-8", newline="\n")
        logger.debug("staged %s (%d rows)", name, count)

    def write_bytes(self, name: str, data: bytes) -> None:
        self._target(name).write_bytes(data)
        logger.debug("staged %s (%d bytes)", name, len(data))

    def names(self) -> list[str]:
        return list(self._names)

    def commit(self) -> list[str]:
        self._output.mkdir(parents=True, exist_ok=True)
        published: list[str] = []
        for name in self._names:
            final = self._output / name
            os.replace(self._staging / name, final)
            published.append(str(final))
        stale = self._output / ERROR_FILE
        if stale.exists():
            stale.unlink()
        shutil.rmtree(self._staging, ignore_errors=True)
        logger.info("%d artifacts written to %s", len(published), self._output)
        return published

    def abort(self) -> None:
        shutil.rmtree(self._staging, ignore_errors=True)
        if self._names:
            logger.info("discarded %d staged artifacts", len(self._names))
        self._names.clear()

    def write_error(self, payload: dict[str, Any]) -> None:
        self._output.mkdir(parents=True, exist_ok=True)
        tmp = self._output / f".{ERROR_FILE}.tmp"
        tmp.write_text(encode_json(payload), encoding="utf-8", newline="\n")
        os.replace(tmp, self._output / ERROR_FILE)

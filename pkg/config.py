"""
isogap - Job configuration
Loads a job JSON file and layers the repo-shipped defaults under it.
"""

from __future__ import annotations

import copy
import json
import logging
import os
import threading
from pathlib import Path
from typing import Any

from domain.errors import ConfigError

logger = logging.getLogger(__name__)

_BASE_DIR = Path(__file__).resolve().parent
DEFAULT_CONFIG_PATH = str(_BASE_DIR / "config.json")

JOB_SECTION = "job"
LIMITS_SECTION = "limits"


class Config:
    """A job configuration: a ``job`` section, one section per command and ``limits``.

    Keys missing from the job file are filled from the repo defaults for
    every section the file mentions, plus ``job`` and ``limits``.
    """

    def __init__(self, config_path: str, defaults_path: str = DEFAULT_CONFIG_PATH) -> None:
        self.config_path = config_path
        self._defaults_path = defaults_path
        self._data: dict[str, Any] = {}
        self._repo_defaults: dict[str, Any] = {}
        self._write_lock = threading.Lock()
        self.load()
        self._merge_repo_defaults()

    @property
    def base_dir(self) -> Path:
        """Directory of the job file; relative paths in it resolve from here."""
        return Path(self.config_path).resolve().parent

    def load(self, path: str | None = None) -> None:
        """Load the job file; a missing or malformed file is a ConfigError."""
        target = path or self.config_path
        try:
            with open(target, encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {target}",
                              details={"path": str(target)}) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"malformed JSON in {target}: {exc.msg} (line {exc.lineno})",
                details={"path": str(target), "line": exc.lineno, "column": exc.colno},
            ) from exc
        if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError(f"{target}: top level must be an object of sections")
        self._data = data
        logger.debug("Config loaded from %s", target)

    def save(self, path: str | None = None) -> bool:
        """Write the merged configuration as JSON (atomic replace)."""
        target = path or self.config_path
        try:
            with self._write_lock:
                snapshot = copy.deepcopy(self._data)
                tmp = target + ".tmp"
                with open(tmp, "w", encoding="utf-8") as f:
                    json.dump(snapshot, f, indent=2, sort_keys=True)
                os.replace(tmp, target)
            logger.debug("Config saved to %s", target)
            return True
        except OSError as e:
            logger.error("Failed to save config: %s", e)
            return False

    def get(self, section: str, key: str, fallback: Any = None) -> Any:
        with self._write_lock:
            return self._data.get(section, {}).get(key, fallback)

    def set(self, section: str, key: str, value: Any) -> None:
        with self._write_lock:
            self._data.setdefault(section, {})[key] = value

    def get_section(self, section: str) -> dict[str, Any]:
        with self._write_lock:
            return copy.deepcopy(self._data.get(section, {}))

    def as_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = copy.deepcopy(self._data)
        return result

    def all_sections(self) -> list[str]:
        return list(self._data.keys())

    def parameters(self, command: str) -> dict[str, Any]:
        """Repo defaults for ``command`` overlaid with the job file's section."""
        params = copy.deepcopy(self._repo_defaults.get(command, {}))
        params.update(self.get_section(command))
        return params

    # ── internal helpers ──────────────────────────────────────────────────────

    def _merge_repo_defaults(self) -> None:
        """Insert default keys the job file lacks; existing values win."""
        try:
            with open(self._defaults_path, encoding="utf-8") as f:
                self._repo_defaults = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError):
            logger.warning("repo defaults unavailable at %s", self._defaults_path)
            return

        for section, keys in self._repo_defaults.items():
            if section not in self._data and section not in (JOB_SECTION, LIMITS_SECTION):
                continue
            if not isinstance(keys, dict):
                continue
            target = self._data.setdefault(section, {})
            for key, val in keys.items():
                target.setdefault(key, copy.deepcopy(val))

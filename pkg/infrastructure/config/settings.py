"""Pydantic Settings: process environment validated at start-up.

Reads the ``ISOGAP_*`` environment variables (or a ``.env`` file) once.  A
malformed value stops the CLI with a usage exit before any job runs.

Example::

    from infrastructure.config.settings import get_settings

    s = get_settings()
    print(s.log_level, s.threads)

Every field has a default, so the CLI works without any environment.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class IsogapSettings(BaseSettings):
    """Process-level settings; job parameters live in the job config instead."""

    model_config = SettingsConfigDict(
        env_prefix="ISOGAP_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    config_path: Path = Field(
        default=Path(__file__).resolve().parents[2] / "config.json",
        description="Repo defaults merged under every job config.",
    )

    # ── Logging ─────────────────────────────────────────────────────────────
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        description="Root log level.",
    )
    json_logs: bool | None = Field(
        default=None,
        description="JSON log lines on stderr; unset means JSON when stderr is not a TTY.",
    )
    log_file: Path | None = Field(
        default=None,
        description="Optional rotating log file.",
    )
    log_dir: Path = Field(
        default=Path("logs"),
        description="Directory for the JSONL run journal.",
    )
    event_log: bool = Field(
        default=False,
        description="Write job events to the run journal.",
    )

    # ── Execution ───────────────────────────────────────────────────────────
    threads: int = Field(
        default=1,
        ge=1,
        le=256,
        description="Default worker threads for grid evaluations.",
    )

    # ── Validators ──────────────────────────────────────────────────────────

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper_log_level(cls, v: object) -> object:
        if isinstance(v, str):
            return v.upper()
        return v

    @field_validator("config_path", "log_dir", "log_file", mode="before")
    @classmethod
    def _expand_paths(cls, v: object) -> object:
        if isinstance(v, str):
            return Path(v).expanduser()
        return v

    @model_validator(mode="after")
    def _log_dir_accessible(self) -> IsogapSettings:
        """Create log_dir when the journal is enabled; failure is not fatal."""
        if self.event_log:
            try:
                self.log_dir.mkdir(parents=True, exist_ok=True)
            except OSError:
                pass
        return self


@lru_cache(maxsize=1)
def get_settings() -> IsogapSettings:
    """Return the validated settings singleton.

    ``pydantic.ValidationError`` surfaces on the first call; the CLI turns it
    into a usage exit.
    """
    return IsogapSettings()

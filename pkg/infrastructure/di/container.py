"""Dependency Injection Container: infrastructure wiring.

This module is the *composition root*: the only place in the codebase that
knows about both domain ports and infrastructure adapters simultaneously.

Construction order
──────────────────
0. Settings        (pydantic-settings, validated process environment)
1. Config          (EnvConfigStore wrapping the layered job Config)
2. JobConfig       (command + CLI overrides, validated)
3. EventSink       (JsonlEventSink when the run journal is on, else NullEventSink)
4. ArtifactStore   (StagedArtifactStore over the job's output directory)
5. CommandRunner   (JobRunner ← measure path + seed + threads)
6. Orchestrator    (JobOrchestrator ← runner + store + sink + versions)

Usage::

    from infrastructure.di.container import Container

    container = Container.build("jobs/profile.json", "profile", seed=7)
    outcome = container.run()
    container.close()
"""

from __future__ import annotations

import logging
import platform
from importlib import metadata
from pathlib import Path
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from application.orchestrator import JobOrchestrator, JobOutcome
    from domain.ports.event_sink import IEventSink
    from infrastructure.artifacts.store import StagedArtifactStore
    from infrastructure.config.env_config import EnvConfigStore
    from infrastructure.config.job import JobConfig
    from infrastructure.config.settings import IsogapSettings
    from job_runner import JobRunner

logger = logging.getLogger(__name__)

_VERSIONED_PACKAGES = ("isogap", "numpy", "scipy", "pydantic", "pydantic-settings")


def package_versions() -> dict[str, str]:
    """Versions recorded in the manifest; a package that is not installed
    as a distribution (e.g. a source checkout) is reported as "unknown".
    """
    versions = {"python": platform.python_version()}
    for name in _VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class Container:
    """Explicit, lightweight DI container: no reflection, no magic."""

    def __init__(
        self,
        settings: IsogapSettings,
        config: EnvConfigStore,
        job: JobConfig,
        event_sink: IEventSink,
        store: StagedArtifactStore,
        runner: JobRunner,
        orchestrator: JobOrchestrator,
    ) -> None:
        self.settings = settings
        self.config = config
        self.job = job
        self.event_sink = event_sink
        self.store = store
        self.runner = runner
        self.orchestrator = orchestrator

    # ── Factory ───────────────────────────────────────────────────────────────

    @classmethod
    def build(
        cls,
        config_path: str | Path,
        command: str,
        *,
        output: str | Path | None = None,
        seed: int | None = None,
        threads: int | None = None,
        run_id: str = "",
        settings: IsogapSettings | None = None,
    ) -> Container:
        """Assemble the object graph for one job.

        Raises ConfigError for a missing or invalid job file; nothing is
        written to the output directory before ``run()``.
        """
        # ── 0. Settings ───────────────────────────────────────────────────────
        from infrastructure.config.settings import get_settings

        settings = settings or get_settings()

        # ── 1. Config ─────────────────────────────────────────────────────────
        from config import Config
        from infrastructure.config.env_config import EnvConfigStore

        base_cfg = Config(str(config_path), defaults_path=str(settings.config_path))
        config_store = EnvConfigStore(base_cfg)

        # ── 2. JobConfig ──────────────────────────────────────────────────────
        from infrastructure.config.job import build_job

        job = build_job(
            config_store, command, base_dir=base_cfg.base_dir, output=output, seed=seed,
            threads=threads, default_threads=settings.threads,
        )

        # ── 3. EventSink ──────────────────────────────────────────────────────
        from infrastructure.event_sink import JsonlEventSink, NullEventSink

        sink: IEventSink = (
            JsonlEventSink(settings.log_dir, run_id=run_id) if settings.event_log
            else NullEventSink()
        )

        # ── 4. ArtifactStore ──────────────────────────────────────────────────
        from infrastructure.artifacts.store import StagedArtifactStore

        store = StagedArtifactStore(job.output)

        # ── 5. CommandRunner ──────────────────────────────────────────────────
        from job_runner import JobRunner

        runner = JobRunner(job.measure, seed=job.seed, threads=job.threads)

        # ── 6. Orchestrator ───────────────────────────────────────────────────
        from application.orchestrator import JobOrchestrator

        orchestrator = JobOrchestrator(
            runner, store, sink, environment={"versions": package_versions()}
        )
        logger.debug("container built for %s (output %s)", job.command, job.output)
        return cls(settings, config_store, job, sink, store, runner, orchestrator)

    # ── Lifecycle ─────────────────────────────────────────────────────────────

    def run(self) -> JobOutcome:
        resolved: dict[str, Any] = self.job.resolved()
        return self.orchestrator.run(resolved)

    def close(self) -> None:
        self.event_sink.close()

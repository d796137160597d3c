"""JobOrchestrator: application-layer use case for one CLI job.

Runs a command through the ICommandRunner port, stages its artifacts in an
IArtifactStore and commits them together with a manifest only when the whole
command succeeds.  Nothing here knows about files, argparse or logging
handlers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from datetime import UTC, datetime
from typing import Any

from domain.errors import IsogapError
from domain.ports.artifact_store import IArtifactStore
from domain.ports.command_runner import ICommandRunner
from domain.ports.event_sink import IEventSink

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
ERROR_FILE = "error.json"


def config_digest(job: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a resolved job."""
    canonical = json.dumps(job, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class JobOutcome:
    command: str
    exit_status: int
    summary: dict[str, Any] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    error: dict[str, Any] | None = None
    wall_clock: float = 0.0

    @property
    def ok(self) -> bool:
        return self.exit_status == 0


class JobOrchestrator:
    """Coordinates one job: run, stage, manifest, commit or abort.

    Dependencies arrive through the constructor; the concrete adapters are
    wired in ``infrastructure/di/container.py``.
    """

    def __init__(
        self,
        runner: ICommandRunner,
        store: IArtifactStore,
        event_sink: IEventSink,
        *,
        environment: Mapping[str, Any] | None = None,
        clock: Callable[[], float] = time.perf_counter,
    ) -> None:
        self._runner = runner
        self._store = store
        self._sink = event_sink
        self._environment = dict(environment or {})
        self._clock = clock

    def run(self, job: Mapping[str, Any]) -> JobOutcome:
        """Execute ``job`` (command, parameters, seed, …) and return its outcome.

        Library errors become a non-zero exit status with the error JSON;
        nothing staged before the failure is left behind.
        """
        command = str(job["command"])
        digest = config_digest(job)
        started = self._clock()
        self._sink.emit("job.start", command=command, config_sha256=digest, seed=job.get("seed"))
        logger.info("job %s started (config %s)", command, digest[:12])

        def stage(name: str) -> None:
            logger.info("%s: %s", command, name)
            self._sink.emit("job.stage", command=command, stage=name)

        try:
            summary = self._runner.run(command, dict(job.get("parameters", {})), self._store, stage)
            elapsed = self._clock() - started
            self._store.write_json(MANIFEST, self._manifest(job, digest, elapsed))
            artifacts = self._store.commit()
        except IsogapError as exc:
            return self._fail(command, exc, self._clock() - started)
        except Exception as exc:
            logger.exception("job %s crashed", command)
            return self._fail(command, IsogapError(f"{type(exc).__name__}: {exc}"),
                              self._clock() - started)

        self._sink.emit(
            "job.finish", command=command, artifacts=len(artifacts),
            wall_clock_seconds=round(elapsed, 3),
        )
        self._sink.flush()
        logger.info("job %s finished in %.2fs (%d artifacts)", command, elapsed, len(artifacts))
        return JobOutcome(command, 0, summary, artifacts, None, elapsed)

    def _manifest(self, job: Mapping[str, Any], digest: str, elapsed: float) -> dict[str, Any]:
        return {
            "command": job["command"],
            "config_sha256": digest,
            "seed": job.get("seed"),
            "parameters": dict(job.get("parameters", {})),
            "versions": dict(self._environment.get("versions", {})),
            "artifacts": [*self._store.names(), MANIFEST],
            "wall_clock_seconds": elapsed,
            "timestamp": datetime.now(UTC).isoformat(timespec="seconds"),
        }

    def _fail(self, command: str, exc: IsogapError, elapsed: float) -> JobOutcome:
        self._store.abort()
        payload = exc.to_dict()
        self._store.write_error(payload)
        self._sink.emit(
            "job.failed", command=command, error=exc.code, category=exc.category,
            exit_status=exc.exit_status,
        )
        self._sink.flush()
        logger.error("job %s failed [%s]: %s", command, exc.code, exc.message)
        return JobOutcome(command, exc.exit_status, {}, [], payload, elapsed)

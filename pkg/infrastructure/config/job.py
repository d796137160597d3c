"""JobConfig: the fully resolved description of one CLI run.

Built from a layered ``Config`` (job file + repo defaults + env overlay) and
the command-line overrides.  Structural checks are done by pydantic; the
parameter semantics by ``utils.validators.validate_job_config``.  Either kind
of failure is a ConfigError.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from domain.errors import ConfigError
from domain.ports.config_store import IConfigStore
from utils.validators import validate_job_config

logger = logging.getLogger(__name__)

Command = Literal["rotation-gap", "profile", "verify", "reduce", "lsg", "oracle"]

REPO_ROOT = Path(__file__).resolve().parents[2]


class JobConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    measure: Path
    parameters: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, lt=2**64)
    output: Path = Path("out")
    threads: int = Field(default=1, ge=1, le=256)

    def resolved(self) -> dict[str, Any]:
        """The job as hashed into the manifest: everything that shapes results.

        ``output`` and ``threads`` are left out; neither changes an artifact.
        """
        return {
            "command": self.command,
            "measure": self.measure.name,
            "measure_sha256": hashlib.sha256(self.measure.read_bytes()).hexdigest(),
            "parameters": self.parameters,
            "seed": self.seed,
        }


def resolve_measure_path(raw: str | Path, base_dir: Path) -> Path:
    """Relative paths resolve against the job file's directory, then the repo root."""
    path = Path(raw).expanduser()
    if path.is_absolute():
        return path
    for root in (base_dir, REPO_ROOT):
        candidate = (root / path).resolve()
        if candidate.exists():
            return candidate
    return (base_dir / path).resolve()


def build_job(
    config: IConfigStore,
    command: str,
    *,
    base_dir: Path,
    output: str | Path | None = None,
    seed: int | None = None,
    threads: int | None = None,
    default_threads: int = 1,
) -> JobConfig:
    """Resolve the job for ``command`` from ``config`` and the CLI overrides."""
    job_section: dict[str, Any] = config.get_section("job")
    declared = job_section.get("command")
    if declared is not None and declared != command:
        raise ConfigError(
            f"job file is for command {declared!r}, not {command!r}",
            details={"declared": declared, "requested": command},
        )

    raw = {
        "command": command,
        "measure": job_section.get("measure"),
        "parameters": config.parameters(command),
        "seed": job_section.get("seed", 0) if seed is None else seed,
        "output": job_section.get("output", "out") if output is None else output,
        "threads": job_section.get("threads", default_threads) if threads is None else threads,
    }
    problems = validate_job_config(raw)
    if problems:
        raise ConfigError(f"invalid job configuration ({len(problems)} problems)",
                          details={"problems": problems})

    raw["measure"] = resolve_measure_path(raw["measure"], base_dir)
    if not raw["measure"].is_file():
        raise ConfigError(f"generator set not found: {raw['measure']}",
                          details={"path": str(raw["measure"])})
    try:
        job = JobConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(
            f"invalid job configuration ({exc.error_count()} problems)",
            details={"problems": [f"{'.'.join(map(str, e['loc']))}: {e['msg']}"
                                  for e in exc.errors()]},
        ) from exc
    logger.debug("job resolved: %s seed=%d threads=%d", job.command, job.seed, job.threads)
    return job

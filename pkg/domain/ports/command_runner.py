"""ICommandRunner: executes one pipeline command against an artifact store."""

from __future__ import annotations

from collections.abc import Callable
from typing import Any, Protocol, runtime_checkable

from domain.ports.artifact_store import IArtifactStore

StageCallback = Callable[[str], None]


@runtime_checkable
class ICommandRunner(Protocol):
    def commands(self) -> list[str]:
        """Names of the commands this runner knows."""
        ...

    def run(
        self,
        command: str,
        parameters: dict[str, Any],
        store: IArtifactStore,
        stage: StageCallback,
    ) -> dict[str, Any]:
        """Run ``command``, write its artifacts to ``store``, return a summary.

        ``stage`` is called with a short name as each pipeline step begins.
        """
        ...

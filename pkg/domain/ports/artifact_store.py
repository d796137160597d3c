"""IArtifactStore: where a job writes its result files."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from typing import Any, Protocol, runtime_checkable


@runtime_checkable
class IArtifactStore(Protocol):
    """Staged output: nothing is visible until ``commit``."""

    def write_json(self, name: str, payload: Any) -> None:
        ...

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
        ...

    def write_bytes(self, name: str, data: bytes) -> None:
        ...

    def names(self) -> list[str]:
        """Artifacts staged so far, in write order."""
        ...

    def commit(self) -> list[str]:
        """Move every staged artifact into place; return their final paths."""
        ...

    def abort(self) -> None:
        """Discard every staged artifact."""
        ...

    def write_error(self, payload: dict[str, Any]) -> None:
        """Write the error JSON directly into the output location."""
        ...

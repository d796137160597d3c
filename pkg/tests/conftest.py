"""
pytest conftest: shared measures, the slow marker, and a cross-platform
limit_memory marker.

When pytest-memray is installed (Linux/CI) it owns the limit_memory marker.
When it is NOT installed this plugin provides an equivalent implementation
backed by stdlib tracemalloc so the same markers are enforced everywhere.
"""

import json
import math
import tracemalloc
from pathlib import Path

import numpy as np
import pytest

from domain.entities.isometry import Isometry
from domain.entities.measure import AtomicMeasure
from domain.group_core import symmetrize

REPO_ROOT = Path(__file__).resolve().parents[1]
TETRA_ANGLE = math.acos(1.0 / 3.0)


def _parse_bytes(value: str) -> int:
    """Convert a human-readable size string to bytes.

    Accepts formats: "50 MB", "10MB", "512KB", "1 GB".
    """
    value = value.strip()
    units = {"B": 1, "KB": 1024, "MB": 1024**2, "GB": 1024**3}
    for suffix, multiplier in sorted(units.items(), key=lambda x: -len(x[0])):
        if value.upper().endswith(suffix):
            return int(float(value[: -len(suffix)].strip()) * multiplier)
    return int(value)  # bare number → bytes


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line(
        "markers",
        "limit_memory: per-test peak allocation ceiling (e.g. '50 MB'). "
        "Enforced by pytest-memray when available, otherwise by tracemalloc.",
    )
    config.addinivalue_line(
        "markers", "slow: full-size acceptance runs (deselect with -m 'not slow')"
    )


def _memray_active() -> bool:
    """Return True if pytest-memray is installed and will handle the marker."""
    try:
        import pytest_memray  # noqa: F401
        return True
    except ImportError:
        return False


@pytest.fixture(autouse=True)
def _tracemalloc_limit(request: pytest.FixtureRequest) -> object:
    """Enforce limit_memory markers via tracemalloc on platforms without memray."""
    if _memray_active():
        yield
        return

    marker = request.node.get_closest_marker("limit_memory")
    if marker is None:
        yield
        return

    limit_bytes = _parse_bytes(marker.args[0])

    tracemalloc.start()
    try:
        yield
    finally:
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()

    if peak > limit_bytes:
        limit_mb = limit_bytes / 1024**2
        peak_mb = peak / 1024**2
        pytest.fail(
            f"Memory limit exceeded: peak {peak_mb:.1f} MB > limit {limit_mb:.1f} MB"
        )


# ── Measures ──────────────────────────────────────────────────────────────────


def rotation_about(axis, angle, translation=(0.0, 0.0, 0.0)) -> Isometry:
    return Isometry.from_axis_angle(axis, angle, translation)


@pytest.fixture
def two_generator() -> AtomicMeasure:
    """Symmetrised x/z rotations by arccos(1/3) with generic translations."""
    mu = AtomicMeasure.uniform(
        [
            rotation_about((1, 0, 0), TETRA_ANGLE, (0.3, -0.1, 0.2)),
            rotation_about((0, 0, 1), TETRA_ANGLE, (-0.2, 0.25, 0.1)),
        ],
        label="two-generator",
    )
    return symmetrize(mu)


@pytest.fixture
def pure_rotation() -> AtomicMeasure:
    mu = AtomicMeasure.uniform(
        [rotation_about((1, 0, 0), TETRA_ANGLE), rotation_about((0, 0, 1), TETRA_ANGLE)],
        label="pure-rotation",
    )
    return symmetrize(mu)


@pytest.fixture
def translations_only() -> AtomicMeasure:
    mu = AtomicMeasure.uniform(
        [Isometry.from_translation(0.5 * e) for e in np.eye(3)], label="translations-only"
    )
    return symmetrize(mu)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def write_job(tmp_path):
    """Write a job file (and the two-generator measure) under tmp_path."""

    def _write(sections: dict, measure: str | None = "two_generator.json") -> Path:
        if measure is not None:
            src = REPO_ROOT / "measures" / measure
            (tmp_path / measure).write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
            sections.setdefault("job", {}).setdefault("measure", measure)
        path = tmp_path / "job.json"
        path.write_text(json.dumps(sections), encoding="utf-8")
        return path

    return _write

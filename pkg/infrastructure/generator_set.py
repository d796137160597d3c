"""Generator-set JSON schema and loader.

A generator set lists the atoms of a measure on Isom(R^3)::

    {
      "d": 3,
      "label": "two-generator",
      "symmetrize": true,
      "atoms": [
        {"axis_angle": {"axis": [1, 0, 0], "angle": 1.2309594173407747},
         "translation": [0.3, -0.1, 0.2], "weight": 1.0},
        {"quaternion": [1, 0, 0, 0], "translation": [0, 0, 1]}
      ]
    }

Each atom gives exactly one of ``quaternion`` ([w, x, y, z]), ``axis_angle``
or ``matrix``; omitting all three means the identity rotation.  Weights
default to 1 and are normalised to sum to one.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from domain.entities.isometry import Isometry
from domain.entities.measure import AtomicMeasure, weights_from
from domain.errors import ConfigError, InvalidIsometryError
from domain.group_core import symmetrize

logger = logging.getLogger(__name__)


class AxisAngle(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    axis: tuple[float, float, float]
    angle: float


class AtomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    quaternion: tuple[float, float, float, float] | None = None
    axis_angle: AxisAngle | None = None
    matrix: tuple[
        tuple[float, float, float], tuple[float, float, float], tuple[float, float, float]
    ] | None = None
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    weight: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _one_rotation(self) -> AtomSpec:
        given = [f for f in ("quaternion", "axis_angle", "matrix") if getattr(self, f) is not None]
        if len(given) > 1:
            raise ValueError(f"give at most one of quaternion/axis_angle/matrix, got {given}")
        return self

    def isometry(self) -> Isometry:
        if self.quaternion is not None:
            return Isometry.from_quaternion(self.quaternion, self.translation)
        if self.axis_angle is not None:
            return Isometry.from_axis_angle(
                self.axis_angle.axis, self.axis_angle.angle, self.translation
            )
        if self.matrix is not None:
            return Isometry(np.array(self.matrix, dtype=float), np.array(self.translation))
        return Isometry.from_translation(self.translation)


class GeneratorSet(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    d: Literal[3] = 3
    atoms: list[AtomSpec] = Field(min_length=1)
    symmetrize: bool = False
    label: str = ""

    @field_validator("label")
    @classmethod
    def _strip_label(cls, v: str) -> str:
        return v.strip()

    def to_measure(self, label: str | None = None) -> AtomicMeasure:
        """Build the (optionally symmetrised) probability measure."""
        isometries = [atom.isometry() for atom in self.atoms]
        weights = weights_from([atom.weight for atom in self.atoms])
        mu = AtomicMeasure.from_atoms(zip(isometries, weights, strict=True),
                                      label or self.label)
        if self.symmetrize:
            mu = symmetrize(mu)
        logger.debug("measure %r: %d atoms (symmetrize=%s)", mu.label, mu.size, self.symmetrize)
        return mu


def parse_generator_set(data: Any, source: str = "<generator set>") -> GeneratorSet:
    try:
        return GeneratorSet.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(
            f"{source}: invalid generator set ({exc.error_count()} problems)",
            details={"path": source, "problems": _problems(exc)},
        ) from exc


def load_measure(path: str | Path) -> AtomicMeasure:
    """Read a generator-set file and return its measure.

    Missing files, malformed JSON, schema violations and atoms that are not
    rotations all raise ConfigError.
    """
    target = Path(path)
    try:
        data = json.loads(target.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"generator set not found: {target}",
                          details={"path": str(target)}) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {target}: {exc.msg} (line {exc.lineno})",
            details={"path": str(target), "line": exc.lineno},
        ) from exc
    spec = parse_generator_set(data, str(target))
    try:
        return spec.to_measure(spec.label or target.stem)
    except InvalidIsometryError as exc:
        raise ConfigError(f"{target}: {exc.message}",
                          details={"path": str(target), **exc.details}) from exc


def _problems(exc: ValidationError) -> list[str]:
    return [
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
        for err in exc.errors()
    ]

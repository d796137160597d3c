"""Orientation-preserving rigid motions of R^3.

An isometry is the pair (v, R) acting by x ↦ v + R x.  Values are immutable:
arrays are copied and frozen at construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import polar
from scipy.spatial.transform import Rotation

from domain.errors import InvalidIsometryError

ROTATION_TOL = 1e-12
REPAIR_LIMIT = 1e-6

FloatArray = NDArray[np.float64]


def rotation_drift(rotations: ArrayLike) -> FloatArray:
    """max(‖RᵀR − I‖_max, |det R − 1|) for one (3,3) or a stack (n,3,3)."""
    rot = np.asarray(rotations, dtype=float)
    gram = np.einsum("...ji,...jk->...ik", rot, rot) - np.eye(3)
    ortho = np.abs(gram).max(axis=(-2, -1))
    det = np.abs(np.linalg.det(rot) - 1.0)
    return np.asarray(np.maximum(ortho, det), dtype=float)


def orthonormalize(rotations: ArrayLike) -> FloatArray:
    """Return rotations with drift ≤ ROTATION_TOL.

    Matrices drifting by at most REPAIR_LIMIT are replaced by their polar
    factor; anything further away (or a reflection) is rejected.
    """
    rot = np.array(rotations, dtype=float)
    single = rot.ndim == 2
    stack = rot.reshape(-1, 3, 3)
    if not np.all(np.isfinite(stack)):
        raise InvalidIsometryError("rotation matrix has non-finite entries")
    drift = rotation_drift(stack)
    dets = np.linalg.det(stack)
    bad = (drift > REPAIR_LIMIT) | (dets <= 0.0)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise InvalidIsometryError(
            f"matrix is not a rotation (drift {drift[idx]:.3e}, det {dets[idx]:.6f})",
            details={"index": idx},
        )
    for idx in np.flatnonzero(drift > ROTATION_TOL):
        unitary, _ = polar(stack[idx])
        stack[idx] = unitary
    return stack[0] if single else stack


@dataclass(frozen=True, eq=False)
class Isometry:
    """The rigid motion x ↦ translation + rotation @ x."""

    rotation: FloatArray
    translation: FloatArray

    def __post_init__(self) -> None:
        rot = np.array(self.rotation, dtype=float)
        vec = np.array(self.translation, dtype=float)
        if rot.shape != (3, 3):
            raise InvalidIsometryError(f"rotation must be 3x3, got shape {rot.shape}")
        if vec.shape != (3,):
            raise InvalidIsometryError(f"translation must be a 3-vector, got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise InvalidIsometryError("translation has non-finite entries")
        rot = orthonormalize(rot)
        rot.setflags(write=False)
        vec.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", vec)

    # ── Constructors ─────────────────────────────────────────────────────────

    @classmethod
    def identity(cls) -> Isometry:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation: ArrayLike) -> Isometry:
        return cls(np.eye(3), np.asarray(translation, dtype=float))

    @classmethod
    def from_quaternion(
        cls, quaternion: ArrayLike, translation: ArrayLike = (0.0, 0.0, 0.0)
    ) -> Isometry:
        """Quaternion given scalar-first as [w, x, y, z]."""
        q = np.asarray(quaternion, dtype=float)
        if q.shape != (4,) or not np.all(np.isfinite(q)) or np.linalg.norm(q) == 0.0:
            raise InvalidIsometryError(f"quaternion must be a nonzero 4-vector, got {q!r}")
        rot = Rotation.from_quat(np.roll(q, -1)).as_matrix()
        return cls(rot, np.asarray(translation, dtype=float))

    @classmethod
    def from_axis_angle(
        cls, axis: ArrayLike, angle: float, translation: ArrayLike = (0.0, 0.0, 0.0)
    ) -> Isometry:
        ax = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(ax))
        if ax.shape != (3,) or norm == 0.0 or not np.isfinite(norm):
            raise InvalidIsometryError(f"axis must be a nonzero 3-vector, got {ax!r}")
        rot = Rotation.from_rotvec(ax / norm * float(angle)).as_matrix()
        return cls(rot, np.asarray(translation, dtype=float))

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0) -> Isometry:
        """Haar-random rotation and a Gaussian translation of the given scale."""
        quat = rng.standard_normal(4)
        rot = Rotation.from_quat(quat / np.linalg.norm(quat)).as_matrix()
        return cls(rot, scale * rng.standard_normal(3))

    # ── Group structure ──────────────────────────────────────────────────────

    def compose(self, other: Isometry) -> Isometry:
        """(v1, R1)∘(v2, R2) = (v1 + R1 v2, R1 R2)."""
        return Isometry(
            self.rotation @ other.rotation,
            self.translation + self.rotation @ other.translation,
        )

    def inverse(self) -> Isometry:
        rot_t = self.rotation.T
        return Isometry(rot_t, -(rot_t @ self.translation))

    def apply(self, points: ArrayLike) -> FloatArray:
        """Image of one point (3,) or many points (n, 3)."""
        pts = np.asarray(points, dtype=float)
        return np.asarray(self.translation + pts @ self.rotation.T, dtype=float)

    def distance(self, other: Isometry) -> float:
        """‖R − R'‖_max + |v − v'|, the metric used to merge atoms."""
        return float(
            np.abs(self.rotation - other.rotation).max()
            + np.linalg.norm(self.translation - other.translation)
        )

    def is_close(self, other: Isometry, tol: float = ROTATION_TOL) -> bool:
        return self.distance(other) <= tol

    def to_dict(self) -> dict[str, Any]:
        return {"rotation": self.rotation.tolist(), "translation": self.translation.tolist()}

    def __matmul__(self, other: Isometry) -> Isometry:
        return self.compose(other)

    def __repr__(self) -> str:
        angle = float(np.degrees(Rotation.from_matrix(self.rotation).magnitude()))
        return f"Isometry(angle={angle:.4f}deg, translation={self.translation.round(6).tolist()})"


# ── Functional aliases ───────────────────────────────────────────────────────


def compose(g: Isometry, h: Isometry) -> Isometry:
    return g.compose(h)


def inverse(g: Isometry) -> Isometry:
    return g.inverse()


def apply(g: Isometry, x: ArrayLike) -> FloatArray:
    return g.apply(x)

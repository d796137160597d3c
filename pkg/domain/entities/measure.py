"""Finitely supported probability measures on the isometry group.

Atoms are stored column-wise (rotations, translations, weights) so that the
algebra in ``domain.group_core`` can work on whole arrays.  Construction
always merges atoms closer than MERGE_TOL, so two measures built from the
same atoms in the same order are identical bit for bit.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from domain.entities.isometry import Isometry, orthonormalize
from domain.errors import InvalidIsometryError

MERGE_TOL = 1e-10
WEIGHT_TOL = 1e-12

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class MomentSummary:
    """Translation moments of a measure.

    ``C`` is Σ w|v|², ``fourth_moment`` is Σ w|v|⁴ and ``max_radius`` is the
    largest |v| over the support.
    """

    C: float
    mean_translation: FloatArray
    mean_rotation: FloatArray
    max_radius: float
    fourth_moment: float

    def to_dict(self) -> dict[str, object]:
        return {
            "C": self.C,
            "mean_translation": self.mean_translation.tolist(),
            "mean_rotation": self.mean_rotation.tolist(),
            "max_radius": self.max_radius,
            "fourth_moment": self.fourth_moment,
        }


def _pairwise_distance(
    rotations: FloatArray, translations: FloatArray, i: NDArray[np.intp], j: NDArray[np.intp]
) -> FloatArray:
    rot = np.abs(rotations[i] - rotations[j]).max(axis=(1, 2))
    vec = np.linalg.norm(translations[i] - translations[j], axis=1)
    return np.asarray(rot + vec, dtype=float)


def merge_atoms(
    rotations: FloatArray,
    translations: FloatArray,
    weights: FloatArray,
    tol: float = MERGE_TOL,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Collapse atoms within ``tol`` of each other, summing their weights.

    Candidates come from a max-norm KD-tree over the 12 coordinates; each
    candidate pair is then re-checked with the exact merge metric.  Clusters
    are the connected components of the resulting graph and are represented
    by their lowest-index member, in order of first appearance.
    """
    n = len(weights)
    if n <= 1:
        return rotations, translations, weights
    points = np.concatenate([rotations.reshape(n, 9), translations], axis=1)
    pairs = cKDTree(points).query_pairs(r=tol, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return rotations, translations, weights
    keep = _pairwise_distance(rotations, translations, pairs[:, 0], pairs[:, 1]) <= tol
    pairs = pairs[keep]
    if len(pairs) == 0:
        return rotations, translations, weights
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    _, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    order = np.sort(first)
    # relabel clusters in order of first appearance
    rank = np.empty(labels.max() + 1, dtype=np.intp)
    rank[labels[order]] = np.arange(len(order))
    merged_weights = np.bincount(rank[labels], weights=weights, minlength=len(order))
    return rotations[order], translations[order], merged_weights


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Weighted atoms (rotation, translation, weight) plus a text label."""

    rotations: FloatArray
    translations: FloatArray
    weights: FloatArray
    label: str = ""

    def __post_init__(self) -> None:
        rot = np.array(self.rotations, dtype=float)
        vec = np.array(self.translations, dtype=float)
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise InvalidIsometryError("a measure needs at least one atom")
        n = len(w)
        if rot.shape != (n, 3, 3) or vec.shape != (n, 3):
            raise InvalidIsometryError(
                f"atom arrays disagree: rotations {rot.shape}, translations {vec.shape}, "
                f"weights {w.shape}"
            )
        if not np.all(np.isfinite(vec)) or not np.all(np.isfinite(w)):
            raise InvalidIsometryError("atoms must be finite")
        if np.any(w <= 0.0):
            raise InvalidIsometryError("atom weights must be strictly positive")
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidIsometryError(f"atom weights sum to {total!r}, expected 1")
        rot = orthonormalize(rot)
        rot, vec, w = merge_atoms(rot, vec, w)
        for arr in (rot, vec, w):
            arr.setflags(write=False)
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "translations", vec)
        object.__setattr__(self, "weights", w)

    # ── Constructors ─────────────────────────────────────────────────────────

    @classmethod
    def from_atoms(
        cls, atoms: Iterable[tuple[Isometry, float]], label: str = ""
    ) -> AtomicMeasure:
        items = list(atoms)
        if not items:
            raise InvalidIsometryError("a measure needs at least one atom")
        return cls(
            np.stack([g.rotation for g, _ in items]),
            np.stack([g.translation for g, _ in items]),
            np.array([w for _, w in items], dtype=float),
            label,
        )

    @classmethod
    def dirac(cls, g: Isometry, label: str = "") -> AtomicMeasure:
        return cls(g.rotation[None], g.translation[None], np.ones(1), label)

    @classmethod
    def uniform(cls, isometries: Iterable[Isometry], label: str = "") -> AtomicMeasure:
        items = list(isometries)
        return cls.from_atoms(((g, 1.0 / len(items)) for g in items), label)

    # ── Views ────────────────────────────────────────────────────────────────

    @property
    def size(self) -> int:
        return len(self.weights)

    def __len__(self) -> int:
        return self.size

    def atom(self, index: int) -> tuple[Isometry, float]:
        return (
            Isometry(self.rotations[index], self.translations[index]),
            float(self.weights[index]),
        )

    def __iter__(self) -> Iterator[tuple[Isometry, float]]:
        for idx in range(self.size):
            yield self.atom(idx)

    def isometries(self) -> list[Isometry]:
        return [g for g, _ in self]

    def radii(self) -> FloatArray:
        return np.asarray(np.linalg.norm(self.translations, axis=1), dtype=float)

    def relabel(self, label: str) -> AtomicMeasure:
        return AtomicMeasure(self.rotations, self.translations, self.weights, label)

    def moments(self) -> MomentSummary:
        radii = self.radii()
        sq = radii**2
        return MomentSummary(
            C=float(self.weights @ sq),
            mean_translation=self.weights @ self.translations,
            mean_rotation=np.einsum("n,nij->ij", self.weights, self.rotations),
            max_radius=float(radii.max()),
            fourth_moment=float(self.weights @ sq**2),
        )

    @property
    def is_pure_rotation(self) -> bool:
        return bool(np.all(self.translations == 0.0))

    # ── Comparison ───────────────────────────────────────────────────────────

    def is_close(self, other: AtomicMeasure, tol: float = MERGE_TOL) -> bool:
        """Same atoms within ``tol`` and same weights within WEIGHT_TOL, any order."""
        if self.size != other.size:
            return False
        mine = np.concatenate([self.rotations.reshape(self.size, 9), self.translations], axis=1)
        theirs = np.concatenate(
            [other.rotations.reshape(other.size, 9), other.translations], axis=1
        )
        dist, idx = cKDTree(theirs).query(mine, k=1, p=np.inf)
        if np.any(dist > tol) or len(np.unique(idx)) != self.size:
            return False
        exact = _pairwise_distance(
            np.concatenate([self.rotations, other.rotations]),
            np.concatenate([self.translations, other.translations]),
            np.arange(self.size),
            self.size + idx,
        )
        if np.any(exact > tol):
            return False
        return bool(np.all(np.abs(self.weights - other.weights[idx]) <= WEIGHT_TOL))

    def is_symmetric(self, tol: float = MERGE_TOL) -> bool:
        """True when the measure equals its pushforward under inversion."""
        rot_t = np.transpose(self.rotations, (0, 2, 1))
        inverted = AtomicMeasure(
            rot_t, -np.einsum("nij,nj->ni", rot_t, self.translations), self.weights
        )
        return self.is_close(inverted, tol)

    def to_dict(self) -> dict[str, object]:
        return {
            "label": self.label,
            "atoms": [
                {
                    "rotation": self.rotations[i].tolist(),
                    "translation": self.translations[i].tolist(),
                    "weight": float(self.weights[i]),
                }
                for i in range(self.size)
            ],
        }

    def __repr__(self) -> str:
        return f"AtomicMeasure(label={self.label!r}, atoms={self.size})"


def weights_from(values: ArrayLike) -> FloatArray:
    """Normalise positive weights to sum exactly to one."""
    w = np.asarray(values, dtype=float)
    return np.asarray(w / w.sum(), dtype=float)

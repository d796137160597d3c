"""Product quadrature rules: sphere, SO(3) Euler grid, ball and box.

Sphere and SO(3) weights are normalised to total mass 1 (probability
measures); ball and box weights sum to the Lebesgue volume.  Rules are cached
by degree and their arrays are read-only, so they can be shared across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from spectral.harmonics import plane_wave_degree

FloatArray = NDArray[np.float64]

# Extra Gauss nodes on top of the oscillation estimate for ball/box rules.
_GAUSS_PAD = 12


def _frozen(*arrays: np.ndarray) -> None:
    for arr in arrays:
        arr.setflags(write=False)


@lru_cache(maxsize=256)
def gauss_legendre(n: int) -> tuple[FloatArray, FloatArray]:
    """n-point Gauss–Legendre nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    _frozen(nodes, weights)
    return nodes, weights


# ── Sphere ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Gauss–Legendre in cos θ times equispaced azimuth; exact to ``degree``."""

    nodes: FloatArray
    weights: FloatArray
    degree: int

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, values: ArrayLike) -> complex:
        return complex(np.asarray(values) @ self.weights)


@lru_cache(maxsize=128)
def _sphere_rule(degree: int) -> SphereQuadrature:
    n_polar = degree // 2 + 1
    n_azimuth = degree + 1
    cos_theta, polar_weights = gauss_legendre(n_polar)
    sin_theta = np.sqrt(1.0 - cos_theta**2)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    nodes = np.stack(
        [
            np.outer(sin_theta, np.cos(phi)).ravel(),
            np.outer(sin_theta, np.sin(phi)).ravel(),
            np.repeat(cos_theta, n_azimuth),
        ],
        axis=1,
    )
    weights = np.repeat(polar_weights / 2.0, n_azimuth) / n_azimuth
    _frozen(nodes, weights)
    return SphereQuadrature(nodes, weights, degree)


def sphere_quadrature(L: int, margin: int = 8) -> SphereQuadrature:
    """Rule exact for spherical-harmonic degree ≤ 2L + margin."""
    if L < 0 or margin < 0:
        raise ValueError(f"L and margin must be nonnegative, got L={L}, margin={margin}")
    return _sphere_rule(2 * L + margin)


# ── SO(3) ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SO3Quadrature:
    """Euler-angle product rule on SO(3) for the normalised Haar measure.

    α and γ are equispaced with ``degree + 1`` points each; cos β runs over
    Gauss–Legendre nodes.  Integrates every product of Wigner entries of
    total degree ≤ ``degree`` exactly.
    """

    alpha: FloatArray
    beta: FloatArray
    gamma: FloatArray
    beta_weights: FloatArray
    degree: int

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.alpha), len(self.beta), len(self.gamma)

    @property
    def size(self) -> int:
        na, nb, ng = self.shape
        return na * nb * ng

    def weights(self) -> FloatArray:
        """Full weight grid with shape (Nα, Nβ, Nγ)."""
        na, _, ng = self.shape
        return np.broadcast_to(self.beta_weights[None, :, None] / (na * ng), self.shape)

    def rotate(self, x: ArrayLike) -> FloatArray:
        """ω·x for every grid rotation ω, shape (Nα, Nβ, Nγ, 3)."""
        vec = np.asarray(x, dtype=float)
        cg, sg = np.cos(self.gamma), np.sin(self.gamma)
        # R_z(γ) x
        y = np.stack([cg * vec[0] - sg * vec[1], sg * vec[0] + cg * vec[1],
                      np.full_like(cg, vec[2])], axis=-1)
        cb, sb = np.cos(self.beta), np.sin(self.beta)
        # R_y(β) y  -> (Nβ, Nγ, 3)
        z = np.stack(
            [
                cb[:, None] * y[None, :, 0] + sb[:, None] * y[None, :, 2],
                np.broadcast_to(y[None, :, 1], (len(cb), len(cg))),
                -sb[:, None] * y[None, :, 0] + cb[:, None] * y[None, :, 2],
            ],
            axis=-1,
        )
        ca, sa = np.cos(self.alpha), np.sin(self.alpha)
        # R_z(α) z  -> (Nα, Nβ, Nγ, 3)
        return np.stack(
            [
                ca[:, None, None] * z[None, ..., 0] - sa[:, None, None] * z[None, ..., 1],
                sa[:, None, None] * z[None, ..., 0] + ca[:, None, None] * z[None, ..., 1],
                np.broadcast_to(z[None, ..., 2], (len(ca), *z.shape[:2])),
            ],
            axis=-1,
        )


@lru_cache(maxsize=32)
def so3_quadrature(degree: int) -> SO3Quadrature:
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    n_circle = degree + 1
    cos_beta, beta_weights = gauss_legendre(degree // 2 + 1)
    angles = 2.0 * np.pi * np.arange(n_circle) / n_circle
    beta = np.arccos(cos_beta)
    bw = beta_weights / 2.0
    _frozen(angles, beta, bw)
    return SO3Quadrature(angles, beta, angles, bw, degree)


# ── Ball and box (Lebesgue measure) ──────────────────────────────────────────


def _gauss_points(bandwidth: float, length: float) -> int:
    """Gauss nodes resolving exp(i k t), |k| ≤ bandwidth, on an interval of ``length``."""
    return int(math.ceil(bandwidth * length / 4.0)) + _GAUSS_PAD


def ball_quadrature(
    center: ArrayLike, radius: float, bandwidth: float
) -> tuple[FloatArray, FloatArray]:
    """Radial Gauss × spherical product rule for a ball.

    ``bandwidth`` bounds the frequency |k| of the plane waves exp(i k·x) to
    be integrated; each radial shell gets a sphere rule whose degree covers
    the Rayleigh expansion of exp(i |k| r cos ϑ).
    """
    c = np.asarray(center, dtype=float)
    nodes, weights = gauss_legendre(_gauss_points(bandwidth, radius))
    radii = radius * (nodes + 1.0) / 2.0
    radial_w = weights * radius / 2.0 * radii**2 * 4.0 * np.pi
    points: list[FloatArray] = []
    masses: list[FloatArray] = []
    for r, w in zip(radii, radial_w, strict=True):
        shell = _sphere_rule(plane_wave_degree(bandwidth * r) + _GAUSS_PAD)
        points.append(c + r * shell.nodes)
        masses.append(w * shell.weights)
    return np.concatenate(points), np.concatenate(masses)


def box_quadrature(
    lower: ArrayLike, upper: ArrayLike, bandwidth: float
) -> tuple[FloatArray, FloatArray]:
    """Tensor Gauss rule on an axis-aligned box."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    axes: list[FloatArray] = []
    axis_weights: list[FloatArray] = []
    for a in range(3):
        length = hi[a] - lo[a]
        nodes, weights = gauss_legendre(_gauss_points(bandwidth, length))
        axes.append(lo[a] + length * (nodes + 1.0) / 2.0)
        axis_weights.append(weights * length / 2.0)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    w = np.einsum("i,j,k->ijk", *axis_weights).ravel()
    return grid, w

"""Harmonic-analysis kernel on SO(3) and S².

Conventions
───────────
* Spherical harmonics are orthonormal for the *normalised* surface measure,
  so Y₀₀ ≡ 1.  They carry the Condon–Shortley phase (scipy convention) and
  are indexed flat by l² + l + m.
* ``wigner_d(l, R)`` is the matrix D with (Y_lm ∘ R⁻¹) = Σ_m' Y_lm' D[m', m],
  i.e. the matrix of φ ↦ φ(R⁻¹·) on degree l.  It is multiplicative,
  D(RS) = D(R) D(S), and equals e^{-im'α} d_{m'm}(β) e^{-imγ} for
  R = R_z(α) R_y(β) R_z(γ).
* Small-d matrices are exp(−iβJ_y), evaluated from a cached eigensystem of
  J_y; rows and columns run over m = −l..l.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray
from scipy.special import sph_harm_y, spherical_jn

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

GIMBAL_TOL = 1e-10
_SQRT_4PI = math.sqrt(4.0 * math.pi)


# ── Indexing ─────────────────────────────────────────────────────────────────


def sphere_dim(L: int) -> int:
    return (L + 1) ** 2


def sphere_index(l: int, m: int) -> int:
    return l * l + l + m


def degree_slice(l: int) -> slice:
    return slice(l * l, (l + 1) * (l + 1))


# ── Euler angles ─────────────────────────────────────────────────────────────


def euler_zyz(rotations: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray]:
    """ZYZ Euler angles (α, β, γ) with R = R_z(α) R_y(β) R_z(γ).

    Accepts one matrix or a stack and always returns arrays.  When
    |cos β| > 1 − GIMBAL_TOL only α ± γ is determined; α is then taken from
    the third column and γ recovered from the upper-left 2×2 block.
    """
    rot = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    sin_beta = np.hypot(rot[:, 0, 2], rot[:, 1, 2])
    beta = np.arctan2(sin_beta, rot[:, 2, 2])
    alpha = np.arctan2(rot[:, 1, 2], rot[:, 0, 2])
    gamma = np.arctan2(rot[:, 2, 1], -rot[:, 2, 0])

    north = rot[:, 2, 2] > 1.0 - GIMBAL_TOL
    south = rot[:, 2, 2] < -(1.0 - GIMBAL_TOL)
    if np.any(north | south):
        total = np.arctan2(rot[:, 1, 0] - rot[:, 0, 1], rot[:, 0, 0] + rot[:, 1, 1])
        diff = np.arctan2(-(rot[:, 1, 0] + rot[:, 0, 1]), rot[:, 1, 1] - rot[:, 0, 0])
        gamma = np.where(north, total - alpha, gamma)
        gamma = np.where(south, alpha - diff, gamma)
    return alpha, beta, gamma


def rotation_from_euler(alpha: float, beta: float, gamma: float) -> FloatArray:
    def rz(t: float) -> FloatArray:
        c, s = math.cos(t), math.sin(t)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = math.cos(beta), math.sin(beta)
    ry = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return np.asarray(rz(alpha) @ ry @ rz(gamma), dtype=float)


def rotation_angle(rotation: ArrayLike) -> float:
    """Angle of a rotation from its trace."""
    tr = float(np.trace(np.asarray(rotation, dtype=float)))
    return math.acos(min(1.0, max(-1.0, (tr - 1.0) / 2.0)))


# ── Wigner matrices ──────────────────────────────────────────────────────────


@lru_cache(maxsize=64)
def _jy_eigensystem(l: int) -> tuple[FloatArray, ComplexArray]:
    m = np.arange(-l, l)
    raising = np.diag(np.sqrt(l * (l + 1) - m * (m + 1.0)), k=-1)
    jy = (raising - raising.T) / 2j
    vals, vecs = scipy.linalg.eigh(jy)
    vals = np.rint(vals)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return vals, vecs


def wigner_small_d(l: int, beta: float | ArrayLike) -> FloatArray:
    """d^l(β) = exp(−iβJ_y); shape (2l+1, 2l+1), or (n, 2l+1, 2l+1) for many β."""
    if l < 0:
        raise ValueError(f"degree must be nonnegative, got {l}")
    betas = np.asarray(beta, dtype=float)
    vals, vecs = _jy_eigensystem(l)
    phases = np.exp(-1j * np.multiply.outer(betas.ravel(), vals))
    small = np.einsum("ij,nj,kj->nik", vecs, phases, vecs.conj()).real
    if betas.ndim == 0:
        return np.asarray(small[0], dtype=float)
    return np.asarray(small.reshape(*betas.shape, 2 * l + 1, 2 * l + 1), dtype=float)


def wigner_d_stack(l: int, rotations: ArrayLike) -> ComplexArray:
    """Wigner D^l for a stack of rotations, shape (n, 2l+1, 2l+1)."""
    alpha, beta, gamma = euler_zyz(rotations)
    m = np.arange(-l, l + 1)
    small = wigner_small_d(l, beta).reshape(-1, 2 * l + 1, 2 * l + 1)
    left = np.exp(-1j * np.multiply.outer(alpha, m))
    right = np.exp(-1j * np.multiply.outer(gamma, m))
    return np.asarray(left[:, :, None] * small * right[:, None, :], dtype=complex)


def wigner_d(l: int, rotation: ArrayLike) -> ComplexArray:
    """D^l(R): unitary, multiplicative, diagonal e^{-imφ} for z-rotations."""
    return np.asarray(wigner_d_stack(l, np.asarray(rotation, dtype=float)[None])[0])


def character(l: int, angle: float) -> float:
    """χ_l(φ) = Σ_{m=-l..l} e^{imφ}, the trace of D^l at rotation angle φ."""
    m = np.arange(-l, l + 1)
    return float(np.cos(m * angle).sum())


# ── Spherical harmonics ──────────────────────────────────────────────────────


def _polar_azimuth(points: ArrayLike) -> tuple[FloatArray, FloatArray]:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    polar = np.arccos(np.clip(pts[:, 2] / np.linalg.norm(pts, axis=1), -1.0, 1.0))
    azimuth = np.arctan2(pts[:, 1], pts[:, 0])
    return polar, azimuth


def sh_eval(l: int, m: int, xi: ArrayLike) -> complex:
    """Y_lm(ξ) for a unit vector ξ, normalised so that ⟨Y₀₀, Y₀₀⟩ = 1."""
    if abs(m) > l:
        raise ValueError(f"order {m} out of range for degree {l}")
    polar, azimuth = _polar_azimuth(xi)
    return complex(_SQRT_4PI * sph_harm_y(l, m, polar[0], azimuth[0]))


def sh_matrix(L: int, points: ArrayLike) -> ComplexArray:
    """All Y_lm with l ≤ L at many points; column l² + l + m."""
    polar, azimuth = _polar_azimuth(points)
    out = np.empty((len(polar), sphere_dim(L)), dtype=complex)
    for l in range(L + 1):
        for m in range(-l, l + 1):
            out[:, sphere_index(l, m)] = _SQRT_4PI * sph_harm_y(l, m, polar, azimuth)
    return out


# ── Spherical Bessel functions ───────────────────────────────────────────────


def bessel_j(l: int | ArrayLike, t: float | ArrayLike) -> FloatArray:
    """Spherical Bessel j_l(t), t ≥ 0 (scipy's implementation)."""
    return np.asarray(spherical_jn(l, t), dtype=float)


@lru_cache(maxsize=1024)
def plane_wave_degree(t: float, tol: float = 1e-15) -> int:
    """Smallest degree above which exp(i t cos ϑ) has Rayleigh terms below tol.

    Terms are (2l+1)|j_l(t)|; past l ≈ t they decay super-exponentially,
    so the search range t + 16 t^{1/3} + 32 always covers the tail.
    """
    t = abs(float(t))
    if t == 0.0:
        return 0
    degrees = np.arange(int(t + 16.0 * max(t, 1.0) ** (1.0 / 3.0)) + 32)
    terms = (2 * degrees + 1) * np.abs(spherical_jn(degrees, t))
    above = np.flatnonzero(terms > tol)
    return int(above[-1]) + 1 if above.size else 0

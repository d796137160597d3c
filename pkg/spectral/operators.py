"""Averaging operators of atomic measures as finite matrices.

Three families, all for φ ↦ Σ_g w_g π(g)φ:

* ``rotation_blocks``: the rotation part alone, one (2l+1)² block per degree.
* ``sphere_operator``: on L²(S²): (ρ_r(g)φ)(ξ) = e(r⟨ξ, v⟩) φ(θ⁻¹ξ),
  in the spherical-harmonic basis of degree ≤ L.
* ``so3_operator``: on L²(SO(3)): (π_x(g)φ)(ω) = e(⟨ωx, v⟩) φ(θ⁻¹ω),
  in the Peter–Weyl basis √(2l+1)·conj(D^l_{mn}) with l ≤ L.

Here e(t) = exp(2πi t).  Rotations act exactly through Wigner matrices; the
phase is a multiplication operator assembled by quadrature whose degree is
raised until the phase's plane-wave tail drops below 1e-15, so matrices are
accurate to rounding for any radius.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any

import numpy as np
import scipy.fft
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from domain.entities.measure import AtomicMeasure
from domain.errors import AsymmetricMeasureError, UsageError
from spectral.harmonics import (
    degree_slice,
    plane_wave_degree,
    sh_matrix,
    sphere_dim,
    wigner_d_stack,
    wigner_small_d,
)
from spectral.quadrature import SO3Quadrature, so3_quadrature, sphere_quadrature

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

SPHERE = "sphere"
PETER_WEYL = "peter-weyl"

DEFAULT_MARGIN = 8
NO_GAP_THRESHOLD = 1e-6
_ATOM_CHUNK = 64
_TWO_PI = 2.0 * math.pi


# ── Band limits and indexing ─────────────────────────────────────────────────


@dataclass(frozen=True)
class BandLimit:
    """Maximum degree L of a truncated harmonic basis."""

    L: int

    def __post_init__(self) -> None:
        if int(self.L) != self.L or self.L < 0:
            raise UsageError(f"band limit must be a nonnegative integer, got {self.L!r}")

    @property
    def sphere_dim(self) -> int:
        return sphere_dim(self.L)

    @property
    def so3_dim(self) -> int:
        return peter_weyl_dim(self.L)


def _band(L: int | BandLimit) -> int:
    return L.L if isinstance(L, BandLimit) else BandLimit(int(L)).L


def peter_weyl_dim(L: int) -> int:
    return sum((2 * l + 1) ** 2 for l in range(L + 1))


def peter_weyl_offset(l: int) -> int:
    return peter_weyl_dim(l - 1) if l > 0 else 0


@lru_cache(maxsize=32)
def peter_weyl_indices(L: int) -> tuple[NDArray[np.intp], NDArray[np.intp], NDArray[np.intp]]:
    """(l, m, n) per Peter–Weyl index; n runs fastest, then m, then l."""
    ls, ms, ns = [], [], []
    for l in range(L + 1):
        m, n = np.meshgrid(np.arange(-l, l + 1), np.arange(-l, l + 1), indexing="ij")
        ls.append(np.full(m.size, l))
        ms.append(m.ravel())
        ns.append(n.ravel())
    out = (np.concatenate(ls), np.concatenate(ms), np.concatenate(ns))
    for arr in out:
        arr.setflags(write=False)
    return out


# ── Rotation blocks ──────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class RotationBlocks:
    """Σ_g w_g D^l(θ_g) for l = 0..L."""

    blocks: tuple[ComplexArray, ...]
    label: str = ""

    @property
    def L(self) -> int:
        return len(self.blocks) - 1

    def norms(self) -> FloatArray:
        return np.array([_spectral_norm(b) for b in self.blocks])

    def hermitian_residual(self) -> float:
        return max(float(np.abs(b - b.conj().T).max()) for b in self.blocks)

    def as_matrix(self) -> ComplexArray:
        """Block-diagonal matrix in the spherical-harmonic basis."""
        return np.asarray(scipy.linalg.block_diag(*self.blocks), dtype=complex)

    def __matmul__(self, other: RotationBlocks) -> RotationBlocks:
        if self.L != other.L:
            raise UsageError("band limits differ")
        return RotationBlocks(tuple(a @ b for a, b in zip(self.blocks, other.blocks, strict=True)))


def _spectral_norm(matrix: ComplexArray) -> float:
    return float(scipy.linalg.svdvals(matrix)[0])


def _weighted_blocks(rotations: FloatArray, weights: FloatArray, L: int) -> list[ComplexArray]:
    blocks: list[ComplexArray] = [np.full((1, 1), weights.sum(), dtype=complex)]
    for l in range(1, L + 1):
        stack = wigner_d_stack(l, rotations)
        blocks.append(np.asarray(np.einsum("n,nij->ij", weights, stack), dtype=complex))
    return blocks


def rotation_blocks(mu: AtomicMeasure, L: int | BandLimit) -> RotationBlocks:
    """Block l is the matrix of φ ↦ Σ w φ(θ_g⁻¹·) on degree-l harmonics."""
    blocks = _weighted_blocks(mu.rotations, mu.weights, _band(L))
    blocks[0] = np.ones((1, 1), dtype=complex)
    return RotationBlocks(tuple(blocks), mu.label)


@dataclass(frozen=True)
class RotationGap:
    """α_L = 1 − max_{1≤l≤L} ‖block_l‖ and the degree attaining the maximum."""

    alpha: float
    attaining_l: int
    block_norms: tuple[float, ...]

    @property
    def no_gap(self) -> bool:
        return self.alpha <= NO_GAP_THRESHOLD

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "attaining_l": self.attaining_l,
            "block_norms": list(self.block_norms),
            "no_gap": self.no_gap,
        }


def require_symmetric(mu: AtomicMeasure) -> None:
    if not mu.is_symmetric():
        raise AsymmetricMeasureError(
            f"measure {mu.label!r} is not symmetric", details={"label": mu.label}
        )


def rotation_gap(mu: AtomicMeasure, L: int | BandLimit) -> RotationGap:
    band = _band(L)
    if band < 1:
        raise UsageError("rotation gap needs L >= 1")
    require_symmetric(mu)
    norms = rotation_blocks(mu, band).norms()
    top = int(np.argmax(norms[1:])) + 1
    alpha = 1.0 - float(norms[top])
    logger.debug("rotation gap of %r at L=%d: alpha=%.6g (l=%d)", mu.label, band, alpha, top)
    return RotationGap(alpha, top, tuple(float(x) for x in norms))


# ── Assembled operators ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class BandLimitedOperator:
    """Dense matrix of an averaging operator in a truncated basis."""

    matrix: ComplexArray
    basis: str
    L: int
    parameter: FloatArray
    assembly_margin: int
    label: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def hermitian_residual(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def header(self) -> dict[str, Any]:
        return {
            "basis": self.basis,
            "L": self.L,
            "parameter": np.atleast_1d(self.parameter).tolist(),
            "measure_label": self.label,
            "assembly_margin": self.assembly_margin,
            "shape": list(self.matrix.shape),
        }


def assembly_margin(mu: AtomicMeasure, length: float, margin: int) -> int:
    """Quadrature margin covering the phase e(length·⟨·, v⟩) for every atom."""
    if margin < 0:
        raise UsageError(f"margin must be nonnegative, got {margin}")
    t_max = _TWO_PI * abs(float(length)) * float(mu.radii().max())
    return max(int(margin), plane_wave_degree(round(t_max, 12)))


def sphere_operator(
    mu: AtomicMeasure, r: float, L: int | BandLimit, margin: int = DEFAULT_MARGIN
) -> BandLimitedOperator:
    """⟨Y_l'm', ρ_r(μ) Y_lm⟩ by sphere quadrature.

    The rotated basis Y∘θ⁻¹ = Y·D(θ) is exact; the quadrature only has to
    integrate the phase, whose degree is covered by the assembly margin.
    """
    band = _band(L)
    if r < 0:
        raise UsageError(f"radius must be nonnegative, got {r}")
    eff_margin = assembly_margin(mu, r, margin)
    moving = np.flatnonzero(mu.radii() > 0.0) if r > 0 else np.array([], dtype=np.intp)
    still = np.setdiff1d(np.arange(mu.size), moving)

    matrix = np.zeros((sphere_dim(band), sphere_dim(band)), dtype=complex)
    if still.size:
        # phase ≡ 1: the rotation blocks themselves
        matrix += scipy.linalg.block_diag(
            *_weighted_blocks(mu.rotations[still], mu.weights[still], band)
        )

    if moving.size:
        quad = sphere_quadrature(band, eff_margin)
        basis = sh_matrix(band, quad.nodes)
        acc = np.zeros_like(basis)
        for start in range(0, moving.size, _ATOM_CHUNK):
            idx = moving[start:start + _ATOM_CHUNK]
            phases = np.exp(1j * _TWO_PI * r * (mu.translations[idx] @ quad.nodes.T))
            weighted = mu.weights[idx][:, None] * phases
            for l in range(band + 1):
                sl = degree_slice(l)
                d_stack = wigner_d_stack(l, mu.rotations[idx])
                rotated = np.einsum("pk,ckj->cpj", basis[:, sl], d_stack)
                acc[:, sl] += np.einsum("cp,cpj->pj", weighted, rotated)
        matrix += basis.conj().T @ (quad.weights[:, None] * acc)

    logger.debug(
        "sphere operator %r r=%.6g L=%d margin=%d atoms=%d",
        mu.label, r, band, eff_margin, mu.size,
    )
    return BandLimitedOperator(
        np.asarray(matrix, dtype=complex), SPHERE, band, np.array([float(r)]), eff_margin, mu.label
    )


# ── Peter–Weyl machinery ─────────────────────────────────────────────────────


def left_regular(rotation: ArrayLike, L: int) -> ComplexArray:
    """Matrix of φ ↦ φ(θ⁻¹·): D^l(θ) acting on the m index."""
    rot = np.asarray(rotation, dtype=float)[None]
    blocks = [np.kron(wigner_d_stack(l, rot)[0], np.eye(2 * l + 1)) for l in range(L + 1)]
    return np.asarray(scipy.linalg.block_diag(*blocks), dtype=complex)


def right_regular(rotation: ArrayLike, L: int) -> ComplexArray:
    """Matrix Σ(h) of φ ↦ φ(·h): conj(D^l(h)) acting on the n index."""
    rot = np.asarray(rotation, dtype=float)[None]
    blocks = [np.kron(np.eye(2 * l + 1), wigner_d_stack(l, rot)[0].conj()) for l in range(L + 1)]
    return np.asarray(scipy.linalg.block_diag(*blocks), dtype=complex)


def rotate_left(coeffs: ArrayLike, rotation: ArrayLike, L: int) -> ComplexArray:
    """Coefficients of φ(θ⁻¹·) from those of φ, block by block.

    ``coeffs`` may carry leading batch axes; the last axis is the basis.
    """
    c = np.asarray(coeffs, dtype=complex)
    lead = c.shape[:-1]
    rot = np.asarray(rotation, dtype=float)[None]
    out = np.empty_like(c)
    for l in range(L + 1):
        size = 2 * l + 1
        off = peter_weyl_offset(l)
        block = c[..., off:off + size * size].reshape(*lead, size, size)
        out[..., off:off + size * size] = (wigner_d_stack(l, rot)[0] @ block).reshape(
            *lead, size * size
        )
    return out


def _apply_left_rotations(matrix: ComplexArray, d_blocks: list[ComplexArray]) -> ComplexArray:
    """matrix @ Π(θ) where Π(θ) is block-diagonal with D^l(θ) ⊗ I."""
    out = np.empty_like(matrix)
    for l, d in enumerate(d_blocks):
        size = 2 * l + 1
        off = peter_weyl_offset(l)
        cols = matrix[:, off:off + size * size].reshape(matrix.shape[0], size, size)
        out[:, off:off + size * size] = np.einsum("amn,mk->akn", cols, d).reshape(
            matrix.shape[0], size * size
        )
    return out


class PeterWeylGrid:
    """Peter–Weyl basis of degree ≤ L sampled on an SO(3) Euler grid.

    Caches √(2l+1)·d^l_{mn}(β_j) for every grid β and every basis index, and
    provides the two operations the SO(3) operators need: the Galerkin matrix
    of a multiplication operator and nodal evaluation of a coefficient vector.
    """

    def __init__(self, L: int, degree: int) -> None:
        if degree < 2 * L:
            raise UsageError(f"grid degree {degree} cannot resolve products at L={L}")
        self.L = L
        self.quad: SO3Quadrature = so3_quadrature(degree)
        self.l_idx, self.m_idx, self.n_idx = peter_weyl_indices(L)
        na, nb, ng = self.quad.shape
        self._dm = np.subtract.outer(self.m_idx, self.m_idx) % na
        self._dn = np.subtract.outer(self.n_idx, self.n_idx) % ng

    @property
    def dim(self) -> int:
        return len(self.l_idx)

    @cached_property
    def small_d(self) -> FloatArray:
        """(Nβ, dim) table of √(2l+1)·d^l_{mn}(β_j)."""
        table = np.empty((len(self.quad.beta), self.dim))
        for l in range(self.L + 1):
            off = peter_weyl_offset(l)
            size = (2 * l + 1) ** 2
            d = wigner_small_d(l, self.quad.beta).reshape(len(self.quad.beta), size)
            table[:, off:off + size] = math.sqrt(2 * l + 1) * d
        table.setflags(write=False)
        return table

    def multiplication_matrix(self, values: ComplexArray) -> ComplexArray:
        """⟨b_a', f b_a⟩ for f sampled on the grid, shape (Nα, Nβ, Nγ)."""
        na, _, ng = self.quad.shape
        spectrum = scipy.fft.fft2(values, axes=(0, 2)) / (na * ng)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for j, weight in enumerate(self.quad.beta_weights):
            dd = self.small_d[j]
            out += (weight * np.outer(dd, dd)) * spectrum[:, j, :][self._dm, self._dn]
        return out

    def evaluate(self, coeffs: ArrayLike) -> ComplexArray:
        """Nodal values Σ_a c_a b_a(ω) on the grid, shape (Nα, Nβ, Nγ).

        A (k, dim) batch gives (k, Nα, Nβ, Nγ) from one FFT per β slice.
        """
        c = np.asarray(coeffs, dtype=complex)
        batch = np.atleast_2d(c)
        k = batch.shape[0]
        na, nb, ng = self.quad.shape
        values = np.empty((k, na, nb, ng), dtype=complex)
        rows = self.m_idx % na
        cols = self.n_idx % ng
        for j in range(nb):
            spec = np.zeros((k, na, ng), dtype=complex)
            np.add.at(spec, (slice(None), rows, cols), batch * self.small_d[j])
            values[:, :, j, :] = scipy.fft.ifft2(spec, axes=(1, 2)) * (na * ng)
        return values[0] if c.ndim == 1 else values

    def inner(self, f: ComplexArray, g: ComplexArray) -> complex:
        """⟨f, g⟩ = ∫ conj(f) g dω for nodal values on this grid."""
        return complex(np.sum(self.quad.weights() * f.conj() * g))

    def phase(self, x: ArrayLike, v: ArrayLike) -> ComplexArray:
        """e(⟨ωx, v⟩) on the grid."""
        rotated = self.quad.rotate(x)
        return np.exp(1j * _TWO_PI * (rotated @ np.asarray(v, dtype=float)))


@lru_cache(maxsize=8)
def peter_weyl_grid(L: int, degree: int) -> PeterWeylGrid:
    return PeterWeylGrid(L, degree)


def evaluate_peter_weyl(coeffs: ArrayLike, L: int, degree: int) -> ComplexArray:
    """Nodal values of a degree-≤L Peter–Weyl expansion on the Euler grid of ``degree``."""
    return peter_weyl_grid(L, degree).evaluate(coeffs)


def _left_blocks(rotations: FloatArray, L: int) -> list[ComplexArray]:
    return [wigner_d_stack(l, rotations) for l in range(L + 1)]


def so3_operator(
    mu: AtomicMeasure, x: ArrayLike, L: int | BandLimit, margin: int = DEFAULT_MARGIN
) -> BandLimitedOperator:
    """Galerkin matrix of π_x(μ) on the Peter–Weyl basis of degree ≤ L.

    T = Σ_g w_g M_g Π(θ_g) with Π(θ) = ⊕ D^l(θ) ⊗ I exact and M_g the
    multiplication by e(⟨ωx, v_g⟩), assembled per β slice from a 2-D FFT in
    (α, γ).  Atoms whose phase is identically 1 skip the multiplication.
    """
    band = _band(L)
    vec = np.asarray(x, dtype=float).reshape(3)
    length = float(np.linalg.norm(vec))
    eff_margin = assembly_margin(mu, length, margin)
    dim = peter_weyl_dim(band)
    d_blocks = _left_blocks(mu.rotations, band)

    moving = np.flatnonzero(mu.radii() > 0.0) if length > 0 else np.array([], dtype=np.intp)
    still = np.setdiff1d(np.arange(mu.size), moving)

    matrix = np.zeros((dim, dim), dtype=complex)
    if still.size:
        blocks = []
        for l, stack in enumerate(d_blocks):
            avg = np.einsum("n,nij->ij", mu.weights[still], stack[still])
            blocks.append(np.kron(avg, np.eye(2 * l + 1)))
        matrix += scipy.linalg.block_diag(*blocks)

    if moving.size:
        grid = peter_weyl_grid(band, 2 * band + eff_margin)
        rotated = grid.quad.rotate(vec)
        for g in moving:
            phase = np.exp(1j * _TWO_PI * (rotated @ mu.translations[g]))
            mult = grid.multiplication_matrix(phase)
            matrix += mu.weights[g] * _apply_left_rotations(mult, [d[g] for d in d_blocks])

    logger.debug(
        "so3 operator %r x=%s L=%d dim=%d margin=%d atoms=%d",
        mu.label, vec.round(6).tolist(), band, dim, eff_margin, mu.size,
    )
    return BandLimitedOperator(
        np.asarray(matrix, dtype=complex), PETER_WEYL, band, vec, eff_margin, mu.label
    )


def constant_vector(dim: int) -> ComplexArray:
    """Coefficients of the constant function 1 (index 0 in both bases)."""
    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    return e0

"""Algebra of finitely supported measures on Isom(R^3).

Convolution, inversion, symmetrisation, truncation to a translation ball,
barycentre (fixed point) and centring.  Every function is pure and returns a
new ``AtomicMeasure``.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.linalg

from domain.entities.isometry import Isometry
from domain.entities.measure import AtomicMeasure, FloatArray
from domain.errors import EmptyTruncationError, NoFixedPointError, SupportBlowupError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_SUPPORT_CAP = 1_000_000
FIXED_POINT_INVERSE_LIMIT = 1e8
FIXED_POINT_RESIDUAL = 1e-10
COMMON_FIXED_POINT_TOL = 1e-8


def _normalised(weights: FloatArray) -> FloatArray:
    return np.asarray(weights / weights.sum(), dtype=float)


def dirac(g: Isometry, label: str = "") -> AtomicMeasure:
    return AtomicMeasure.dirac(g, label)


def reverse(mu: AtomicMeasure) -> AtomicMeasure:
    """Pushforward under g ↦ g⁻¹."""
    rot_t = np.transpose(mu.rotations, (0, 2, 1))
    vec = -np.einsum("nij,nj->ni", rot_t, mu.translations)
    return AtomicMeasure(rot_t, vec, mu.weights, f"{mu.label}~" if mu.label else "")


def convolve(
    mu: AtomicMeasure, nu: AtomicMeasure, *, support_cap: int = DEFAULT_SUPPORT_CAP
) -> AtomicMeasure:
    """μ*ν: atoms g·h with weight μ(g)ν(h), duplicates merged."""
    count = mu.size * nu.size
    if count > support_cap:
        raise SupportBlowupError(
            f"convolution would create {count} atoms (cap {support_cap})",
            details={"left": mu.size, "right": nu.size, "cap": support_cap},
        )
    rot = np.einsum("aij,bjk->abik", mu.rotations, nu.rotations).reshape(count, 3, 3)
    vec = (
        mu.translations[:, None, :]
        + np.einsum("aij,bj->abi", mu.rotations, nu.translations)
    ).reshape(count, 3)
    weights = np.outer(mu.weights, nu.weights).ravel()
    label = f"{mu.label}*{nu.label}" if mu.label or nu.label else ""
    return AtomicMeasure(rot, vec, _normalised(weights), label)


def symmetrize(mu: AtomicMeasure) -> AtomicMeasure:
    """½(μ + μ̌)."""
    rev = reverse(mu)
    rot = np.concatenate([mu.rotations, rev.rotations])
    vec = np.concatenate([mu.translations, rev.translations])
    weights = 0.5 * np.concatenate([mu.weights, mu.weights])
    return AtomicMeasure(rot, vec, weights, mu.label)


def truncate_restrict(mu: AtomicMeasure, s: float) -> tuple[AtomicMeasure, float]:
    """Restrict to atoms with |v| ≤ s and renormalise.

    Returns the restricted measure and β, the discarded mass.
    """
    if not s > 0:
        raise UsageError(f"truncation radius must be positive, got {s!r}")
    keep = mu.radii() <= s
    if not np.any(keep):
        raise EmptyTruncationError(
            f"no atom has translation length <= {s}",
            details={"s": s, "min_radius": float(mu.radii().min())},
        )
    beta = float(mu.weights[~keep].sum())
    if np.all(keep):
        return mu, 0.0
    kept = AtomicMeasure(
        mu.rotations[keep],
        mu.translations[keep],
        _normalised(mu.weights[keep]),
        f"{mu.label}|s={s:g}",
    )
    return kept, beta


def fixed_point(mu: AtomicMeasure) -> FloatArray:
    """The unique a with Σ w_g g(a) = a.

    Solves (I − Σ w R) a = Σ w v directly.  Raises when ‖(I − Σ w R)⁻¹‖,
    the reciprocal of its smallest singular value, exceeds
    FIXED_POINT_INVERSE_LIMIT.
    """
    moments = mu.moments()
    system = np.eye(3) - moments.mean_rotation
    sigma_min = float(scipy.linalg.svdvals(system).min())
    inverse_norm = 1.0 / sigma_min if sigma_min > 0.0 else math.inf
    if inverse_norm > FIXED_POINT_INVERSE_LIMIT:
        raise NoFixedPointError(
            "mean rotation has eigenvalue 1; the barycentre is not unique",
            details={"inverse_norm": inverse_norm if math.isfinite(inverse_norm) else "inf",
                     "sigma_min": sigma_min},
        )
    a = np.asarray(scipy.linalg.solve(system, moments.mean_translation), dtype=float)
    residual = float(np.linalg.norm(system @ a - moments.mean_translation))
    if residual > FIXED_POINT_RESIDUAL * (1.0 + float(np.linalg.norm(a))):
        raise NoFixedPointError(
            f"fixed-point residual {residual:.3e} too large",
            details={"residual": residual, "inverse_norm": inverse_norm},
        )
    logger.debug("fixed point a=%s inverse_norm=%.3e residual=%.3e", a, inverse_norm, residual)
    return a


def center_with_offset(mu: AtomicMeasure) -> tuple[AtomicMeasure, FloatArray]:
    """δ̌_τ * μ * δ_τ with τ = (a, I), together with a."""
    a = fixed_point(mu)
    tau = Isometry.from_translation(a)
    centred = convolve(convolve(dirac(tau.inverse()), mu), dirac(tau))
    return centred.relabel(f"{mu.label}:centered" if mu.label else "centered"), a


def center(mu: AtomicMeasure) -> AtomicMeasure:
    return center_with_offset(mu)[0]


def convolution_power(
    mu: AtomicMeasure, ell: int, *, support_cap: int = DEFAULT_SUPPORT_CAP
) -> AtomicMeasure:
    """ℓ-fold convolution μ*…*μ."""
    if int(ell) != ell or ell < 1:
        raise UsageError(f"convolution power must be a positive integer, got {ell!r}")
    result = mu
    for step in range(2, int(ell) + 1):
        result = convolve(result, mu, support_cap=support_cap)
        logger.debug("convolution power %d: %d atoms", step, result.size)
    return result.relabel(f"{mu.label}^{ell}" if mu.label else f"^{ell}")


def common_fixed_point(
    mu: AtomicMeasure, tol: float = COMMON_FIXED_POINT_TOL
) -> FloatArray | None:
    """A point fixed by every atom, or None when no such point exists.

    Least-squares solve of the stacked system (R_g − I) x = −v_g; the system
    is declared consistent when its residual is at most tol·(1 + max|v|).
    """
    n = mu.size
    system = (mu.rotations - np.eye(3)).reshape(3 * n, 3)
    rhs = -mu.translations.reshape(3 * n)
    x, _, _, _ = scipy.linalg.lstsq(system, rhs)
    residual = float(np.linalg.norm(system @ x - rhs))
    scale = 1.0 + float(mu.radii().max())
    if residual <= tol * scale:
        return np.asarray(x, dtype=float)
    return None

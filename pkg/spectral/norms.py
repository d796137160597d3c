"""Operator-norm estimation for assembled matrices.

Small matrices go straight to a dense Hermitian eigensolve; larger ones use
power iteration on AᴴA from a seeded random start and fall back to the
dense path when the iteration stalls.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from domain.errors import NormNotConvergedError, UsageError
from spectral.operators import BandLimitedOperator

logger = logging.getLogger(__name__)

DENSE = "dense"
POWER = "power"

DENSE_MAX_DIM = 512
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
ACCEPT_RESIDUAL = 1e-10
CROSS_CHECK_TOL = 1e-8
_HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class NormEstimate:
    value: float
    residual: float
    iterations: int
    method: str
    cross_check_gap: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method,
            "cross_check_gap": self.cross_check_gap,
        }


def _as_matrix(a: BandLimitedOperator | ArrayLike) -> NDArray[np.complex128]:
    mat = a.matrix if isinstance(a, BandLimitedOperator) else np.asarray(a, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise UsageError(f"operator_norm needs a square matrix, got shape {mat.shape}")
    return np.asarray(mat, dtype=complex)


def _dense_norm(mat: NDArray[np.complex128]) -> NormEstimate:
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    if float(np.abs(mat - mat.conj().T).max(initial=0.0)) <= _HERMITIAN_TOL * scale:
        herm = (mat + mat.conj().T) / 2
        vals, vecs = scipy.linalg.eigh(herm)
        k = int(np.argmax(np.abs(vals)))
        vec = vecs[:, k]
        residual = float(np.linalg.norm(herm @ vec - vals[k] * vec))
        return NormEstimate(float(abs(vals[k])), residual, 0, DENSE)
    gram = mat.conj().T @ mat
    gram = (gram + gram.conj().T) / 2
    vals, vecs = scipy.linalg.eigh(gram)
    vec = vecs[:, -1]
    residual = float(np.linalg.norm(gram @ vec - vals[-1] * vec))
    return NormEstimate(math.sqrt(max(float(vals[-1]), 0.0)), residual, 0, DENSE)


def _power_norm(
    mat: NDArray[np.complex128], rng: np.random.Generator, tol: float, max_iter: int
) -> NormEstimate | None:
    n = mat.shape[0]
    vec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    vec /= np.linalg.norm(vec)
    rayleigh = 0.0
    for iteration in range(1, max_iter + 1):
        image = mat.conj().T @ (mat @ vec)
        new = float(np.real(np.vdot(vec, image)))
        size = float(np.linalg.norm(image))
        if size == 0.0:
            return NormEstimate(0.0, 0.0, iteration, POWER)
        change = abs(new - rayleigh)
        rayleigh = new
        vec = image / size
        if change <= tol * max(new, np.finfo(float).tiny):
            if change > ACCEPT_RESIDUAL:
                return None
            return NormEstimate(math.sqrt(max(new, 0.0)), change, iteration, POWER)
    return None


def operator_norm(
    a: BandLimitedOperator | ArrayLike,
    *,
    rng: np.random.Generator | None = None,
    method: str = "auto",
    dense_max_dim: int = DENSE_MAX_DIM,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    cross_check: bool = False,
) -> NormEstimate:
    """Largest singular value of a square matrix.

    ``method`` is ``auto`` (dense up to ``dense_max_dim``, power iteration
    above), ``dense`` or ``power``.  With ``cross_check`` both paths run and
    the gap between them is recorded; a gap above 1e-8 is logged and the
    dense value wins.
    """
    mat = _as_matrix(a)
    if method not in ("auto", DENSE, POWER):
        raise UsageError(f"unknown norm method {method!r}")
    use_dense = method == DENSE or (method == "auto" and mat.shape[0] <= dense_max_dim)
    generator = rng if rng is not None else np.random.default_rng(0)

    if use_dense and not cross_check:
        estimate = _dense_norm(mat)
    else:
        power = _power_norm(mat, generator, tol, max_iter)
        if power is None:
            logger.warning(
                "power iteration did not settle (dim=%d, max_iter=%d); using dense eigensolve",
                mat.shape[0], max_iter,
            )
            estimate = _dense_norm(mat)
        elif cross_check:
            dense = _dense_norm(mat)
            gap = abs(dense.value - power.value)
            if gap > CROSS_CHECK_TOL:
                logger.warning("norm cross-check gap %.3e exceeds %.0e", gap, CROSS_CHECK_TOL)
                estimate = NormEstimate(dense.value, dense.residual, power.iterations, DENSE, gap)
            else:
                estimate = NormEstimate(
                    power.value, power.residual, power.iterations, POWER, gap
                )
        else:
            estimate = power

    if not np.isfinite(estimate.value) or estimate.residual > ACCEPT_RESIDUAL * max(
        1.0, estimate.value
    ):
        raise NormNotConvergedError(
            f"norm estimate not accepted (residual {estimate.residual:.3e})",
            details=estimate.to_dict(),
        )
    return estimate


def mean_zero_norm(op: BandLimitedOperator, **kwargs: Any) -> NormEstimate:
    """Norm of the compression to functions orthogonal to constants."""
    return operator_norm(op.matrix[1:, 1:], **kwargs)

"""Reduction of a symmetric measure to a centred, compact, strongly contracting one.

    μ  ──truncate at s──▶  μ_s  ──conjugate by τ=(a, I)──▶  μ₁  ──ℓ-fold power──▶  μ₂

s is the smallest atom radius whose discarded mass β stays below α/2 (and
whose truncation still moves every point), a is the barycentre of μ_s and ℓ
the least power with (1 − α₁)^ℓ ≤ ½.  Each stage's postcondition is checked
and a violation raises ``NumericalError``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from application.parallel import map_ordered
from domain.entities.measure import AtomicMeasure
from domain.entities.reports import VerificationReport, bound_check
from domain.errors import AssumptionError, NoRotationGapError, NumericalError
from domain.group_core import (
    DEFAULT_SUPPORT_CAP,
    center_with_offset,
    common_fixed_point,
    convolution_power,
    truncate_restrict,
)
from spectral.norms import operator_norm
from spectral.operators import (
    DEFAULT_MARGIN,
    RotationGap,
    require_symmetric,
    rotation_blocks,
    rotation_gap,
    sphere_operator,
)
from utils.rng import RandomStreams

logger = logging.getLogger(__name__)

PROBE_RADII = (0.25, 0.75, 1.5)
GAPS_TOL = 1e-8
MEAN_TOL = 1e-10
POWER_TOL = 1e-10
BLOCK_IDENTITY_TOL = 1e-9
ROOT_TOL = 1e-6


@dataclass(frozen=True)
class ProbeResult:
    r: float
    norm_mu: float
    norm_truncated: float
    norm_power: float
    ell: int
    beta: float

    @property
    def root(self) -> float:
        return self.norm_power ** (1.0 / self.ell)

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "norm_mu": self.norm_mu,
            "norm_truncated": self.norm_truncated,
            "norm_power": self.norm_power,
            "root": self.root,
            "beta_adjusted_root": (1.0 - self.beta) * self.root + self.beta,
        }


@dataclass
class ReductionReport:
    label: str
    L: int
    alpha: float
    s_chosen: float
    beta: float
    alpha_truncated: float
    gaps_bound: float
    fixed_point_a: NDArray[np.float64]
    alpha_centered: float
    ell: int
    power_norm: float
    block_identity_residual: float
    mean_translation: float
    measures: dict[str, dict[str, Any]] = field(default_factory=dict)
    probes: list[ProbeResult] = field(default_factory=list)
    checks: VerificationReport = field(default_factory=lambda: VerificationReport("reduction"))

    @property
    def gap_chain(self) -> dict[str, float]:
        return {
            "alpha": self.alpha,
            "truncated_bound": (1.0 - self.alpha + self.beta) / (1.0 - self.beta),
            "power_norm": self.power_norm,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "L": self.L,
            "alpha": self.alpha,
            "s_chosen": self.s_chosen,
            "beta": self.beta,
            "alpha_truncated": self.alpha_truncated,
            "gaps_bound": self.gaps_bound,
            "fixed_point_a": self.fixed_point_a.tolist(),
            "alpha_centered": self.alpha_centered,
            "ell": self.ell,
            "power_norm": self.power_norm,
            "block_identity_residual": self.block_identity_residual,
            "mean_translation": self.mean_translation,
            "gap_chain": self.gap_chain,
            "measures": self.measures,
            "probes": [p.to_dict() for p in self.probes],
            "checks": self.checks.to_dict(),
        }


def _summary(mu: AtomicMeasure) -> dict[str, Any]:
    moments = mu.moments()
    return {
        "label": mu.label,
        "atoms": mu.size,
        "C": moments.C,
        "max_radius": moments.max_radius,
        "mean_translation": moments.mean_translation.tolist(),
    }


def minimal_power(alpha: float) -> int:
    """Least ℓ ≥ 1 with (1 − α)^ℓ ≤ ½."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha >= 0.5:
        return 1
    ell = max(1, math.ceil(math.log(0.5) / math.log1p(-alpha)))
    while (1.0 - alpha) ** ell > 0.5:
        ell += 1
    while ell > 1 and (1.0 - alpha) ** (ell - 1) <= 0.5:
        ell -= 1
    return ell


def choose_truncation(mu: AtomicMeasure, alpha: float) -> tuple[AtomicMeasure, float, float]:
    """Smallest atom radius s with β < α/2 whose restriction has no common fixed point."""
    radii = mu.radii()
    for s in np.unique(radii[radii > 0]):
        beta = float(mu.weights[radii > s].sum())
        if beta >= alpha / 2.0:
            continue
        truncated, beta = truncate_restrict(mu, float(s))
        if common_fixed_point(truncated) is None:
            return truncated, float(s), beta
        logger.debug("truncation at s=%.6g fixes a point; raising s", s)
    raise AssumptionError(
        f"no truncation radius of {mu.label!r} keeps every point moving",
        code="assumption-2",
    )


def _postcondition(report: VerificationReport, name: str, measured: float, bound: float,
                   **context: Any) -> None:
    check = report.add(bound_check(name, measured, bound, **context))
    if not check.passed:
        raise NumericalError(
            f"reduction postcondition {name!r} failed: {measured:.3e} > {bound:.3e}",
            code="postcondition",
            details=check.to_dict(),
        )


def reduction_pipeline(
    mu: AtomicMeasure,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    probe_radii: Sequence[float] = PROBE_RADII,
    probe_L: int | None = None,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    streams: RandomStreams | None = None,
    threads: int = 1,
) -> ReductionReport:
    require_symmetric(mu)
    gap: RotationGap = rotation_gap(mu, L)
    if gap.no_gap:
        raise NoRotationGapError(
            f"measure {mu.label!r} has no rotation gap up to L={L}", details=gap.to_dict()
        )
    if common_fixed_point(mu) is not None:
        raise AssumptionError(f"every atom of {mu.label!r} fixes a common point",
                              code="assumption-2")
    alpha = gap.alpha
    checks = VerificationReport("reduction")

    truncated, s, beta = choose_truncation(mu, alpha)
    _postcondition(checks, "beta-below-half-alpha", beta, alpha / 2.0 - np.finfo(float).eps,
                   s=s)
    alpha_s = rotation_gap(truncated, L).alpha
    gaps_bound = 1.0 - (1.0 - alpha + beta) / (1.0 - beta)
    _postcondition(checks, "truncated-gap", gaps_bound - alpha_s, GAPS_TOL,
                   alpha_truncated=alpha_s, gaps_bound=gaps_bound)
    logger.info("reduction %r: s=%.6g beta=%.3e alpha=%.6g alpha_s=%.6g",
                mu.label, s, beta, alpha, alpha_s)

    centered, a = center_with_offset(truncated)
    mean = float(np.linalg.norm(centered.moments().mean_translation))
    alpha_1 = rotation_gap(centered, L).alpha
    ell = minimal_power(alpha_1)
    powered = convolution_power(centered, ell, support_cap=support_cap)
    logger.info("reduction %r: a=%s alpha_1=%.6g ell=%d -> %d atoms",
                mu.label, np.round(a, 9).tolist(), alpha_1, ell, powered.size)

    blocks_1 = rotation_blocks(centered, L)
    blocks_2 = rotation_blocks(powered, L)
    residual = max(
        float(np.abs(b2 - np.linalg.matrix_power(b1, ell)).max())
        for b1, b2 in zip(blocks_1.blocks, blocks_2.blocks, strict=True)
    )
    power_norm = float(blocks_2.norms()[1:].max())
    mean_2 = float(np.linalg.norm(powered.moments().mean_translation))
    scale = max(1.0, powered.moments().max_radius)

    truncated_scale = max(1.0, truncated.moments().max_radius)
    _postcondition(checks, "centered-mean", mean, MEAN_TOL * truncated_scale)
    _postcondition(checks, "power-mean", mean_2, MEAN_TOL * scale)
    _postcondition(checks, "power-norm", power_norm, 0.5 + POWER_TOL, ell=ell)
    _postcondition(checks, "block-identity", residual, BLOCK_IDENTITY_TOL, ell=ell)

    band = probe_L if probe_L is not None else L
    rs = streams or RandomStreams(0)

    def probe(index: int, r: float) -> ProbeResult:
        rng = rs.generator("reduction-probe", index)
        norm_mu, norm_s, norm_2 = (
            operator_norm(sphere_operator(m, r, band, margin), rng=rng).value
            for m in (mu, truncated, powered)
        )
        return ProbeResult(float(r), norm_mu, norm_s, norm_2, ell=ell, beta=beta)

    probes = map_ordered(probe, list(probe_radii), threads)
    for p in probes:
        checks.add(bound_check("norm-root-truncated", p.norm_truncated - p.root, ROOT_TOL,
                               informational=True, r=p.r))
        checks.add(bound_check("norm-root", p.norm_mu - ((1.0 - beta) * p.root + beta), ROOT_TOL,
                               informational=True, r=p.r))

    return ReductionReport(
        label=mu.label,
        L=L,
        alpha=alpha,
        s_chosen=s,
        beta=beta,
        alpha_truncated=alpha_s,
        gaps_bound=gaps_bound,
        fixed_point_a=a,
        alpha_centered=alpha_1,
        ell=ell,
        power_norm=power_norm,
        block_identity_residual=residual,
        mean_translation=mean,
        measures={
            "mu": _summary(mu),
            "mu_s": _summary(truncated),
            "mu_1": _summary(centered),
            "mu_2": _summary(powered),
        },
        probes=probes,
        checks=checks,
    )

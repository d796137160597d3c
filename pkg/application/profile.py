"""Gap profiles r ↦ 1 − ‖S_r(μ)‖ and the constants fitted to them.

A profile evaluates the sphere-model operator on a radius grid (optionally
the SO(3) operator at x = r·e₁ alongside), then summarises it by the
uniform constant c₀ with ‖S_r‖ ≤ 1 − c₀·min(r², 1) on the grid and by the
small-r decay exponent.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from application.parallel import map_ordered
from domain.entities.measure import AtomicMeasure
from domain.errors import AssumptionError, UsageError
from domain.group_core import common_fixed_point
from spectral.norms import NormEstimate, operator_norm
from spectral.operators import (
    DEFAULT_MARGIN,
    NO_GAP_THRESHOLD,
    RotationGap,
    rotation_gap,
    so3_operator,
    sphere_operator,
)
from utils.rng import RandomStreams

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

CSV_HEADER = ("r", "norm", "one_minus_norm", "L", "margin", "method", "residual")
SMALL_R_MAX = 0.5
STABILITY_TOL = 1e-4


# ── Preflight ────────────────────────────────────────────────────────────────


def check_assumptions(mu: AtomicMeasure, L: int) -> RotationGap:
    """Rotation gap at L and absence of a common fixed point, or raise.

    Raises AssumptionError with code ``assumption-2`` when every atom fixes
    one point, checked first, and ``assumption-1`` when the rotation blocks
    show no gap.
    """
    point = common_fixed_point(mu)
    if point is not None:
        raise AssumptionError(
            f"every atom of {mu.label!r} fixes the point {np.round(point, 12).tolist()}",
            code="assumption-2",
            details={"fixed_point": point.tolist()},
        )
    gap = rotation_gap(mu, L)
    if gap.no_gap:
        raise AssumptionError(
            f"measure {mu.label!r} has no rotation gap up to L={L} (alpha={gap.alpha:.3e})",
            code="assumption-1",
            details=gap.to_dict(),
        )
    return gap


def validate_radius_grid(radii: ArrayLike) -> FloatArray:
    grid = np.asarray(radii, dtype=float).ravel()
    if grid.size == 0:
        raise UsageError("radius grid is empty")
    if not np.all(np.isfinite(grid)) or np.any(grid < 0):
        raise UsageError("radius grid must hold finite nonnegative values")
    if np.any(np.diff(grid) <= 0):
        raise UsageError("radius grid must be strictly increasing")
    if grid[0] != 0.0:
        raise UsageError("radius grid must start at 0")
    if grid[-1] < 1.0:
        raise UsageError("radius grid must reach r >= 1")
    return grid


# ── Fitted constants ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class C0Fit:
    """min over r > 0 of (1 − ‖S_r‖)/min(r², 1); ``radius`` attains it."""

    value: float
    no_gap: bool
    radius: float | None

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "no_gap": self.no_gap, "radius": self.radius}


def fit_c0(radii: ArrayLike, norms: ArrayLike) -> C0Fit:
    r = np.asarray(radii, dtype=float)
    n = np.asarray(norms, dtype=float)
    positive = r > 0
    if not np.any(positive):
        return C0Fit(0.0, True, None)
    ratios = (1.0 - n[positive]) / np.minimum(r[positive] ** 2, 1.0)
    k = int(np.argmin(ratios))
    radius = float(r[positive][k])
    if ratios[k] <= NO_GAP_THRESHOLD:
        return C0Fit(0.0, True, radius)
    return C0Fit(float(ratios[k]), False, radius)


def small_r_exponent(
    radii: ArrayLike, norms: ArrayLike, r_max: float = SMALL_R_MAX
) -> float | None:
    """Least-squares slope of log(1 − ‖S_r‖) against log r for 0 < r ≤ r_max."""
    r = np.asarray(radii, dtype=float)
    gap = 1.0 - np.asarray(norms, dtype=float)
    use = (r > 0) & (r <= r_max) & (gap > 0)
    if np.count_nonzero(use) < 2:
        return None
    slope, _ = np.polyfit(np.log(r[use]), np.log(gap[use]), 1)
    return float(slope)


def large_radius_ratio(radii: ArrayLike, norms: ArrayLike) -> float | None:
    """max (1 − ‖S_{r_y}‖)/(1 − ‖S_{r_x}‖) over grid pairs with r_x ≥ r_y/2.

    Reported only; None when no pair has a positive denominator.
    """
    r = np.asarray(radii, dtype=float)
    gap = 1.0 - np.asarray(norms, dtype=float)
    use = (r > 0) & (gap > NO_GAP_THRESHOLD)
    r, gap = r[use], gap[use]
    if r.size == 0:
        return None
    pairs = r[:, None] >= r[None, :] / 2.0  # rows: x, columns: y
    ratios = np.where(pairs, gap[None, :] / gap[:, None], -np.inf)
    return float(ratios.max())


# ── Profile ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ProfilePoint:
    r: float
    norm: NormEstimate
    margin: int
    so3_norm: NormEstimate | None = None

    @property
    def one_minus_norm(self) -> float:
        return 1.0 - self.norm.value

    def csv_row(self, L: int) -> tuple[Any, ...]:
        return (
            self.r,
            self.norm.value,
            self.one_minus_norm,
            L,
            self.margin,
            self.norm.method,
            self.norm.residual,
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "r": self.r,
            "norm": self.norm.to_dict(),
            "one_minus_norm": self.one_minus_norm,
            "margin": self.margin,
        }
        if self.so3_norm is not None:
            out["so3_norm"] = self.so3_norm.to_dict()
        return out


@dataclass(frozen=True)
class GapProfile:
    label: str
    L: int
    alpha: float
    points: tuple[ProfilePoint, ...]
    so3_L: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def radii(self) -> FloatArray:
        return np.array([p.r for p in self.points])

    @property
    def norms(self) -> FloatArray:
        return np.array([p.norm.value for p in self.points])

    @property
    def c0(self) -> C0Fit:
        return fit_c0(self.radii, self.norms)

    @property
    def exponent(self) -> float | None:
        return small_r_exponent(self.radii, self.norms)

    def csv_rows(self) -> list[tuple[Any, ...]]:
        return [p.csv_row(self.L) for p in self.points]

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "L": self.L,
            "so3_L": self.so3_L,
            "alpha": self.alpha,
            "c0": self.c0.to_dict(),
            "small_r_exponent": self.exponent,
            "large_radius_ratio": large_radius_ratio(self.radii, self.norms),
            "points": [p.to_dict() for p in self.points],
            **self.extra,
        }


def _sphere_norm(
    mu: AtomicMeasure,
    r: float,
    L: int,
    margin: int,
    rng: np.random.Generator,
    norm_options: Mapping[str, Any],
) -> tuple[NormEstimate, int]:
    op = sphere_operator(mu, r, L, margin)
    return operator_norm(op, rng=rng, **norm_options), op.assembly_margin


def gap_profile(
    mu: AtomicMeasure,
    r_grid: Sequence[float] | ArrayLike,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    include_so3: bool = False,
    so3_L: int | None = None,
    streams: RandomStreams | None = None,
    threads: int = 1,
    norm_options: Mapping[str, Any] | None = None,
) -> GapProfile:
    """‖S_r(μ)‖ over the grid, after the two preflight assumptions pass."""
    grid = validate_radius_grid(r_grid)
    gap = check_assumptions(mu, L)
    rs = streams or RandomStreams(0)
    options = dict(norm_options or {})
    band3 = so3_L if so3_L is not None else min(L, 8)

    def evaluate(index: int, r: float) -> ProfilePoint:
        norm, used = _sphere_norm(mu, r, L, margin, rs.generator("profile", index), options)
        so3 = None
        if include_so3:
            op = so3_operator(mu, (r, 0.0, 0.0), band3, margin)
            so3 = operator_norm(op, rng=rs.generator("profile-so3", index), **options)
        logger.debug("profile %r r=%.4g norm=%.12f", mu.label, r, norm.value)
        return ProfilePoint(float(r), norm, used, so3)

    points = map_ordered(evaluate, list(grid), threads)
    profile = GapProfile(
        mu.label, L, gap.alpha, tuple(points), band3 if include_so3 else None
    )
    c0 = profile.c0
    logger.info(
        "gap profile %r: %d radii, L=%d, alpha=%.6g, c0=%.6g%s",
        mu.label, len(points), L, gap.alpha, c0.value, " (no gap)" if c0.no_gap else "",
    )
    return profile


# ── Truncation stability ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class TruncationStability:
    radii: FloatArray
    low: FloatArray
    high: FloatArray
    L_low: int
    L_high: int

    @property
    def differences(self) -> FloatArray:
        return np.asarray(np.abs(self.high - self.low), dtype=float)

    @property
    def max_difference(self) -> float:
        return float(self.differences.max(initial=0.0))

    @property
    def stable(self) -> bool:
        return self.max_difference <= STABILITY_TOL

    def c0_shift(self) -> float | None:
        """Relative change of c₀ between the two band limits."""
        low = fit_c0(self.radii, self.low)
        high = fit_c0(self.radii, self.high)
        if low.no_gap or high.no_gap:
            return None
        return abs(high.value - low.value) / low.value

    def to_dict(self) -> dict[str, Any]:
        return {
            "L_low": self.L_low,
            "L_high": self.L_high,
            "radii": self.radii.tolist(),
            "norms_low": self.low.tolist(),
            "norms_high": self.high.tolist(),
            "differences": self.differences.tolist(),
            "max_difference": self.max_difference,
            "stable": self.stable,
            "c0_low": fit_c0(self.radii, self.low).to_dict(),
            "c0_high": fit_c0(self.radii, self.high).to_dict(),
            "c0_relative_shift": self.c0_shift(),
        }


def truncation_stability(
    mu: AtomicMeasure,
    radii: Sequence[float] | ArrayLike,
    L_low: int,
    L_high: int,
    *,
    margin: int = DEFAULT_MARGIN,
    streams: RandomStreams | None = None,
    threads: int = 1,
    norm_options: Mapping[str, Any] | None = None,
) -> TruncationStability:
    """‖S_r‖ at two band limits; differences above 1e-4 are logged, not raised."""
    if L_high <= L_low:
        raise UsageError(f"L_high ({L_high}) must exceed L_low ({L_low})")
    grid = np.asarray(radii, dtype=float).ravel()
    rs = streams or RandomStreams(0)
    options = dict(norm_options or {})

    def evaluate(index: int, r: float) -> tuple[float, float]:
        low, _ = _sphere_norm(mu, r, L_low, margin, rs.generator("stab-low", index), options)
        high, _ = _sphere_norm(mu, r, L_high, margin, rs.generator("stab-high", index), options)
        return low.value, high.value

    pairs = map_ordered(evaluate, list(grid), threads)
    report = TruncationStability(
        grid,
        np.array([p[0] for p in pairs]),
        np.array([p[1] for p in pairs]),
        L_low,
        L_high,
    )
    if not report.stable:
        worst = int(np.argmax(report.differences))
        logger.warning(
            "truncation unstable for %r: |dnorm|=%.3e at r=%.4g between L=%d and L=%d",
            mu.label, report.max_difference, grid[worst], L_low, L_high,
        )
    return report


def min_ratio_floor(profile: GapProfile) -> float:
    """Smallest 1 − ‖S_r‖ over grid points with r ≥ 1 (math.inf when none)."""
    tail = [p.one_minus_norm for p in profile.points if p.r >= 1.0]
    return min(tail) if tail else math.inf


def so3_gap_fit(
    mu: AtomicMeasure,
    radii: Sequence[float] | ArrayLike,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    streams: RandomStreams | None = None,
    threads: int = 1,
    norm_options: Mapping[str, Any] | None = None,
) -> C0Fit:
    """c₀ fitted to ‖T_x‖ at x = r·e₁ over ``radii``.

    ‖T_x‖ depends on |x| only, and grows with L, so the fit at a band limit
    at least the one a caller checks against is a valid lower-bound constant.
    """
    grid = np.unique(np.asarray(radii, dtype=float).ravel())
    if grid.size == 0 or np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise UsageError("c0 radius grid must hold finite nonnegative values")
    rs = streams or RandomStreams(0)
    options = dict(norm_options or {})

    def evaluate(index: int, r: float) -> float:
        op = so3_operator(mu, (r, 0.0, 0.0), L, margin)
        return operator_norm(op, rng=rs.generator("so3-c0", index), **options).value

    norms = map_ordered(evaluate, list(grid), threads)
    fit = fit_c0(grid, norms)
    logger.info("SO(3) gap fit for %r at L=%d: c0=%.6g (r=%s)", mu.label, L, fit.value, fit.radius)
    return fit

"""Local-spectral-gap Rayleigh quotient for finitely many isometries of R³.

For a region B and generators F the quotient

    Σ_{g∈F} ‖g·φ − φ‖²_{2,B} / ‖φ‖²_{2,B},   ∫_B φ = 0,   (g·φ)(y) = φ(g⁻¹y)

is minimised over a tensor trigonometric space on a box B′ that contains B
and every g⁻¹B.  The minimum λ gives κ = (|F|/λ)^{1/2}: no function in the
space violates ‖φ‖_B ≤ κ·max_g ‖g·φ − φ‖_B.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from application.parallel import map_ordered
from domain.entities.isometry import Isometry
from domain.errors import MassMatrixSingularError, RegionEscapesDomainError, UsageError
from spectral.quadrature import ball_quadrature, box_quadrature

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

BALL = "ball"
BOX = "box"

COND_LIMIT = 1e12
MASS_RANK_TOL = 1e-7
DOMAIN_TOL = 1e-12
ZERO_LAMBDA = 1e-12
REFINE_FACTOR = 1.5
_CHUNK = 1024
_TWO_PI = 2.0 * math.pi


# ── Regions ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Region:
    """A ball (center, radius) or an axis-aligned box (lower, upper)."""

    kind: str
    center: FloatArray
    radius: float = 0.0
    lower: FloatArray = field(default_factory=lambda: np.zeros(3))
    upper: FloatArray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        if self.kind == BALL:
            if not self.radius > 0:
                raise UsageError(f"ball radius must be positive, got {self.radius}")
        elif self.kind == BOX:
            if np.any(self.upper <= self.lower):
                raise UsageError("box must have upper > lower on every axis")
        else:
            raise UsageError(f"unknown region kind {self.kind!r}")

    @classmethod
    def ball(cls, center: ArrayLike, radius: float) -> Region:
        c = np.asarray(center, dtype=float).reshape(3)
        return cls(BALL, c, float(radius), c - radius, c + radius)

    @classmethod
    def box(cls, lower: ArrayLike, upper: ArrayLike) -> Region:
        lo = np.asarray(lower, dtype=float).reshape(3)
        hi = np.asarray(upper, dtype=float).reshape(3)
        return cls(BOX, (lo + hi) / 2.0, 0.0, lo, hi)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Region:
        kind = data.get("kind", data.get("type"))
        if kind == BALL:
            return cls.ball(data.get("center", (0.0, 0.0, 0.0)), float(data["radius"]))
        if kind == BOX:
            return cls.box(data["lower"], data["upper"])
        raise UsageError(f"unknown region kind {kind!r}")

    @property
    def volume(self) -> float:
        if self.kind == BALL:
            return 4.0 / 3.0 * math.pi * self.radius**3
        return float(np.prod(self.upper - self.lower))

    def contains(self, points: ArrayLike, tol: float = 0.0) -> NDArray[np.bool_]:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if self.kind == BALL:
            return np.asarray(np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol)
        return np.asarray(np.all((pts >= self.lower - tol) & (pts <= self.upper + tol), axis=1))

    def preimage_bounds(self, g: Isometry) -> tuple[FloatArray, FloatArray]:
        """Bounding box of g⁻¹B."""
        inv = g.inverse()
        if self.kind == BALL:
            c = inv.apply(self.center)
            return c - self.radius, c + self.radius
        corners = np.array(
            [[x, y, z] for x in (self.lower[0], self.upper[0])
             for y in (self.lower[1], self.upper[1])
             for z in (self.lower[2], self.upper[2])]
        )
        moved = inv.apply(corners)
        return moved.min(axis=0), moved.max(axis=0)

    def quadrature(self, bandwidth: float) -> tuple[FloatArray, FloatArray]:
        if self.kind == BALL:
            return ball_quadrature(self.center, self.radius, bandwidth)
        return box_quadrature(self.lower, self.upper, bandwidth)

    def grid(self, n: int) -> FloatArray:
        """n³ grid over the bounding box, restricted to the region."""
        axes = [np.linspace(self.lower[a], self.upper[a], n) for a in range(3)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        return pts[self.contains(pts)]

    def to_dict(self) -> dict[str, Any]:
        if self.kind == BALL:
            return {"kind": BALL, "center": self.center.tolist(), "radius": self.radius}
        return {"kind": BOX, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


def enclosing_box(
    generators: Sequence[Isometry], region: Region
) -> tuple[FloatArray, FloatArray]:
    """Tight box B′ around B and every g⁻¹B."""
    lows = [region.lower]
    highs = [region.upper]
    for g in generators:
        lo, hi = region.preimage_bounds(g)
        lows.append(lo)
        highs.append(hi)
    return np.min(lows, axis=0), np.max(highs, axis=0)


# ── Trigonometric basis ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class TrigBasis:
    """exp(2πi⟨k, (y − lower)/P⟩) for k ∈ {−N..N}³, P = upper − lower; k_z runs fastest."""

    lower: FloatArray
    upper: FloatArray
    N: int

    @property
    def periods(self) -> FloatArray:
        return np.asarray(self.upper - self.lower, dtype=float)

    @property
    def dim(self) -> int:
        return (2 * self.N + 1) ** 3

    @property
    def constant_index(self) -> int:
        side = 2 * self.N + 1
        return self.N * side * side + self.N * side + self.N

    def frequencies(self) -> NDArray[np.intp]:
        k = np.arange(-self.N, self.N + 1)
        return np.stack(np.meshgrid(k, k, k, indexing="ij"), axis=-1).reshape(-1, 3)

    def bandwidth(self, N: int | None = None) -> float:
        """Largest |ξ| among products conj(b_i)·b_j, in radians per unit length."""
        cap = self.N if N is None else N
        return _TWO_PI * 2 * cap * float(np.sqrt(np.sum(1.0 / self.periods**2)))

    def values(self, points: ArrayLike) -> ComplexArray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        u = (pts - self.lower) / self.periods
        k = np.arange(-self.N, self.N + 1)
        phases = np.exp(1j * _TWO_PI * u[:, :, None] * k[None, None, :])
        table = np.einsum("pa,pb,pc->pabc", phases[:, 0], phases[:, 1], phases[:, 2])
        return np.asarray(table.reshape(len(pts), self.dim), dtype=complex)

    def evaluate(self, coeffs: ArrayLike, points: ArrayLike) -> ComplexArray:
        return np.asarray(self.values(points) @ np.asarray(coeffs, dtype=complex))


# ── Problem assembly ─────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class LSGProblem:
    generators: tuple[Isometry, ...]
    region: Region
    basis: TrigBasis
    A: ComplexArray
    M: ComplexArray
    m: ComplexArray
    quadrature_N: int
    quadrature_points: int
    label: str = ""

    @property
    def N(self) -> int:
        return self.basis.N

    @property
    def dim(self) -> int:
        return self.basis.dim

    def header(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "region": self.region.to_dict(),
            "domain": {"lower": self.basis.lower.tolist(), "upper": self.basis.upper.tolist()},
            "N": self.N,
            "dim": self.dim,
            "generators": len(self.generators),
            "quadrature_N": self.quadrature_N,
            "quadrature_points": self.quadrature_points,
        }


def _check_domain(
    generators: Sequence[Isometry], region: Region, lower: FloatArray, upper: FloatArray
) -> None:
    for name, (lo, hi) in [("B", (region.lower, region.upper))] + [
        (f"g{i}^-1 B", region.preimage_bounds(g)) for i, g in enumerate(generators)
    ]:
        if np.any(lo < lower - DOMAIN_TOL) or np.any(hi > upper + DOMAIN_TOL):
            raise RegionEscapesDomainError(
                f"{name} is not contained in the basis domain",
                details={"set": name, "lower": lo.tolist(), "upper": hi.tolist(),
                         "domain_lower": lower.tolist(), "domain_upper": upper.tolist()},
            )


def _hermitian(mat: ComplexArray) -> ComplexArray:
    return np.asarray((mat + mat.conj().T) / 2.0, dtype=complex)


def assemble_problem(
    generators: Sequence[Isometry],
    region: Region,
    N: int,
    *,
    domain: tuple[ArrayLike, ArrayLike] | None = None,
    quadrature_N: int | None = None,
    threads: int = 1,
    label: str = "",
) -> LSGProblem:
    """Mass matrix M, Dirichlet form A and mean functional m on B.

    ``domain`` fixes B′ (it must contain B and every g⁻¹B); by default B′ is
    the tight enclosing box.  ``quadrature_N`` sizes the quadrature for a
    larger basis, so problems for several N can share one rule.
    """
    gens = tuple(generators)
    if not gens:
        raise UsageError("the generator set is empty")
    if int(N) != N or N < 0:
        raise UsageError(f"frequency cap N must be a nonnegative integer, got {N!r}")
    if domain is None:
        lower, upper = enclosing_box(gens, region)
    else:
        lower = np.asarray(domain[0], dtype=float).reshape(3)
        upper = np.asarray(domain[1], dtype=float).reshape(3)
        if np.any(upper <= lower):
            raise UsageError("basis domain must have upper > lower on every axis")
        _check_domain(gens, region, lower, upper)
    basis = TrigBasis(lower, upper, int(N))
    q_n = max(int(N), quadrature_N or 0)
    points, weights = region.quadrature(basis.bandwidth(q_n))

    def chunk(_: int, start: int) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
        pts = points[start:start + _CHUNK]
        w = weights[start:start + _CHUNK]
        base = basis.values(pts)
        mass = base.conj().T @ (w[:, None] * base)
        form = np.zeros_like(mass)
        for g in gens:
            diff = basis.values(g.inverse().apply(pts)) - base
            form += diff.conj().T @ (w[:, None] * diff)
        return mass, form, base.T @ w

    parts = map_ordered(chunk, list(range(0, len(points), _CHUNK)), threads)
    M = _hermitian(sum((p[0] for p in parts), np.zeros((basis.dim, basis.dim), dtype=complex)))
    A = _hermitian(sum((p[1] for p in parts), np.zeros((basis.dim, basis.dim), dtype=complex)))
    m = np.asarray(sum((p[2] for p in parts), np.zeros(basis.dim, dtype=complex)))
    logger.debug(
        "lsg problem N=%d dim=%d generators=%d quadrature=%d points",
        N, basis.dim, len(gens), len(points),
    )
    return LSGProblem(gens, region, basis, A, M, m, q_n, len(points), label)


# ── Estimate ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class LSGEstimate:
    lambda_min: float
    kappa_bound: float
    witness: ComplexArray
    generators: int
    N: int
    mass_condition: float
    rank_dropped: int = 0
    retained_condition: float = 1.0

    @property
    def no_gap(self) -> bool:
        return math.isinf(self.kappa_bound)

    def to_dict(self, problem: LSGProblem | None = None) -> dict[str, Any]:
        out: dict[str, Any] = {
            "lambda_min": self.lambda_min,
            "kappa_bound": self.kappa_bound,
            "no_gap": self.no_gap,
            "generators": self.generators,
            "N": self.N,
            "mass_condition": self.mass_condition if math.isfinite(self.mass_condition) else None,
            "rank_dropped": self.rank_dropped,
            "retained_condition": self.retained_condition,
            "statement": "no violation witness found below kappa_bound in this test space",
            "witness": {"re": self.witness.real.tolist(), "im": self.witness.imag.tolist()},
        }
        if problem is not None:
            out["witness"]["frequencies"] = problem.basis.frequencies().tolist()
        return out


def mass_condition(M: ComplexArray) -> float:
    vals = scipy.linalg.eigvalsh(M)
    return float(vals[-1] / vals[0]) if vals[0] > 0 else math.inf


def rayleigh_quotient(problem: LSGProblem, coefficients: ArrayLike) -> float:
    """(c*Ac) / (c*Mc) for a coefficient vector c."""
    c = np.asarray(coefficients, dtype=complex)
    return float(np.real(c.conj() @ problem.A @ c) / np.real(c.conj() @ problem.M @ c))


def _singular(message: str, problem: LSGProblem, cond: float) -> MassMatrixSingularError:
    return MassMatrixSingularError(
        message,
        details={"condition_number": cond if math.isfinite(cond) else "inf",
                 "N": problem.N, "dim": problem.dim},
    )


def estimate_kappa(
    problem: LSGProblem,
    *,
    cond_limit: float = COND_LIMIT,
    rank_tol: float = MASS_RANK_TOL,
) -> LSGEstimate:
    """Smallest generalised eigenvalue of (A, M) on {c : mᵀc = 0}.

    The constrained mass matrix is diagonalised and directions with
    eigenvalue ≤ rank_tol·max are dropped; the pencil is solved in the
    M-orthonormal basis of what remains, whose condition number must not
    exceed cond_limit.  With rank_tol = 0 nothing is dropped and the full
    condition number of M is held to cond_limit instead.
    """
    cond = mass_condition(problem.M)
    if rank_tol <= 0.0 and cond > cond_limit:
        raise _singular(f"mass matrix condition number {cond:.3e} exceeds {cond_limit:.0e}",
                        problem, cond)
    Q = scipy.linalg.null_space(problem.m[None, :])
    Ar = _hermitian(Q.conj().T @ problem.A @ Q)
    Mr = _hermitian(Q.conj().T @ problem.M @ Q)
    mu, U = scipy.linalg.eigh(Mr)
    if mu[-1] <= 0.0:
        raise _singular("constrained mass matrix has no positive direction", problem, cond)
    keep = mu > max(rank_tol, 0.0) * mu[-1]
    retained = float(mu[-1] / mu[keep][0])
    if retained > cond_limit:
        raise _singular(f"retained mass condition number {retained:.3e} exceeds "
                        f"{cond_limit:.0e}", problem, cond)
    W = U[:, keep] / np.sqrt(mu[keep])
    _, vecs = scipy.linalg.eigh(_hermitian(W.conj().T @ Ar @ W), subset_by_index=[0, 0])
    witness = np.asarray(Q @ (W @ vecs[:, 0]), dtype=complex)
    witness /= math.sqrt(float(np.real(witness.conj() @ problem.M @ witness)))
    lam = max(rayleigh_quotient(problem, witness), 0.0)
    dropped = int(np.count_nonzero(~keep))
    count = len(problem.generators)
    kappa = math.sqrt(count / lam) if lam > ZERO_LAMBDA else math.inf
    if dropped:
        logger.info("lsg %r N=%d: dropped %d of %d mass directions below %.0e",
                    problem.label, problem.N, dropped, len(mu), rank_tol)
    logger.info(
        "lsg %r N=%d: lambda_min=%.6e kappa_bound=%s (cond M %.2e, retained %.2e)",
        problem.label, problem.N, lam, f"{kappa:.6g}", cond, retained,
    )
    return LSGEstimate(lam, kappa, witness, count, problem.N, cond, dropped, retained)


# ── Independent re-evaluation ────────────────────────────────────────────────


@dataclass(frozen=True)
class WitnessResiduals:
    norm_sq: float
    mean: complex
    dirichlet: float
    lambda_min: float

    @property
    def norm_residual(self) -> float:
        return abs(self.norm_sq - 1.0)

    @property
    def mean_residual(self) -> float:
        return abs(self.mean)

    @property
    def lambda_residual(self) -> float:
        return abs(self.dirichlet - self.lambda_min)

    def to_dict(self) -> dict[str, Any]:
        return {
            "norm_sq": self.norm_sq,
            "mean": [self.mean.real, self.mean.imag],
            "dirichlet": self.dirichlet,
            "norm_residual": self.norm_residual,
            "mean_residual": self.mean_residual,
            "lambda_residual": self.lambda_residual,
        }


def witness_residuals(
    problem: LSGProblem, estimate: LSGEstimate, refine: float = REFINE_FACTOR
) -> WitnessResiduals:
    """‖φ‖², ∫φ and Σ_g‖g·φ − φ‖² on B with a finer quadrature than assembly."""
    basis = problem.basis
    points, weights = problem.region.quadrature(refine * basis.bandwidth(problem.quadrature_N))
    norm_sq = 0.0
    mean = 0j
    dirichlet = 0.0
    for start in range(0, len(points), _CHUNK):
        pts = points[start:start + _CHUNK]
        w = weights[start:start + _CHUNK]
        phi = basis.evaluate(estimate.witness, pts)
        norm_sq += float(w @ np.abs(phi) ** 2)
        mean += complex(w @ phi)
        for g in problem.generators:
            moved = basis.evaluate(estimate.witness, g.inverse().apply(pts))
            dirichlet += float(w @ np.abs(moved - phi) ** 2)
    return WitnessResiduals(norm_sq, mean, dirichlet, estimate.lambda_min)


def sample_witness(
    problem: LSGProblem, estimate: LSGEstimate, n: int
) -> tuple[FloatArray, ComplexArray]:
    """Witness values on the points of an n³ grid that lie in B."""
    if n < 2:
        raise UsageError(f"sampling grid needs n >= 2, got {n}")
    points = problem.region.grid(n)
    return points, problem.basis.evaluate(estimate.witness, points)


# ── Trends and comparisons ───────────────────────────────────────────────────


@dataclass(frozen=True)
class TrendPoint:
    N: int
    lambda_min: float
    kappa_bound: float
    rank_dropped: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"N": self.N, "lambda_min": self.lambda_min, "kappa_bound": self.kappa_bound,
                "rank_dropped": self.rank_dropped}


def kappa_trend(
    generators: Sequence[Isometry],
    region: Region,
    Ns: Sequence[int],
    *,
    threads: int = 1,
    cond_limit: float = COND_LIMIT,
    rank_tol: float = MASS_RANK_TOL,
) -> list[TrendPoint]:
    """λ_min for nested test spaces on one domain and one quadrature rule."""
    if not Ns:
        raise UsageError("kappa_trend needs at least one N")
    domain = enclosing_box(generators, region)
    q_n = max(Ns)
    trend = []
    for N in sorted(Ns):
        problem = assemble_problem(generators, region, N, domain=domain, quadrature_N=q_n,
                                   threads=threads)
        est = estimate_kappa(problem, cond_limit=cond_limit, rank_tol=rank_tol)
        trend.append(TrendPoint(N, est.lambda_min, est.kappa_bound, est.rank_dropped))
    for prev, cur in zip(trend, trend[1:], strict=False):
        if cur.lambda_min > prev.lambda_min + 1e-10:
            logger.warning(
                "lambda_min rose from %.6e (N=%d) to %.6e (N=%d)",
                prev.lambda_min, prev.N, cur.lambda_min, cur.N,
            )
    return trend


@dataclass(frozen=True)
class RegionComparison:
    first: Region
    second: Region
    kappa_first: float
    kappa_second: float

    @property
    def ratio(self) -> float | None:
        if math.isinf(self.kappa_first) or math.isinf(self.kappa_second):
            return None
        return self.kappa_second / self.kappa_first

    def to_dict(self) -> dict[str, Any]:
        return {
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "kappa_first": self.kappa_first,
            "kappa_second": self.kappa_second,
            "ratio": self.ratio,
        }


def compare_regions(
    generators: Sequence[Isometry],
    first: Region,
    second: Region,
    N: int,
    *,
    threads: int = 1,
    cond_limit: float = COND_LIMIT,
    rank_tol: float = MASS_RANK_TOL,
) -> RegionComparison:
    """kappa_bound for two regions with the same generators and N; reported only."""
    kappas = [
        estimate_kappa(
            assemble_problem(generators, region, N, threads=threads),
            cond_limit=cond_limit, rank_tol=rank_tol,
        ).kappa_bound
        for region in (first, second)
    ]
    return RegionComparison(first, second, kappas[0], kappas[1])

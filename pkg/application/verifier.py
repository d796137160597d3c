"""Numerical checks of the norm inequalities for averaging operators.

Every check assembles the relevant operators at a fixed band limit and
returns a ``VerificationReport``: one ``CheckResult`` per inequality and grid
point, with the measured value, the bound and the slack.  Preconditions that
fail raise; inequalities that fail are recorded, never raised.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

from application.parallel import map_ordered
from domain.entities.measure import AtomicMeasure
from domain.entities.reports import VerificationReport, bound_check, info
from domain.errors import NotCenteredError, PreflightError, RadiiDifferError, UsageError
from domain.group_core import DEFAULT_SUPPORT_CAP, convolve, reverse
from spectral.harmonics import bessel_j
from spectral.norms import mean_zero_norm, operator_norm
from spectral.operators import (
    DEFAULT_MARGIN,
    constant_vector,
    peter_weyl_dim,
    peter_weyl_grid,
    require_symmetric,
    right_regular,
    rotate_left,
    so3_operator,
    sphere_operator,
)
from utils.rng import RandomStreams

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

RADIUS_TOL = 1e-10
CONJUGATION_TOL = 1e-8
NORM_MATCH_TOL = 1e-6
DOMINATION_TOL = 1e-6
INEQUALITY_TOL = 1e-8
ORACLE_TOL = 1e-6
CENTERED_TOL = 1e-8
IDENTITY_TOL = 1e-9
LOWER_BOUND_TOL = 1e-6

_TWO_PI = 2.0 * math.pi
_PI2 = math.pi**2
_PHI_BATCH = 16


def _vector(x: ArrayLike) -> FloatArray:
    vec = np.asarray(x, dtype=float).reshape(-1)
    if vec.shape != (3,):
        raise UsageError(f"expected a 3-vector, got shape {vec.shape}")
    return vec


def _x_grid(x_grid: Sequence[ArrayLike] | ArrayLike) -> FloatArray:
    grid = np.asarray(x_grid, dtype=float).reshape(-1, 3)
    if grid.shape[0] == 0:
        raise UsageError("x grid is empty")
    return grid


def aligning_rotation(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """A rotation h with h·a = b for |a| = |b|."""
    va, vb = _vector(a), _vector(b)
    if np.linalg.norm(va) == 0.0:
        return np.eye(3)
    rot, _ = Rotation.align_vectors(vb[None], va[None])
    return np.asarray(rot.as_matrix(), dtype=float)


# ── Radial invariance ────────────────────────────────────────────────────────


def conjugation_check(
    mu: AtomicMeasure,
    a: ArrayLike,
    b: ArrayLike,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    rng: np.random.Generator | None = None,
) -> VerificationReport:
    """‖T_a‖ = ‖T_b‖ and T_b = Σ(h) T_a Σ(h)⁻¹ for the rotation h taking a to b."""
    va, vb = _vector(a), _vector(b)
    ra, rb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
    if abs(ra - rb) > RADIUS_TOL:
        raise RadiiDifferError(
            f"|a| = {ra:.12g} and |b| = {rb:.12g} differ",
            details={"a": va.tolist(), "b": vb.tolist()},
        )
    require_symmetric(mu)
    h = aligning_rotation(va, vb)
    t_a = so3_operator(mu, va, L, margin)
    t_b = so3_operator(mu, vb, L, margin)
    sigma = right_regular(h, L)
    conjugated = sigma @ t_a.matrix @ sigma.conj().T
    residual = float(np.abs(t_b.matrix - conjugated).max())
    norm_a = operator_norm(t_a, rng=rng)
    norm_b = operator_norm(t_b, rng=rng)

    report = VerificationReport("conjugation")
    context = {"a": va.tolist(), "b": vb.tolist(), "L": L}
    report.add(bound_check("norm-difference", abs(norm_a.value - norm_b.value),
                           NORM_MATCH_TOL, norm_a=norm_a.value, norm_b=norm_b.value, **context))
    report.add(bound_check("conjugation-residual", residual, CONJUGATION_TOL, **context))
    report.details = {"rotation": h.tolist(), "margin": t_a.assembly_margin}
    return report


def radial_domination_check(
    mu: AtomicMeasure,
    x: ArrayLike,
    L: int,
    *,
    sphere_L: int | None = None,
    margin: int = DEFAULT_MARGIN,
    rng: np.random.Generator | None = None,
) -> VerificationReport:
    """‖S_{|x|}‖ ≤ ‖T_x‖; the difference is reported and only ≤ is asserted."""
    vec = _vector(x)
    require_symmetric(mu)
    r = float(np.linalg.norm(vec))
    band_s = L if sphere_L is None else sphere_L
    s_norm = operator_norm(sphere_operator(mu, r, band_s, margin), rng=rng)
    t_norm = operator_norm(so3_operator(mu, vec, L, margin), rng=rng)
    report = VerificationReport("radial-domination")
    report.add(
        bound_check(
            "sphere-below-so3",
            s_norm.value - t_norm.value,
            DOMINATION_TOL,
            x=vec.tolist(),
            sphere_norm=s_norm.value,
            so3_norm=t_norm.value,
            sphere_L=band_s,
            L=L,
        )
    )
    return report


# ── Constants and small |x| ──────────────────────────────────────────────────


def constants_oracle(
    mu: AtomicMeasure, x: ArrayLike, *, support_cap: int = DEFAULT_SUPPORT_CAP
) -> float:
    """‖T_x 1‖² in closed form: Σ over μ̌*μ of w·j₀(2π|x||v|)."""
    tilde = convolve(reverse(mu), mu, support_cap=support_cap)
    t = _TWO_PI * float(np.linalg.norm(_vector(x))) * tilde.radii()
    return float(tilde.weights @ bessel_j(0, t))


def _translation_moments(mu: AtomicMeasure, support_cap: int) -> tuple[float, float]:
    tilde = convolve(reverse(mu), mu, support_cap=support_cap)
    sq = tilde.radii() ** 2
    return float(tilde.weights @ sq), float(tilde.weights @ sq**2)


def small_x_check(
    mu: AtomicMeasure,
    x_grid: Sequence[ArrayLike] | ArrayLike,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    streams: RandomStreams | None = None,
    threads: int = 1,
    support_cap: int = DEFAULT_SUPPORT_CAP,
    mean_zero: bool = False,
) -> VerificationReport:
    """Near-identity bounds for T_x on a grid of small vectors.

    Per x: ‖T_x − T₀‖ ≤ 2π√C|x|; ‖T_x1 − 1‖ ≤ 4π²C|x|²; ‖T_x²1 − 1‖ ≤ 8π²C|x|²;
    ‖T_x1‖² ≤ 1 − (2π²C/3)|x|² on the longest grid prefix where it holds;
    the fourth-order bound on ‖T_x1‖² and its closed form.  The grid must be
    ordered by |x|.  ``mean_zero`` adds ‖T_x|L²₀‖ per x as an INFO row.
    """
    grid = _x_grid(x_grid)
    lengths = np.linalg.norm(grid, axis=1)
    if np.any(np.diff(lengths) < 0):
        raise UsageError("small_x_check needs the x grid ordered by |x|")
    require_symmetric(mu)
    moments = mu.moments()
    mean = float(np.linalg.norm(moments.mean_translation))
    if mean > CENTERED_TOL:
        raise NotCenteredError(
            f"mean translation {mean:.3e} exceeds {CENTERED_TOL:g}; center the measure first",
            details={"mean_translation": moments.mean_translation.tolist()},
        )
    if moments.C == 0.0:
        raise PreflightError(
            "every atom is a pure rotation; the small-|x| bounds are vacuous",
            code="degenerate-translations",
        )
    C = moments.C
    m2, m4 = _translation_moments(mu, support_cap)
    rs = streams or RandomStreams(0)
    t0 = so3_operator(mu, np.zeros(3), L, margin)
    e0 = constant_vector(t0.dim)

    def evaluate(index: int, x: FloatArray) -> dict[str, Any]:
        tx = so3_operator(mu, x, L, margin)
        rng = rs.generator("small-x", index)
        once = tx.matrix @ e0
        twice = tx.matrix @ once
        return {
            "difference": operator_norm(tx.matrix - t0.matrix, rng=rng).value,
            "drift": float(np.linalg.norm(once - e0)),
            "second": float(np.linalg.norm(twice - e0)),
            "constants": float(np.vdot(once, once).real),
            "oracle": constants_oracle(mu, x, support_cap=support_cap),
            "mean_zero": mean_zero_norm(tx, rng=rng).value if mean_zero else None,
            "margin": tx.assembly_margin,
        }

    rows = map_ordered(evaluate, list(grid), threads)

    prefix = 0
    for row, length in zip(rows, lengths, strict=True):
        if row["constants"] > 1.0 - (2.0 * _PI2 * C / 3.0) * length**2 + INEQUALITY_TOL:
            break
        prefix += 1

    report = VerificationReport("small-x")
    report.add(
        bound_check(
            "second-moment-identity",
            abs(m2 - 2.0 * C),
            1e-10 * max(1.0, C),
            m2=m2,
            C=C,
        )
    )
    for index, (x, length, row) in enumerate(zip(grid, lengths, rows, strict=True)):
        ctx = {"x": x.tolist(), "index": index}
        first = _TWO_PI * math.sqrt(C) * length
        report.add(
            bound_check(
                "difference-bound",
                row["difference"],
                first + INEQUALITY_TOL,
                ratio=row["difference"] / first if first > 0 else None,
                **ctx,
            )
        )
        report.add(
            bound_check("constant-drift", row["drift"], 4 * _PI2 * C * length**2 + INEQUALITY_TOL,
                        **ctx)
        )
        report.add(
            bound_check("second-step", row["second"], 8 * _PI2 * C * length**2 + INEQUALITY_TOL,
                        **ctx)
        )
        report.add(
            bound_check(
                "constants-decay",
                row["constants"],
                1.0 - (2.0 * _PI2 * C / 3.0) * length**2 + INEQUALITY_TOL,
                informational=index >= prefix,
                **ctx,
            )
        )
        report.add(
            bound_check(
                "fourth-order",
                row["constants"],
                1.0
                - (2.0 * _PI2 / 3.0) * length**2 * m2
                + (2.0 * _PI2**2 / 15.0) * length**4 * m4
                + INEQUALITY_TOL,
                **ctx,
            )
        )
        report.add(
            bound_check("oracle-agreement", abs(row["constants"] - row["oracle"]), ORACLE_TOL,
                        oracle=row["oracle"], **ctx)
        )
        if mean_zero:
            report.add(info("mean-zero-norm", row["mean_zero"], margin=row["margin"], **ctx))

    threshold = float(lengths[prefix - 1]) if prefix else 0.0
    report.details = {
        "C": C,
        "m2": m2,
        "m4": m4,
        "L": L,
        "prefix_length": prefix,
        "small_x_threshold": threshold,
    }
    logger.info(
        "small-x check %r: %d points, prefix %d (|x| <= %.4g), %d failures",
        mu.label, len(grid), prefix, threshold, len(report.failures),
    )
    return report


# ── Dirichlet form ───────────────────────────────────────────────────────────


def random_coefficients(dim: int, rng: np.random.Generator) -> NDArray[np.complex128]:
    """Unit-norm complex Gaussian coefficient vector."""
    c = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return np.asarray(c / np.linalg.norm(c), dtype=complex)


def dirichlet_check(
    nu: AtomicMeasure,
    c0: float,
    x_grid: Sequence[ArrayLike] | ArrayLike,
    phi_samples: int | ArrayLike,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    probe_translations: ArrayLike | None = None,
    streams: RandomStreams | None = None,
    threads: int = 1,
) -> VerificationReport:
    """Dirichlet-form identity and the two-sided bounds around it.

    For each x and sample φ:

    (a) Σ_g w_g‖π_x(g)φ − φ‖², evaluated on the SO(3) grid, equals
        ⟨(2 − 2T_x)φ, φ⟩ from the matrix;
    (b) it is at least 2c₀·min(|x|², 1)‖φ‖²;
    (c) ‖π_x(v)φ − φ‖² ≤ c₁·min(|x|², 1)‖φ‖² with c₁ = max(4π²κ², 4) and
        ≤ 4π²κ²|x|²‖φ‖² for each probe translation v;
    (d) ‖π_x(v)φ − φ‖² ≤ c₂·Σ_g w_g‖π_x(g)φ − φ‖² with c₂ = c₁/(2c₀), when c₀ > 0.

    Each check records the worst sample per x.
    """
    if c0 < 0:
        raise UsageError(f"c0 must be nonnegative, got {c0}")
    require_symmetric(nu)
    grid = _x_grid(x_grid)
    probes = (
        nu.translations if probe_translations is None
        else np.asarray(probe_translations, dtype=float).reshape(-1, 3)
    )
    kappa = float(np.linalg.norm(probes, axis=1).max(initial=0.0))
    c1 = max(4.0 * _PI2 * kappa**2, 4.0)
    c2 = c1 / (2.0 * c0) if c0 > 0 else None
    rs = streams or RandomStreams(0)

    dim = peter_weyl_dim(L)
    if isinstance(phi_samples, int):
        phis = np.stack(
            [random_coefficients(dim, rs.generator("dirichlet-phi", k)) for k in range(phi_samples)]
        )
    else:
        phis = np.asarray(phi_samples, dtype=complex).reshape(-1, dim)
    if phis.shape[0] == 0:
        raise UsageError("dirichlet_check needs at least one test function")

    def evaluate(index: int, x: FloatArray) -> dict[str, Any]:
        tx = so3_operator(nu, x, L, margin)
        pw = peter_weyl_grid(L, 2 * L + tx.assembly_margin)
        weights = pw.quad.weights()
        rotated_x = pw.quad.rotate(x)
        atom_phases = [np.exp(1j * _TWO_PI * (rotated_x @ v)) for v in nu.translations]
        probe_shifts = [
            np.abs(np.exp(1j * _TWO_PI * (rotated_x @ v)) - 1.0) ** 2 for v in probes
        ]
        rows: list[tuple[float, float, float, float]] = []
        for start in range(0, phis.shape[0], _PHI_BATCH):
            batch = phis[start:start + _PHI_BATCH]
            values = pw.evaluate(batch)
            sq_norm = np.sum(np.abs(batch) ** 2, axis=1)
            nodal = np.zeros(len(batch))
            for g, phase in enumerate(atom_phases):
                moved = phase * pw.evaluate(rotate_left(batch, nu.rotations[g], L))
                nodal += nu.weights[g] * np.sum(weights * np.abs(moved - values) ** 2,
                                                axis=(1, 2, 3))
            applied = batch @ tx.matrix.T
            form = 2.0 * sq_norm - 2.0 * np.sum(batch.conj() * applied, axis=1).real
            density = weights * np.abs(values) ** 2
            probe = np.zeros(len(batch))
            for shift in probe_shifts:
                probe = np.maximum(probe, np.sum(shift * density, axis=(1, 2, 3)))
            rows.extend(zip(nodal.tolist(), form.tolist(), probe.tolist(), sq_norm.tolist(),
                            strict=True))
        return {"rows": rows, "margin": tx.assembly_margin}

    results = map_ordered(evaluate, list(grid), threads)

    report = VerificationReport("dirichlet")
    for index, (x, result) in enumerate(zip(grid, results, strict=True)):
        length = float(np.linalg.norm(x))
        floor = min(length**2, 1.0)
        ctx = {"x": x.tolist(), "index": index}
        rows = result["rows"]
        identity = [abs(nodal - form) for nodal, form, _, _ in rows]
        k = int(np.argmax(identity))
        report.add(bound_check("dirichlet-identity", identity[k], IDENTITY_TOL, sample=k, **ctx))

        deficit = [2.0 * c0 * floor * sq - form for _, form, _, sq in rows]
        k = int(np.argmax(deficit))
        report.add(bound_check("form-lower-bound", deficit[k], LOWER_BOUND_TOL, sample=k,
                               c0=c0, **ctx))

        upper = [probe - c1 * floor * sq for _, _, probe, sq in rows]
        k = int(np.argmax(upper))
        report.add(bound_check("translation-upper-bound", upper[k], INEQUALITY_TOL, sample=k,
                               c1=c1, **ctx))

        direct = [probe - 4.0 * _PI2 * kappa**2 * length**2 * sq for _, _, probe, sq in rows]
        k = int(np.argmax(direct))
        report.add(bound_check("translation-direct-bound", direct[k], INEQUALITY_TOL, sample=k,
                               kappa=kappa, **ctx))

        if c2 is not None:
            combined = [probe - c2 * form for _, form, probe, _ in rows]
            k = int(np.argmax(combined))
            report.add(bound_check("combined-bound", combined[k],
                                   c2 * LOWER_BOUND_TOL + INEQUALITY_TOL, sample=k,
                                   c2=c2, **ctx))

    report.details = {
        "c0": c0,
        "c1": c1,
        "c2": c2,
        "kappa": kappa,
        "L": L,
        "samples": int(phis.shape[0]),
    }
    logger.info(
        "dirichlet check %r: %d x-points x %d samples, %d failures",
        nu.label, len(grid), phis.shape[0], len(report.failures),
    )
    return report


ORACLE_CSV_HEADER = ("x0", "x1", "x2", "length", "matrix_value", "oracle_value", "abs_error",
                     "margin")


def oracle_check(
    mu: AtomicMeasure,
    x_grid: Sequence[ArrayLike] | ArrayLike,
    L: int,
    *,
    margin: int = DEFAULT_MARGIN,
    threads: int = 1,
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> VerificationReport:
    """‖T_x1‖² from the assembled matrix against the Bessel closed form.

    ``details["rows"]`` holds one CSV row per x (see ORACLE_CSV_HEADER).
    """
    grid = _x_grid(x_grid)
    require_symmetric(mu)
    e0 = constant_vector(peter_weyl_dim(L))

    def evaluate(_: int, x: FloatArray) -> tuple[float, float, int]:
        tx = so3_operator(mu, x, L, margin)
        once = tx.matrix @ e0
        value = float(np.vdot(once, once).real)
        return value, constants_oracle(mu, x, support_cap=support_cap), tx.assembly_margin

    results = map_ordered(evaluate, list(grid), threads)
    report = VerificationReport("oracle")
    rows: list[tuple[Any, ...]] = []
    for index, (x, (value, oracle, used)) in enumerate(zip(grid, results, strict=True)):
        error = abs(value - oracle)
        length = float(np.linalg.norm(x))
        report.add(bound_check("oracle-agreement", error, ORACLE_TOL, x=x.tolist(), index=index,
                               matrix_value=value, oracle=oracle))
        rows.append((*x.tolist(), length, value, oracle, error, used))
    report.details = {"L": L, "rows": rows}
    logger.info("oracle check %r: %d points, max error %.3e", mu.label, len(rows),
                max(r[6] for r in rows))
    return report

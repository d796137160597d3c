"""
isogap - Command registry and runner
Maps each CLI command to the pipeline that computes it and to the artifacts
it writes.  Satisfies the ``ICommandRunner`` port used by JobOrchestrator.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from application.lsg import (
    COND_LIMIT,
    MASS_RANK_TOL,
    Region,
    assemble_problem,
    compare_regions,
    enclosing_box,
    estimate_kappa,
    kappa_trend,
    sample_witness,
    witness_residuals,
)
from application.profile import (
    CSV_HEADER,
    check_assumptions,
    gap_profile,
    min_ratio_floor,
    so3_gap_fit,
    truncation_stability,
)
from application.reduction import reduction_pipeline
from application.verifier import (
    ORACLE_CSV_HEADER,
    conjugation_check,
    dirichlet_check,
    oracle_check,
    radial_domination_check,
    small_x_check,
)
from domain.entities.measure import AtomicMeasure
from domain.entities.reports import VerificationReport
from domain.errors import UsageError
from domain.group_core import DEFAULT_SUPPORT_CAP, center_with_offset, common_fixed_point
from domain.ports.artifact_store import IArtifactStore
from domain.ports.command_runner import StageCallback
from infrastructure.artifacts.matrix_dump import dump_matrix
from infrastructure.generator_set import load_measure
from spectral.operators import DEFAULT_MARGIN, rotation_gap, sphere_operator
from utils.rng import RandomStreams
from utils.validators import expand_grid

logger = logging.getLogger(__name__)

WITNESS_CSV_HEADER = ("x", "y", "z", "re", "im")
TREND_CSV_HEADER = ("N", "lambda_min", "kappa_bound")
WITNESS_RESIDUAL_TOL = 1e-8
MONOTONE_TOL = 1e-10

Handler = Callable[["JobRunner", AtomicMeasure, dict[str, Any], IArtifactStore, StageCallback],
                   dict[str, Any]]


@dataclass(frozen=True)
class CommandSpec:
    """Single source of truth for one CLI command."""
    name: str
    handler: Handler
    artifacts: tuple[str, ...]
    description: str


# ── Shared helpers ───────────────────────────────────────────────────────────


def _margin(params: dict[str, Any]) -> int:
    value = params.get("margin")
    if value is None:
        value = params.get("limits", {}).get("margin", DEFAULT_MARGIN)
    return int(value)


def _norm_options(params: dict[str, Any]) -> dict[str, Any]:
    limits = params.get("limits", {})
    options: dict[str, Any] = {}
    if limits.get("dense_max_dim") is not None:
        options["dense_max_dim"] = int(limits["dense_max_dim"])
    if limits.get("max_iterations") is not None:
        options["max_iter"] = int(limits["max_iterations"])
    return options


def _support_cap(params: dict[str, Any]) -> int:
    return int(params.get("limits", {}).get("support_cap", DEFAULT_SUPPORT_CAP))


def random_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    """n independent uniform unit vectors."""
    v = rng.standard_normal((n, 3))
    return np.asarray(v / np.linalg.norm(v, axis=1, keepdims=True), dtype=float)


def graded_grid(rng: np.random.Generator, n: int, r_max: float) -> np.ndarray:
    """x_k = (k/n)·r_max·u_k for k = 1..n with random unit u_k (ordered by |x|)."""
    lengths = r_max * np.arange(1, n + 1) / n
    return lengths[:, None] * random_directions(rng, n)


def _measure_summary(mu: AtomicMeasure) -> dict[str, Any]:
    return {"label": mu.label, "atoms": mu.size, "moments": mu.moments().to_dict()}


# ── Command handlers ─────────────────────────────────────────────────────────


def _run_rotation_gap(runner: JobRunner, mu: AtomicMeasure, params: dict[str, Any],
                      store: IArtifactStore, stage: StageCallback) -> dict[str, Any]:
    stage("rotation-gap")
    L = int(params["L"])
    gap = rotation_gap(mu, L)
    out: dict[str, Any] = {"measure": _measure_summary(mu), "L": L, "gap": gap.to_dict()}
    compare_L = params.get("compare_L")
    if compare_L is not None:
        out["compare"] = {"L": int(compare_L), "gap": rotation_gap(mu, int(compare_L)).to_dict()}
    point = common_fixed_point(mu)
    out["common_fixed_point"] = None if point is None else point.tolist()
    store.write_json("rotation_gap.json", out)
    return {"alpha": gap.alpha, "no_gap": gap.no_gap}


def _run_profile(runner: JobRunner, mu: AtomicMeasure, params: dict[str, Any],
                 store: IArtifactStore, stage: StageCallback) -> dict[str, Any]:
    L = int(params["L"])
    margin = _margin(params)
    radii = expand_grid(params["radii"])
    options = _norm_options(params)

    stage("gap-profile")
    profile = gap_profile(
        mu, radii, L, margin=margin, include_so3=bool(params.get("include_so3", False)),
        so3_L=params.get("so3_L"), streams=runner.streams, threads=runner.threads,
        norm_options=options,
    )
    payload = profile.to_dict()
    payload["min_gap_r_ge_1"] = min_ratio_floor(profile)
    payload["margin"] = margin

    if params.get("stability_L") is not None:
        stage("truncation-stability")
        payload["stability"] = truncation_stability(
            mu, radii, L, int(params["stability_L"]), margin=margin, streams=runner.streams,
            threads=runner.threads, norm_options=options,
        ).to_dict()

    store.write_csv("profile.csv", CSV_HEADER, profile.csv_rows())
    store.write_json("profile.json", payload)

    if params.get("dump_matrices"):
        stage("dump-matrices")
        for index, r in enumerate(radii):
            dump_matrix(store, f"sphere_{index:03d}", sphere_operator(mu, r, L, margin))
    c0 = profile.c0
    return {"c0": c0.value, "no_gap": c0.no_gap, "exponent": profile.exponent}


def _verify_conjugation(runner: JobRunner, mu: AtomicMeasure,
                        params: dict[str, Any]) -> VerificationReport:
    rng = runner.streams.generator("verify", "conjugation-grid")
    n = int(params["conjugation_pairs"])
    lo, hi = params["conjugation_radius"]
    radii = rng.uniform(lo, hi, n)
    a = radii[:, None] * random_directions(rng, n)
    b = radii[:, None] * random_directions(rng, n)
    merged = VerificationReport("conjugation")
    for k in range(n):
        part = conjugation_check(mu, a[k], b[k], int(params["conjugation_L"]),
                                 margin=_margin(params),
                                 rng=runner.streams.generator("conjugation", k))
        merged.extend(part.checks)
    merged.details = {"pairs": n, "L": int(params["conjugation_L"])}
    return merged


def _verify_domination(runner: JobRunner, mu: AtomicMeasure,
                       params: dict[str, Any]) -> VerificationReport:
    rng = runner.streams.generator("verify", "domination-grid")
    n = int(params["domination_points"])
    lo, hi = params["domination_radius"]
    xs = rng.uniform(lo, hi, n)[:, None] * random_directions(rng, n)
    merged = VerificationReport("radial-domination")
    for k in range(n):
        part = radial_domination_check(mu, xs[k], int(params["L"]),
                                       sphere_L=params.get("sphere_L"), margin=_margin(params),
                                       rng=runner.streams.generator("domination", k))
        merged.extend(part.checks)
    merged.details = {"points": n, "L": int(params["L"]), "sphere_L": params.get("sphere_L")}
    return merged


def _run_verify(runner: JobRunner, mu: AtomicMeasure, params: dict[str, Any],
                store: IArtifactStore, stage: StageCallback) -> dict[str, Any]:
    stage("preflight")
    gap = check_assumptions(mu, int(params["L"]))
    centered, offset = center_with_offset(mu)
    nu = centered if params.get("center_first", True) else mu
    checks = list(params["checks"])
    reports: dict[str, Any] = {}

    if "conjugation" in checks:
        stage("conjugation")
        reports["conjugation"] = _verify_conjugation(runner, mu, params)
    if "radial-domination" in checks:
        stage("radial-domination")
        reports["radial-domination"] = _verify_domination(runner, mu, params)
    if "small-x" in checks:
        stage("small-x")
        grid = graded_grid(runner.streams.generator("verify", "small-x-grid"),
                           int(params["small_x_points"]), float(params["small_x_max"]))
        reports["small-x"] = small_x_check(
            nu, grid, int(params["L"]), margin=_margin(params), streams=runner.streams,
            threads=runner.threads, support_cap=_support_cap(params),
            mean_zero=bool(params.get("mean_zero_norm", False)),
        )
    if "dirichlet" in checks:
        stage("dirichlet")
        L_d = int(params["dirichlet_L"])
        grid = graded_grid(runner.streams.generator("verify", "dirichlet-grid"),
                           int(params["dirichlet_points"]), float(params["dirichlet_max"]))
        c0 = params.get("c0")
        c0_source: dict[str, Any] = {"given": c0}
        if c0 is None:
            radii = np.concatenate([expand_grid(params["c0_radii"]),
                                    np.linalg.norm(grid, axis=1)])
            fit = so3_gap_fit(nu, radii, max(int(params["c0_L"]), L_d), margin=_margin(params),
                              streams=runner.streams, threads=runner.threads,
                              norm_options=_norm_options(params))
            c0 = fit.value
            c0_source = {"fitted": fit.to_dict(), "L": max(int(params["c0_L"]), L_d)}
        report = dirichlet_check(
            nu, float(c0), grid, int(params["phi_samples"]), L_d, margin=_margin(params),
            streams=runner.streams, threads=runner.threads,
        )
        report.details["c0_source"] = c0_source
        reports["dirichlet"] = report

    passed = all(r.passed for r in reports.values())
    if not passed:
        failing = [name for name, r in reports.items() if not r.passed]
        logger.warning("verify: failing checks in %s", failing)
    store.write_json("verify.json", {
        "measure": _measure_summary(mu),
        "alpha": gap.alpha,
        "centering_offset": offset.tolist(),
        "centered": nu is centered,
        "passed": passed,
        "reports": {name: r.to_dict() for name, r in reports.items()},
    })
    return {"passed": passed, "failures": sum(len(r.failures) for r in reports.values())}


def _run_reduce(runner: JobRunner, mu: AtomicMeasure, params: dict[str, Any],
                store: IArtifactStore, stage: StageCallback) -> dict[str, Any]:
    stage("reduction")
    report = reduction_pipeline(
        mu, int(params["L"]), margin=_margin(params),
        probe_radii=expand_grid(params["probe_radii"]), probe_L=params.get("probe_L"),
        support_cap=_support_cap(params), streams=runner.streams, threads=runner.threads,
    )
    store.write_json("reduction.json", report.to_dict())
    return {"s": report.s_chosen, "beta": report.beta, "ell": report.ell}


def _run_lsg(runner: JobRunner, mu: AtomicMeasure, params: dict[str, Any],
             store: IArtifactStore, stage: StageCallback) -> dict[str, Any]:
    generators = mu.isometries()
    region = Region.from_dict(params["region"])
    N = int(params["N"])
    cond_limit = float(params.get("cond_limit", COND_LIMIT))
    rank_tol = float(params.get("mass_rank_tol", MASS_RANK_TOL))
    trend_Ns = sorted(set(params.get("trend_N") or []) | {N})
    domain = enclosing_box(generators, region)
    quadrature_N = max(trend_Ns)

    stage("assemble")
    problem = assemble_problem(generators, region, N, domain=domain, quadrature_N=quadrature_N,
                               threads=runner.threads, label=mu.label)
    stage("eigensolve")
    estimate = estimate_kappa(problem, cond_limit=cond_limit, rank_tol=rank_tol)
    stage("witness")
    residuals = witness_residuals(problem, estimate)
    payload: dict[str, Any] = {
        "measure": _measure_summary(mu),
        "problem": problem.header(),
        "estimate": estimate.to_dict(problem),
        "witness_residuals": residuals.to_dict(),
        "witness_check": {
            "lambda_residual": residuals.lambda_residual,
            "bound": WITNESS_RESIDUAL_TOL,
            "passed": residuals.lambda_residual <= WITNESS_RESIDUAL_TOL,
        },
    }

    if len(generators) > 1:
        stage("monotonicity")
        subset = generators[:-1]
        smaller = estimate_kappa(
            assemble_problem(subset, region, N, domain=domain, quadrature_N=quadrature_N,
                             threads=runner.threads),
            cond_limit=cond_limit, rank_tol=rank_tol,
        )
        payload["monotonicity"] = {
            "generators": len(subset),
            "lambda_min_subset": smaller.lambda_min,
            "lambda_min": estimate.lambda_min,
            "passed": smaller.lambda_min <= estimate.lambda_min + MONOTONE_TOL,
        }

    stage("trend")
    trend = kappa_trend(generators, region, trend_Ns, threads=runner.threads,
                        cond_limit=cond_limit, rank_tol=rank_tol)
    payload["trend"] = [p.to_dict() for p in trend]

    if params.get("compare_region") is not None:
        stage("compare-region")
        payload["comparison"] = compare_regions(
            generators, region, Region.from_dict(params["compare_region"]), N,
            threads=runner.threads, cond_limit=cond_limit, rank_tol=rank_tol,
        ).to_dict()

    store.write_json("lsg.json", payload)
    points, values = sample_witness(problem, estimate, int(params.get("witness_samples", 16)))
    store.write_csv(
        "witness.csv", WITNESS_CSV_HEADER,
        ((*p.tolist(), v.real, v.imag) for p, v in zip(points, values, strict=True)),
    )
    store.write_csv("trend.csv", TREND_CSV_HEADER,
                    ((p.N, p.lambda_min, p.kappa_bound) for p in trend))
    return {
        "lambda_min": estimate.lambda_min,
        "kappa_bound": None if math.isinf(estimate.kappa_bound) else estimate.kappa_bound,
    }


def _run_oracle(runner: JobRunner, mu: AtomicMeasure, params: dict[str, Any],
                store: IArtifactStore, stage: StageCallback) -> dict[str, Any]:
    stage("oracle")
    grid = graded_grid(runner.streams.generator("oracle", "grid"), int(params["x_points"]),
                       float(params["x_max"]))
    report = oracle_check(mu, grid, int(params["L"]), margin=_margin(params),
                          threads=runner.threads, support_cap=_support_cap(params))
    rows = report.details.pop("rows")
    store.write_csv("oracle.csv", ORACLE_CSV_HEADER, rows)
    store.write_json("oracle.json", {"measure": _measure_summary(mu), **report.to_dict()})
    return {"passed": report.passed, "max_error": max(r[6] for r in rows)}


_COMMAND_REGISTRY: list[CommandSpec] = [
    CommandSpec("rotation-gap", _run_rotation_gap, ("rotation_gap.json",),
                "rotation gap alpha_L of the rotation parts"),
    CommandSpec("profile", _run_profile, ("profile.csv", "profile.json"),
                "gap profile r -> 1 - |S_r| and the fitted constants"),
    CommandSpec("verify", _run_verify, ("verify.json",),
                "numerical checks of the norm inequalities"),
    CommandSpec("reduce", _run_reduce, ("reduction.json",),
                "truncation, centering and convolution-power reduction"),
    CommandSpec("lsg", _run_lsg, ("lsg.json", "witness.csv", "trend.csv"),
                "local spectral gap Rayleigh-quotient estimate"),
    CommandSpec("oracle", _run_oracle, ("oracle.csv", "oracle.json"),
                "|T_x 1|^2 against the Bessel closed form"),
]


def command_specs() -> dict[str, CommandSpec]:
    return {spec.name: spec for spec in _COMMAND_REGISTRY}


class JobRunner:
    """Runs registered commands on the job's generator set.

    The measure is loaded inside ``run`` so that a bad generator set is
    reported through the orchestrator like every other job failure.
    """

    def __init__(self, measure_path: str | Path, *, seed: int = 0, threads: int = 1) -> None:
        self._measure_path = Path(measure_path)
        self.streams = RandomStreams(seed)
        self.threads = int(threads)
        self._specs = command_specs()

    def commands(self) -> list[str]:
        return list(self._specs)

    def run(
        self,
        command: str,
        parameters: dict[str, Any],
        store: IArtifactStore,
        stage: StageCallback,
    ) -> dict[str, Any]:
        spec = self._specs.get(command)
        if spec is None:
            raise UsageError(f"unknown command {command!r}; known: {self.commands()}")
        stage("load-measure")
        mu = load_measure(self._measure_path)
        logger.info("measure %r: %d atoms from %s", mu.label, mu.size, self._measure_path)
        return spec.handler(self, mu, dict(parameters), store, stage)

"""
isogap - Job configuration validation
Centralized checks for every externally sourced job value.

Validate at the boundary: a job is checked in full before any pipeline runs,
and every problem is reported at once.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from typing import Any

import numpy as np

COMMANDS = ("rotation-gap", "profile", "verify", "reduce", "lsg", "oracle")
VERIFY_CHECKS = ("conjugation", "radial-domination", "small-x", "dirichlet")
MAX_BAND_LIMIT = 64
MAX_SEED = 2**64
MAX_GRID_POINTS = 100_000

# Band-limit keys per command; ``None`` is allowed only where listed as optional.
_BAND_LIMITS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "rotation-gap": (("L", "compare_L"), ("compare_L",)),
    "profile":      (("L", "so3_L", "stability_L"), ("stability_L",)),
    "verify":       (("L", "conjugation_L", "sphere_L", "dirichlet_L", "c0_L"), ()),
    "reduce":       (("L", "probe_L"), ()),
    "oracle":       (("L",), ()),
}

_POSITIVE_INTS: dict[str, tuple[str, ...]] = {
    "verify": ("conjugation_pairs", "domination_points", "small_x_points", "dirichlet_points",
               "phi_samples"),
    "lsg":    ("witness_samples",),
    "oracle": ("x_points",),
}

_POSITIVE_NUMBERS: dict[str, tuple[str, ...]] = {
    "verify": ("small_x_max", "dirichlet_max"),
    "lsg":    ("cond_limit",),
    "oracle": ("x_max",),
}

_RANGES: dict[str, tuple[str, ...]] = {
    "verify": ("conjugation_radius", "domination_radius"),
}

_LIMIT_INTS = ("support_cap", "dense_max_dim", "max_iterations")


def expand_grid(spec: Any) -> list[float]:
    """Expand a list of floats or ``{start, stop, num}`` into a list.

    Raises ValueError when the grid is empty, non-finite, or not strictly
    increasing.
    """
    if isinstance(spec, Mapping):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError("grid object needs numeric start, stop and num") from exc
        if not 1 <= num <= MAX_GRID_POINTS:
            raise ValueError(f"grid num must be in [1, {MAX_GRID_POINTS}], got {num}")
        values = np.linspace(start, stop, num).tolist()
    elif isinstance(spec, list | tuple):
        try:
            values = [float(v) for v in spec]
        except (TypeError, ValueError) as exc:
            raise ValueError("grid entries must be numbers") from exc
    else:
        raise ValueError(f"grid must be a list or {{start, stop, num}}, got {type(spec).__name__}")
    if not values:
        raise ValueError("grid is empty")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("grid has non-finite entries")
    if any(b <= a for a, b in zip(values, values[1:], strict=False)):
        raise ValueError("grid must be strictly increasing")
    return values


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return (isinstance(value, int | float) and not isinstance(value, bool)
            and math.isfinite(value))


def _check_no_traversal(key: str, path: Any, errors: list[str]) -> None:
    """Append an error if ``path`` contains a path-traversal (..) component."""
    if not path:
        return
    parts = str(path).replace("\\", "/").split("/")
    if ".." in parts:
        errors.append(f"{key} contains path traversal: {path!r}")


def _check_vector(key: str, value: Any, errors: list[str]) -> bool:
    if (not isinstance(value, list | tuple) or len(value) != 3
            or not all(_is_number(v) for v in value)):
        errors.append(f"{key} must be a list of three finite numbers, got {value!r}")
        return False
    return True


def validate_region(key: str, region: Any) -> list[str]:
    """Shape checks for an LSG region object (ball or box)."""
    errors: list[str] = []
    if not isinstance(region, Mapping):
        return [f"{key} must be an object, got {region!r}"]
    kind = region.get("kind", region.get("type"))
    if kind == "ball":
        _check_vector(f"{key}.center", region.get("center"), errors)
        radius = region.get("radius")
        if not _is_number(radius) or radius <= 0:
            errors.append(f"{key}.radius must be a positive number, got {radius!r}")
    elif kind == "box":
        ok_low = _check_vector(f"{key}.lower", region.get("lower"), errors)
        ok_high = _check_vector(f"{key}.upper", region.get("upper"), errors)
        if ok_low and ok_high and any(
            hi <= lo for lo, hi in zip(region["lower"], region["upper"], strict=True)
        ):
            errors.append(f"{key}: upper must exceed lower on every axis")
    else:
        errors.append(f"{key}.kind must be 'ball' or 'box', got {kind!r}")
    return errors


def _check_params(command: str, params: Mapping[str, Any], errors: list[str]) -> None:  # noqa: C901
    keys, optional = _BAND_LIMITS.get(command, ((), ()))
    for key in keys:
        val = params.get(key)
        if val is None and key in optional:
            continue
        if not _is_int(val) or not 0 <= val <= MAX_BAND_LIMIT:
            errors.append(f"{command}.{key} must be an integer in [0, {MAX_BAND_LIMIT}], "
                          f"got {val!r}")

    margin = params.get("margin")
    if margin is not None and (not _is_int(margin) or margin < 0):
        errors.append(f"{command}.margin must be a nonnegative integer or null, got {margin!r}")

    for key in _POSITIVE_INTS.get(command, ()):
        val = params.get(key)
        if val is not None and (not _is_int(val) or val < 1):
            errors.append(f"{command}.{key} must be a positive integer, got {val!r}")

    for key in _POSITIVE_NUMBERS.get(command, ()):
        val = params.get(key)
        if val is not None and (not _is_number(val) or val <= 0):
            errors.append(f"{command}.{key} must be a positive number, got {val!r}")

    for key in _RANGES.get(command, ()):
        val = params.get(key)
        if val is None:
            continue
        if (not isinstance(val, list | tuple) or len(val) != 2
                or not all(_is_number(v) for v in val) or not 0 <= val[0] <= val[1]):
            errors.append(f"{command}.{key} must be [lo, hi] with 0 <= lo <= hi, got {val!r}")

    if command == "profile":
        _check_grid(f"{command}.radii", params.get("radii"), errors, nonnegative=True)
    elif command == "verify":
        checks = params.get("checks", [])
        if not isinstance(checks, list) or not checks:
            errors.append("verify.checks must be a non-empty list")
        else:
            unknown = [c for c in checks if c not in VERIFY_CHECKS]
            if unknown:
                errors.append(f"verify.checks has unknown entries {unknown}; "
                              f"known: {list(VERIFY_CHECKS)}")
        c0 = params.get("c0")
        if c0 is not None and (not _is_number(c0) or c0 <= 0):
            errors.append(f"verify.c0 must be a positive number or null, got {c0!r}")
        if c0 is None:
            _check_grid("verify.c0_radii", params.get("c0_radii"), errors, nonnegative=True)
    elif command == "reduce":
        _check_grid("reduce.probe_radii", params.get("probe_radii"), errors, nonnegative=True)
    elif command == "lsg":
        errors.extend(validate_region("lsg.region", params.get("region")))
        if params.get("compare_region") is not None:
            errors.extend(validate_region("lsg.compare_region", params["compare_region"]))
        n = params.get("N")
        if not _is_int(n) or n < 0:
            errors.append(f"lsg.N must be a nonnegative integer, got {n!r}")
        trend = params.get("trend_N")
        if trend is not None and (
            not isinstance(trend, list) or not trend
            or not all(_is_int(v) and v >= 0 for v in trend)
            or any(b <= a for a, b in zip(trend, trend[1:], strict=False))
        ):
            errors.append(f"lsg.trend_N must be strictly increasing nonnegative integers, "
                          f"got {trend!r}")
        tol = params.get("mass_rank_tol")
        if tol is not None and (not _is_number(tol) or not 0 <= tol < 1):
            errors.append(f"lsg.mass_rank_tol must be a number in [0, 1), got {tol!r}")


def _check_grid(key: str, spec: Any, errors: list[str], *, nonnegative: bool) -> None:
    try:
        values = expand_grid(spec)
    except ValueError as exc:
        errors.append(f"{key}: {exc}")
        return
    if nonnegative and values[0] < 0:
        errors.append(f"{key}: entries must be nonnegative")


def validate_job_config(job: Mapping[str, Any]) -> list[str]:
    """
    Validate a resolved job (command, measure, parameters, seed, output, threads).
    Returns a list of error strings (empty list = valid).
    """
    errors: list[str] = []

    command = job.get("command")
    if command not in COMMANDS:
        errors.append(f"command must be one of {list(COMMANDS)}, got {command!r}")

    seed = job.get("seed")
    if not _is_int(seed) or not 0 <= seed < MAX_SEED:
        errors.append(f"seed must be an integer in [0, 2**64), got {seed!r}")

    threads = job.get("threads", 1)
    if not _is_int(threads) or threads < 1:
        errors.append(f"threads must be a positive integer, got {threads!r}")

    if not job.get("measure"):
        errors.append("measure: a generator-set path is required")
    _check_no_traversal("measure", job.get("measure"), errors)

    params = job.get("parameters", {})
    if not isinstance(params, Mapping):
        errors.append("parameters must be an object")
        return errors
    if command in COMMANDS:
        _check_params(str(command), params, errors)

    limits = params.get("limits", {})
    for key in _LIMIT_INTS:
        val = limits.get(key)
        if val is not None and (not _is_int(val) or val < 1):
            errors.append(f"limits.{key} must be a positive integer, got {val!r}")
    return errors

"""Error hierarchy shared by every layer.

Library code raises these; only the CLI turns them into exit statuses and the
machine-readable error JSON.  Three families map onto the three non-zero exit
statuses:

  UsageError      (2)  bad config, bad arguments, malformed inputs
  PreflightError  (3)  a mathematical precondition of the requested run fails
  NumericalError  (4)  an eigensolve, solve or support bound gives up
"""

from __future__ import annotations

from typing import Any


class IsogapError(Exception):
    """Base class.  ``code`` is the stable machine-readable identifier."""

    exit_status = 1
    category = "internal"
    default_code = "internal"

    def __init__(
        self,
        message: str,
        *,
        code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.code = code or self.default_code
        self.details: dict[str, Any] = dict(details or {})

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "category": self.category,
            "exit_status": self.exit_status,
            "message": self.message,
            "details": self.details,
        }


# ── Usage (exit 2) ───────────────────────────────────────────────────────────


class UsageError(IsogapError):
    exit_status = 2
    category = "usage"
    default_code = "usage"


class ConfigError(UsageError):
    default_code = "config"


class InvalidIsometryError(UsageError, ValueError):
    default_code = "invalid-isometry"


class RadiiDifferError(UsageError, ValueError):
    default_code = "radii-differ"


class AsymmetricMeasureError(UsageError, ValueError):
    default_code = "not-symmetric"


class RegionEscapesDomainError(UsageError, ValueError):
    default_code = "region-escapes-domain"


# ── Preflight (exit 3) ───────────────────────────────────────────────────────


class PreflightError(IsogapError):
    exit_status = 3
    category = "preflight"
    default_code = "preflight"


class AssumptionError(PreflightError):
    """An averaging-operator hypothesis does not hold for the measure.

    ``code`` is ``assumption-1`` (no rotation gap) or ``assumption-2``
    (the isometries share a fixed point).
    """

    default_code = "assumption-1"


class NoRotationGapError(AssumptionError):
    default_code = "no-rotation-gap"


class NotCenteredError(PreflightError):
    default_code = "not-centered"


class EmptyTruncationError(PreflightError):
    default_code = "empty-truncation"


# ── Numerical (exit 4) ───────────────────────────────────────────────────────


class NumericalError(IsogapError):
    exit_status = 4
    category = "numerical"
    default_code = "postcondition"


class NormNotConvergedError(NumericalError):
    default_code = "norm-not-converged"


class SupportBlowupError(NumericalError):
    default_code = "support-blowup"


class NoFixedPointError(NumericalError):
    default_code = "no-fixed-point"


class MassMatrixSingularError(NumericalError):
    default_code = "mass-matrix-singular"

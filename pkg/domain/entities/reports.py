"""Result records produced by the numerical checks and pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# ── Check outcomes ───────────────────────────────────────────────────────────

PASS = "pass"
FAIL = "fail"
INFO = "info"


@dataclass(frozen=True)
class CheckResult:
    """One measured quantity compared against a bound (measured ≤ bound)."""

    name: str
    status: str  # PASS | FAIL | INFO
    measured: float
    bound: float | None = None
    context: dict[str, Any] = field(default_factory=dict)
    message: str = ""

    @property
    def slack(self) -> float | None:
        if self.bound is None:
            return None
        return self.bound - self.measured

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "measured": self.measured,
            "bound": self.bound,
            "slack": self.slack,
            "context": self.context,
            "message": self.message,
        }


def bound_check(
    name: str,
    measured: float,
    bound: float,
    *,
    message: str = "",
    informational: bool = False,
    **context: Any,
) -> CheckResult:
    """PASS when measured ≤ bound; INFO results are reported but never fail."""
    if informational:
        status = INFO
    else:
        status = PASS if measured <= bound else FAIL
    return CheckResult(name, status, float(measured), float(bound), dict(context), message)


def info(name: str, measured: float, message: str = "", **context: Any) -> CheckResult:
    return CheckResult(name, INFO, float(measured), None, dict(context), message)


@dataclass
class VerificationReport:
    """Ordered list of checks plus free-form details for one verification."""

    title: str
    checks: list[CheckResult] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def extend(self, checks: list[CheckResult]) -> None:
        self.checks.extend(checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def passed(self) -> bool:
        return not self.failures

    def named(self, name: str) -> list[CheckResult]:
        return [c for c in self.checks if c.name == name]

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "passed": self.passed,
            "failures": len(self.failures),
            "checks": [c.to_dict() for c in self.checks],
            "details": self.details,
        }

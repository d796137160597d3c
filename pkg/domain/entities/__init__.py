# domain/entities/__init__.py
from domain.entities.isometry import Isometry
from domain.entities.measure import AtomicMeasure, MomentSummary
from domain.entities.reports import CheckResult, VerificationReport

__all__ = ["AtomicMeasure", "CheckResult", "Isometry", "MomentSummary", "VerificationReport"]

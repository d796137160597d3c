# infrastructure/logging/__init__.py
from infrastructure.logging.setup import configure_logging, get_run_id, set_run_id

__all__ = ["configure_logging", "get_run_id", "set_run_id"]

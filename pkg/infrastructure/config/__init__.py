# infrastructure/config/__init__.py
from infrastructure.config.env_config import EnvConfigStore

__all__ = ["EnvConfigStore"]

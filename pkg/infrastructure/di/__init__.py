# infrastructure/di/__init__.py
from infrastructure.di.container import Container

__all__ = ["Container"]

"""Ordered fan-out of independent grid evaluations."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[int, T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Evaluate ``fn(index, item)`` for every item; results keep grid order.

    Each call receives its grid index, so random streams keyed by index are
    the same whatever worker picks the item up.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    indexed = list(enumerate(items))
    if threads == 1 or len(indexed) <= 1:
        return [fn(i, item) for i, item in indexed]
    with ThreadPoolExecutor(max_workers=min(threads, len(indexed))) as ex:
        return list(ex.map(lambda pair: fn(*pair), indexed))

"""Seeded, splittable random streams.

Every consumer asks for a generator by name (and grid index); the stream is
derived from the job seed through ``SeedSequence.spawn_key`` and drives a
counter-based Philox bit generator.  The same key always yields the same
stream, whatever order or thread the request comes from.
"""

from __future__ import annotations

import hashlib

import numpy as np

MAX_SEED = 2**64


def _key_word(part: str | int) -> int:
    if isinstance(part, int):
        if part < 0:
            raise ValueError(f"stream key parts must be nonnegative, got {part}")
        return part
    digest = hashlib.sha256(part.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


class RandomStreams:
    """Factory of independent generators keyed by (name, index, …)."""

    def __init__(self, seed: int) -> None:
        if not 0 <= int(seed) < MAX_SEED:
            raise ValueError(f"seed must be in [0, 2**64), got {seed}")
        self.seed = int(seed)

    def generator(self, *key: str | int) -> np.random.Generator:
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=tuple(_key_word(k) for k in key)
        )
        return np.random.Generator(np.random.Philox(sequence))

    def __repr__(self) -> str:
        return f"RandomStreams(seed={self.seed})"

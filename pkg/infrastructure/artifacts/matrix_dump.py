"""Binary dump of assembled operator matrices.

``<name>.bin`` holds the matrix row-major as little-endian complex128;
``<name>.json`` is its header (basis, L, parameter, measure_label, shape,
dtype, byte_order, assembly_margin).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from domain.errors import UsageError
from domain.ports.artifact_store import IArtifactStore
from spectral.operators import BandLimitedOperator

DTYPE = "<c16"


def dump_matrix(store: IArtifactStore, name: str, op: BandLimitedOperator) -> dict[str, Any]:
    """Stage ``op`` as ``name.bin`` + ``name.json``; return the header."""
    header = {**op.header(), "dtype": "complex128", "byte_order": "little"}
    data = np.ascontiguousarray(op.matrix, dtype=DTYPE).tobytes(order="C")
    store.write_bytes(f"{name}.bin", data)
    store.write_json(f"{name}.json", header)
    return header


def load_matrix(path: str | Path) -> tuple[np.ndarray, dict[str, Any]]:
    """Read back a dump given either file of the pair (or the stem)."""
    stem = Path(path)
    if stem.suffix in (".bin", ".json"):
        stem = stem.with_suffix("")
    header = json.loads(stem.with_name(stem.name + ".json").read_text(encoding="utf-8"))
    if header.get("dtype") != "complex128" or header.get("byte_order") != "little":
        raise UsageError(f"{stem}: unsupported matrix dump {header.get('dtype')!r}/"
                         f"{header.get('byte_order')!r}")
    shape = tuple(int(n) for n in header["shape"])
    raw = np.frombuffer(stem.with_name(stem.name + ".bin").read_bytes(), dtype=DTYPE)
    if raw.size != int(np.prod(shape)):
        raise UsageError(f"{stem}: expected {int(np.prod(shape))} entries, found {raw.size}")
    return raw.reshape(shape).astype(np.complex128), header

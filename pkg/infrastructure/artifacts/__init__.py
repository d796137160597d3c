# infrastructure/artifacts/__init__.py
from infrastructure.artifacts.matrix_dump import dump_matrix, load_matrix
from infrastructure.artifacts.store import StagedArtifactStore, encode_json, format_cell

__all__ = ["StagedArtifactStore", "dump_matrix", "encode_json", "format_cell", "load_matrix"]

"""Per-frame feature matrices and their on-disk formats."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import BadFileFormat, DimError, FeatureKindMismatch


class FeatureKind(str, Enum):
    """Named feature streams; the value doubles as the serialized tag."""

    ACRLAG = "ACRLAG"
    MFCC = "MFCC"
    LFCC = "LFCC"
    LPCC = "LPCC"
    LSF = "LSF"
    LAR = "LAR"
    PLPCC = "PLPCC"

    @classmethod
    def parse(cls, name: str) -> "FeatureKind":
        try:
            return cls(str(name).upper())
        except ValueError:
            raise BadFileFormat(f"unknown feature kind {name!r}") from None


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature vectors of one kind, one row per retained frame."""

    kind: FeatureKind
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("feature values must be a 2-D array (frame x coefficient)")
        if values.shape[1] < 1:
            raise ValueError("feature dimension must be at least 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", FeatureKind(self.kind))

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


FEATURE_MAGIC = b"VOXFTR01"


def concatenate_features(parts: Iterable[FeatureMatrix]) -> FeatureMatrix:
    """Stack matrices of one kind, keeping frame order."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to concatenate")
    kind = parts[0].kind
    dim = parts[0].dim
    for p in parts[1:]:
        if p.kind is not kind:
            raise FeatureKindMismatch(f"cannot mix {kind.value} with {p.kind.value}")
        if p.dim != dim:
            raise DimError(f"dimension mismatch: {dim} vs {p.dim}")
    return FeatureMatrix(kind, np.vstack([p.values for p in parts]))


def feature_matrix_to_bytes(matrix: FeatureMatrix) -> bytes:
    kind_bytes = matrix.kind.value.encode("utf-8")
    header = FEATURE_MAGIC + struct.pack(
        "<I", len(kind_bytes)
    ) + kind_bytes + struct.pack("<QQ", matrix.n_frames, matrix.dim)
    return header + matrix.values.astype("<f8").tobytes(order="C")


def feature_matrix_from_bytes(blob: bytes) -> FeatureMatrix:
    if len(blob) < len(FEATURE_MAGIC) + 4:
        raise BadFileFormat("feature file truncated before header")
    if blob[: len(FEATURE_MAGIC)] != FEATURE_MAGIC:
        raise BadFileFormat(
            f"bad feature-file magic {blob[:len(FEATURE_MAGIC)]!r}, expected {FEATURE_MAGIC!r}"
        )
    off = len(FEATURE_MAGIC)
    (kind_len,) = struct.unpack_from("<I", blob, off)
    off += 4
    if len(blob) < off + kind_len + 16:
        raise BadFileFormat("feature file truncated inside header")
    kind = FeatureKind.parse(blob[off : off + kind_len].decode("utf-8"))
    off += kind_len
    rows, cols = struct.unpack_from("<QQ", blob, off)
    off += 16
    expected = rows * cols * 8
    payload = blob[off:]
    if len(payload) != expected:
        raise BadFileFormat(
            f"feature payload has {len(payload)} bytes, expected {expected}"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(rows, cols)
    return FeatureMatrix(kind, values.copy())


def save_features(matrix: FeatureMatrix, path: str | Path) -> None:
    Path(path).write_bytes(feature_matrix_to_bytes(matrix))


def load_features(path: str | Path) -> FeatureMatrix:
    return feature_matrix_from_bytes(Path(path).read_bytes())


def export_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    """Write a plain CSV (header row of coefficient names) for inspection."""
    names = [f"{matrix.kind.value.lower()}_{i}" for i in range(matrix.dim)]
    np.savetxt(
        str(path),
        matrix.values,
        delimiter=",",
        header=",".join(names),
        comments="",
        fmt="%.17g",
    )

"""VXF1 on-disk feature container: one small binary file per clip."""

from __future__ import annotations

import struct

import numpy as np

FEATURE_MAGIC = b"VXF1"
FEATURE_TAGS = {"mfcc": 0, "melspec": 1, "vector": 2, "encoder": 3}
TAG_NAMES = {v: k for k, v in FEATURE_TAGS.items()}


def write_feature(path: str, matrix: np.ndarray, kind: str) -> None:
    """Dump a 2-D float matrix with its feature-kind tag."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<IIB", rows, cols, FEATURE_TAGS[kind]))
        fh.write(matrix.astype("<f4").tobytes())


def read_feature(path: str) -> tuple[np.ndarray, str]:
    data = open(path, "rb").read()
    if data[:4] != FEATURE_MAGIC:
        raise ValueError(f"{path}: not a VXF1 feature file")
    rows, cols, tag = struct.unpack_from("<IIB", data, 4)
    matrix = np.frombuffer(data, dtype="<f4", count=rows * cols,
                           offset=13).astype(np.float64).reshape(rows, cols)
    return matrix, TAG_NAMES[tag]

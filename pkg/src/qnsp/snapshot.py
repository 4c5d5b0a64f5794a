"""Self-describing binary container for a single scalar field.

Layout (all little-endian):

    bytes 0..6   magic  b"QNSPFLD"
    byte  7      format version (currently 1)
    byte  8      dim (1, 2 or 3)
    next         dim x uint32: points per axis
    next         float64: box length
    payload      prod(sizes) float64 physical-space samples, row-major

Vector fields are stored as one file per component; a checkpoint manifest
binds them together.  The format is documented in the README and stable
across package versions.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import SchemaError
from .fields import ScalarField
from .grid import Grid

MAGIC = b"QNSPFLD"
VERSION = 1


def write_snapshot(path, field: ScalarField):
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BB", VERSION, g.dim))
        fh.write(struct.pack(f"<{g.dim}I", *([g.n] * g.dim)))
        fh.write(struct.pack("<d", g.length))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path) -> ScalarField:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise SchemaError(f"{path}: bad magic {magic!r}")
        version, dim = struct.unpack("<BB", fh.read(2))
        if version != VERSION:
            raise SchemaError(f"{path}: unsupported snapshot version {version}")
        if dim not in (1, 2, 3):
            raise SchemaError(f"{path}: bad dim {dim}")
        sizes = struct.unpack(f"<{dim}I", fh.read(4 * dim))
        if len(set(sizes)) != 1:
            raise SchemaError(f"{path}: anisotropic sizes {sizes} are not supported")
        (length,) = struct.unpack("<d", fh.read(8))
        count = int(np.prod(sizes))
        payload = fh.read(8 * count)
        if len(payload) != 8 * count:
            raise SchemaError(f"{path}: truncated payload")
    values = np.frombuffer(payload, dtype="<f8").reshape(sizes)
    grid = Grid(dim, sizes[0], length)
    return ScalarField.from_values(grid, values.astype(float))

"""Binary field checkpoints.

Layout: header ``{magic "MLIM", version u32, n u32, field_count u32,
time f64, epsilon f64}`` followed by each field as n^3 little-endian f64 in
row-major order with x1 varying fastest.  In-memory arrays are indexed
[i1, i2, i3], so fields are transposed on the way in and out.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .field import SpectralField
from .grid import Grid

MAGIC = b"MLIM"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")


class CheckpointError(ValueError):
    pass


def write_checkpoint(
    path: str | Path,
    fields: Sequence[SpectralField],
    time: float,
    epsilon: float,
) -> None:
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise CheckpointError("checkpoint fields must share one grid")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, grid.n, len(fields), float(time), float(epsilon)))
        for f in fields:
            # transpose so x1 is the fastest-varying index on disk
            data = np.ascontiguousarray(f.values.transpose(2, 1, 0), dtype="<f8")
            fh.write(data.tobytes())


def read_checkpoint(path: str | Path) -> tuple[list[SpectralField], float, float]:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise CheckpointError(f"truncated header in {path}")
        magic, version, n, count, time, epsilon = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r} in {path}")
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        grid = Grid(n)
        fields = []
        for _ in range(count):
            buf = fh.read(8 * n**3)
            if len(buf) != 8 * n**3:
                raise CheckpointError(f"truncated field data in {path}")
            arr = np.frombuffer(buf, dtype="<f8").reshape(n, n, n)
            fields.append(SpectralField.from_values(grid, arr.transpose(2, 1, 0).copy()))
    return fields, time, epsilon

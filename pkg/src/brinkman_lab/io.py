"""
Field dumps and atomic file output.

Binary layout (little endian)::

    magic   4 bytes   b"BLF1"
    dim     u32
    n_cells u32
    extent  f64
    values  f64 * n_cells**dim, row major
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidParams
from .grid import Grid, ScalarField

MAGIC = b"BLF1"
_HEADER = struct.Struct("<4sIId")


def atomic_write_bytes(path, data: bytes) -> None:
    """Write to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def encode_field(f: ScalarField) -> bytes:
    g = f.grid
    header = _HEADER.pack(MAGIC, g.dim, g.n_cells, g.extent)
    return header + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def decode_field(data: bytes) -> ScalarField:
    if len(data) < _HEADER.size:
        raise InvalidParams("truncated field dump")
    magic, dim, n_cells, extent = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidParams(f"bad magic {magic!r}")
    grid = Grid(dim, extent, n_cells)
    count = n_cells ** dim
    body = data[_HEADER.size:]
    if len(body) != 8 * count:
        raise InvalidParams(f"expected {count} values, found {len(body) // 8}")
    values = np.frombuffer(body, dtype="<f8").reshape(grid.shape)
    return ScalarField(grid, values)


def write_field(path, f: ScalarField) -> None:
    atomic_write_bytes(path, encode_field(f))


def read_field(path) -> ScalarField:
    return decode_field(Path(path).read_bytes())


def field_csv(f: ScalarField) -> str:
    """One line per cell: centre coordinates, then the value."""
    g = f.grid
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = ["x", "y"][: g.dim]
    writer.writerow(names + ["value"])
    pts = g.points()
    vals = f.values.reshape(-1)
    for i in range(vals.size):
        writer.writerow([repr(float(c)) for c in pts[:, i]] + [repr(float(vals[i]))])
    return buf.getvalue()


def write_field_csv(path, f: ScalarField) -> None:
    atomic_write_text(path, field_csv(f))


def rows_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
